// Dense primal-dual interior-point method for mixed LP/SOC/PSD cones.
// Nesterov-Todd scaling, Mehrotra predictor-corrector, infeasible start.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "polyest/conic.hpp"

namespace polyest::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SocScale {
  double eta = 1.0;
  Vec wbar;
};

struct PsdScale {
  Mat R;
  Mat Rinv;
  Vec lam;
};

struct Scaling {
  Vec lp_w;
  std::vector<SocScale> soc;
  std::vector<PsdScale> psd;
  Vec lambda;
};

enum class Op { W, Wt, Winv, Wtinv };

// Per-block column structure of G, prepared once.
struct BlockCols {
  std::vector<int> cols;  // global columns touching the block
  SpMat g;                // block rows x cols.size()
  Mat dense;              // SOC only: dense copy of g
  // PSD only: matrix entries (i >= j, unscaled value) and row support of each column.
  std::vector<std::vector<std::array<int, 2>>> ij;
  std::vector<std::vector<double>> f;
  std::vector<std::vector<int>> support;
};

double soc_jnorm2(const Eigen::Ref<const Vec>& v) {
  const double r = v.tail(v.size() - 1).norm();
  return (v(0) - r) * (v(0) + r);
}

void soc_apply_wbar(const Vec& w, bool inverse, const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) {
  const Eigen::Index q = v.size();
  const double w0 = w(0);
  const auto w1 = w.tail(q - 1);
  const double wv = w1.dot(v.tail(q - 1));
  const double v0 = v(0);
  if (!inverse) {
    out(0) = w0 * v0 + wv;
    const double coef = v0 + wv / (1.0 + w0);
    out.tail(q - 1) = v.tail(q - 1) + coef * w1;
  } else {
    out(0) = w0 * v0 - wv;
    const double coef = -v0 + wv / (1.0 + w0);
    out.tail(q - 1) = v.tail(q - 1) + coef * w1;
  }
}

class Ipm {
 public:
  Ipm(const StandardForm& sf, const SolverOptions& opts) : sf_(sf), opts_(opts) {
    n_ = sf.n;
    p_ = static_cast<int>(sf.A.rows());
    Gt_ = sf.G.transpose();
    At_ = sf.A.transpose();
    prepare_blocks();
  }

  Solution run();

 private:
  const StandardForm& sf_;
  SolverOptions opts_;
  int n_ = 0;
  int p_ = 0;
  SpMat Gt_;
  SpMat At_;
  std::vector<BlockCols> blocks_;
  Scaling sc_;
  Mat K_;
  Mat KinvAt_;
  Eigen::LLT<Mat> schur_;

  void prepare_blocks();
  double degree() const;
  Vec identity() const;
  bool compute_scaling(const Vec& s, const Vec& z);
  void set_identity_scaling();
  Vec apply(Op op, const Vec& v) const;
  Vec jprod(const Vec& u, const Vec& v) const;
  Vec jdiv_lambda(const Vec& w) const;
  double max_step(const Vec& x, const Vec& dx) const;
  double interior_margin(const Vec& x) const;
  void build_h(Mat& H) const;
  bool factor();
  void solve_reduced(const Vec& r1, const Vec& r2, Vec& dx, Vec& dy) const;
  void newton(const Vec& rx, const Vec& ry, const Vec& rz, const Vec& d, Vec& dx, Vec& dy, Vec& dz,
              Vec& ds) const;
};

void Ipm::prepare_blocks() {
  SpMat Gc = sf_.G;  // column-major
  blocks_.resize(sf_.cones.size());
  for (std::size_t k = 0; k < sf_.cones.size(); ++k) {
    const ConeBlock& cb = sf_.cones[k];
    SpMat rows = Gc.middleRows(cb.offset, cb.size);
    BlockCols& bc = blocks_[k];
    std::vector<Eigen::Triplet<double>> trips;
    for (int j = 0; j < rows.outerSize(); ++j) {
      bool any = false;
      for (SpMat::InnerIterator it(rows, j); it; ++it) {
        if (!any) {
          bc.cols.push_back(j);
          any = true;
        }
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(bc.cols.size()) - 1, it.value());
      }
    }
    bc.g.resize(cb.size, static_cast<Eigen::Index>(bc.cols.size()));
    bc.g.setFromTriplets(trips.begin(), trips.end());
    if (cb.kind == ConeKind::SecondOrder) bc.dense = Mat(bc.g);
    if (cb.kind == ConeKind::Psd) {
      const int d = cb.dim;
      std::vector<std::array<int, 2>> decode(cb.size);
      for (int j = 0, idx = 0; j < d; ++j) {
        for (int i = j; i < d; ++i) decode[idx++] = {i, j};
      }
      const int t = static_cast<int>(bc.cols.size());
      bc.ij.resize(t);
      bc.f.resize(t);
      bc.support.resize(t);
      std::vector<char> mark(d, 0);
      for (int col = 0; col < t; ++col) {
        for (SpMat::InnerIterator it(bc.g, col); it; ++it) {
          const auto e = decode[it.row()];
          bc.ij[col].push_back(e);
          bc.f[col].push_back(e[0] == e[1] ? it.value() : it.value() / std::sqrt(2.0));
          for (int r : {e[0], e[1]}) {
            if (!mark[r]) {
              mark[r] = 1;
              bc.support[col].push_back(r);
            }
          }
        }
        for (int r : bc.support[col]) mark[r] = 0;
        std::sort(bc.support[col].begin(), bc.support[col].end());
      }
    }
  }
}

double Ipm::degree() const {
  double d = 0.0;
  for (const ConeBlock& cb : sf_.cones) d += (cb.kind == ConeKind::SecondOrder) ? 1.0 : cb.dim;
  return d;
}

Vec Ipm::identity() const {
  Vec e = Vec::Zero(sf_.cone_rows());
  for (const ConeBlock& cb : sf_.cones) {
    if (cb.kind == ConeKind::Nonneg) {
      e.segment(cb.offset, cb.size).setOnes();
    } else if (cb.kind == ConeKind::SecondOrder) {
      e(cb.offset) = 1.0;
    } else {
      e.segment(cb.offset, cb.size) = svec(Mat::Identity(cb.dim, cb.dim));
    }
  }
  return e;
}

void Ipm::set_identity_scaling() {
  sc_.soc.assign(sf_.cones.size(), {});
  sc_.psd.assign(sf_.cones.size(), {});
  sc_.lp_w = Vec::Ones(sf_.cone_rows());
  for (std::size_t k = 0; k < sf_.cones.size(); ++k) {
    const ConeBlock& cb = sf_.cones[k];
    if (cb.kind == ConeKind::SecondOrder) {
      sc_.soc[k].eta = 1.0;
      sc_.soc[k].wbar = Vec::Zero(cb.size);
      sc_.soc[k].wbar(0) = 1.0;
    } else if (cb.kind == ConeKind::Psd) {
      sc_.psd[k].R = Mat::Identity(cb.dim, cb.dim);
      sc_.psd[k].Rinv = Mat::Identity(cb.dim, cb.dim);
      sc_.psd[k].lam = Vec::Ones(cb.dim);
    }
  }
  sc_.lambda = identity();
}

bool Ipm::compute_scaling(const Vec& s, const Vec& z) {
  sc_.soc.assign(sf_.cones.size(), {});
  sc_.psd.assign(sf_.cones.size(), {});
  sc_.lp_w = Vec::Ones(sf_.cone_rows());
  sc_.lambda = Vec::Zero(sf_.cone_rows());
  for (std::size_t k = 0; k < sf_.cones.size(); ++k) {
    const ConeBlock& cb = sf_.cones[k];
    const auto sk = s.segment(cb.offset, cb.size);
    const auto zk = z.segment(cb.offset, cb.size);
    if (cb.kind == ConeKind::Nonneg) {
      if ((sk.array() <= 0.0).any() || (zk.array() <= 0.0).any()) return false;
      sc_.lp_w.segment(cb.offset, cb.size) = (sk.array() / zk.array()).sqrt();
      sc_.lambda.segment(cb.offset, cb.size) = (sk.array() * zk.array()).sqrt();
    } else if (cb.kind == ConeKind::SecondOrder) {
      const double sn = soc_jnorm2(sk);
      const double zn = soc_jnorm2(zk);
      if (sn <= 0.0 || zn <= 0.0 || sk(0) <= 0.0 || zk(0) <= 0.0) return false;
      const Vec sb = sk / std::sqrt(sn);
      const Vec zb = zk / std::sqrt(zn);
      const double gamma = std::sqrt(0.5 * (1.0 + zb.dot(sb)));
      Vec w(cb.size);
      w(0) = sb(0) + zb(0);
      w.tail(cb.size - 1) = sb.tail(cb.size - 1) - zb.tail(cb.size - 1);
      w /= 2.0 * gamma;
      SocScale& ss = sc_.soc[k];
      ss.wbar = w;
      ss.eta = std::pow(sn / zn, 0.25);
      Vec lam(cb.size);
      soc_apply_wbar(w, false, zk, lam);
      sc_.lambda.segment(cb.offset, cb.size) = ss.eta * lam;
    } else {
      const int d = cb.dim;
      const Mat S = smat(sk, d);
      const Mat Z = smat(zk, d);
      Eigen::LLT<Mat> ls(S);
      Eigen::LLT<Mat> lz(Z);
      if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
      const Mat Ls = ls.matrixL();
      const Mat Lz = lz.matrixL();
      Eigen::JacobiSVD<Mat> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec lam = svd.singularValues();
      if (lam.minCoeff() <= 0.0) return false;
      const Mat& V = svd.matrixV();
      PsdScale& ps = sc_.psd[k];
      ps.lam = lam;
      ps.R = Ls * V * lam.cwiseSqrt().cwiseInverse().asDiagonal();
      // Rinv = diag(sqrt(lam)) V' Ls^{-1}
      Mat M = Ls.transpose().triangularView<Eigen::Upper>().solve(V);
      ps.Rinv = (M * lam.cwiseSqrt().asDiagonal()).transpose();
      sc_.lambda.segment(cb.offset, cb.size) = svec(Mat(lam.asDiagonal()));
    }
  }
  return true;
}

Vec Ipm::apply(Op op, const Vec& v) const {
  Vec out(v.size());
  for (std::size_t k = 0; k < sf_.cones.size(); ++k) {
    const ConeBlock& cb = sf_.cones[k];
    const auto vk = v.segment(cb.offset, cb.size);
    auto ok = out.segment(cb.offset, cb.size);
    if (cb.kind == ConeKind::Nonneg) {
      const auto w = sc_.lp_w.segment(cb.offset, cb.size);
      if (op == Op::W || op == Op::Wt) {
        ok = w.array() * vk.array();
      } else {
        ok = vk.array() / w.array();
      }
    } else if (cb.kind == ConeKind::SecondOrder) {
      const SocScale& ss = sc_.soc[k];
      if (op == Op::W || op == Op::Wt) {
        soc_apply_wbar(ss.wbar, false, vk, ok);
        ok *= ss.eta;
      } else {
        soc_apply_wbar(ss.wbar, true, vk, ok);
        ok /= ss.eta;
      }
    } else {
      const PsdScale& ps = sc_.psd[k];
      const Mat V = smat(vk, cb.dim);
      Mat r;
      switch (op) {
        case Op::W: r = ps.R.transpose() * V * ps.R; break;
        case Op::Wt: r = ps.R * V * ps.R.transpose(); break;
        case Op::Winv: r = ps.Rinv.transpose() * V * ps.Rinv; break;
        case Op::Wtinv: r = ps.Rinv * V * ps.Rinv.transpose(); break;
      }
      ok = svec(r);
    }
  }
  return out;
}

Vec Ipm::jprod(const Vec& u, const Vec& v) const {
  Vec out(u.size());
  for (const ConeBlock& cb : sf_.cones) {
    const auto uk = u.segment(cb.offset, cb.size);
    const auto vk = v.segment(cb.offset, cb.size);
    auto ok = out.segment(cb.offset, cb.size);
    if (cb.kind == ConeKind::Nonneg) {
      ok = uk.array() * vk.array();
    } else if (cb.kind == ConeKind::SecondOrder) {
      ok(0) = uk.dot(vk);
      ok.tail(cb.size - 1) = uk(0) * vk.tail(cb.size - 1) + vk(0) * uk.tail(cb.size - 1);
    } else {
      const Mat U = smat(uk, cb.dim);
      const Mat V = smat(vk, cb.dim);
      const Mat P = U * V;
      ok = svec(0.5 * (P + P.transpose()));
    }
  }
  return out;
}

// Solves lambda o x = w for x.
Vec Ipm::jdiv_lambda(const Vec& w) const {
  Vec out(w.size());
  for (std::size_t k = 0; k < sf_.cones.size(); ++k) {
    const ConeBlock& cb = sf_.cones[k];
    const auto lk = sc_.lambda.segment(cb.offset, cb.size);
    const auto wk = w.segment(cb.offset, cb.size);
    auto ok = out.segment(cb.offset, cb.size);
    if (cb.kind == ConeKind::Nonneg) {
      ok = wk.array() / lk.array();
    } else if (cb.kind == ConeKind::SecondOrder) {
      const double l0 = lk(0);
      const auto l1 = lk.tail(cb.size - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double x0 = (l0 * wk(0) - l1.dot(wk.tail(cb.size - 1))) / det;
      ok(0) = x0;
      ok.tail(cb.size - 1) = (wk.tail(cb.size - 1) - x0 * l1) / l0;
    } else {
      const Vec& lam = sc_.psd[k].lam;
      Mat W = smat(wk, cb.dim);
      for (int j = 0; j < cb.dim; ++j) {
        for (int i = 0; i < cb.dim; ++i) W(i, j) *= 2.0 / (lam(i) + lam(j));
      }
      ok = svec(W);
    }
  }
  return out;
}

double Ipm::max_step(const Vec& x, const Vec& dx) const {
  double alpha = kInf;
  for (const ConeBlock& cb : sf_.cones) {
    const auto xk = x.segment(cb.offset, cb.size);
    const auto dk = dx.segment(cb.offset, cb.size);
    if (cb.kind == ConeKind::Nonneg) {
      for (int i = 0; i < cb.size; ++i) {
        if (dk(i) < 0.0) alpha = std::min(alpha, -xk(i) / dk(i));
      }
    } else if (cb.kind == ConeKind::SecondOrder) {
      const double a = soc_jnorm2(dk);
      const double b = xk(0) * dk(0) - xk.tail(cb.size - 1).dot(dk.tail(cb.size - 1));
      const double c = soc_jnorm2(xk);
      double root = kInf;
      if (a == 0.0) {
        if (b < 0.0) root = -c / (2.0 * b);
      } else {
        const double disc = b * b - a * c;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double q = -(b + (b >= 0.0 ? sq : -sq));
          const double r1 = q / a;
          const double r2 = (q != 0.0) ? c / q : kInf;
          for (double r : {r1, r2}) {
            if (r > 0.0) root = std::min(root, r);
          }
        }
      }
      // Also keep the leading coordinate positive.
      if (dk(0) < 0.0) root = std::min(root, -xk(0) / dk(0));
      alpha = std::min(alpha, root);
    } else {
      const Mat X = smat(xk, cb.dim);
      Eigen::LLT<Mat> llt(X);
      if (llt.info() != Eigen::Success) return 0.0;
      const Mat L = llt.matrixL();
      Mat M = L.triangularView<Eigen::Lower>().solve(smat(dk, cb.dim));
      M = L.triangularView<Eigen::Lower>().solve(Mat(M.transpose()));
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues()(0);
      if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
  }
  return alpha;
}

// max over blocks of -(smallest "eigenvalue"), i.e. how far x is outside the cone interior.
double Ipm::interior_margin(const Vec& x) const {
  double m = -kInf;
  for (const ConeBlock& cb : sf_.cones) {
    const auto xk = x.segment(cb.offset, cb.size);
    if (cb.kind == ConeKind::Nonneg) {
      m = std::max(m, -xk.minCoeff());
    } else if (cb.kind == ConeKind::SecondOrder) {
      m = std::max(m, xk.tail(cb.size - 1).norm() - xk(0));
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(smat(xk, cb.dim), Eigen::EigenvaluesOnly);
      m = std::max(m, -es.eigenvalues()(0));
    }
  }
  return m;
}

void Ipm::build_h(Mat& H) const {
  H.setZero(n_, n_);
  for (std::size_t k = 0; k < sf_.cones.size(); ++k) {
    const ConeBlock& cb = sf_.cones[k];
    const BlockCols& bc = blocks_[k];
    const int t = static_cast<int>(bc.cols.size());
    if (t == 0) continue;
    if (cb.kind == ConeKind::Nonneg) {
      const Vec winv = sc_.lp_w.segment(cb.offset, cb.size).cwiseInverse();
      SpMat gs = winv.asDiagonal() * bc.g;
      SpMat prod = SpMat(gs.transpose()) * gs;
      for (int j = 0; j < prod.outerSize(); ++j) {
        for (SpMat::InnerIterator it(prod, j); it; ++it) H(bc.cols[it.row()], bc.cols[j]) += it.value();
      }
    } else if (cb.kind == ConeKind::SecondOrder) {
      const SocScale& ss = sc_.soc[k];
      Mat gh(cb.size, t);
      for (int j = 0; j < t; ++j) {
        Vec col(cb.size);
        soc_apply_wbar(ss.wbar, true, bc.dense.col(j), col);
        gh.col(j) = col / ss.eta;
      }
      Mat hb = Mat::Zero(t, t);
      hb.selfadjointView<Eigen::Lower>().rankUpdate(gh.transpose());
      for (int j = 0; j < t; ++j) {
        for (int i = j; i < t; ++i) {
          H(bc.cols[i], bc.cols[j]) += hb(i, j);
          if (i != j) H(bc.cols[j], bc.cols[i]) += hb(i, j);
        }
      }
    } else {
      const int d = cb.dim;
      const PsdScale& ps = sc_.psd[k];
      const Mat P = ps.Rinv.transpose() * ps.Rinv;
      const int chunk = std::max(1, std::min(t, (1 << 22) / std::max(1, cb.size)));
      Mat Y(cb.size, chunk);
      std::vector<int> pos(d, -1);
      for (int c0 = 0; c0 < t; c0 += chunk) {
        const int nc = std::min(chunk, t - c0);
        for (int j = 0; j < nc; ++j) {
          const int col = c0 + j;
          const auto& ij = bc.ij[col];
          const auto& fv = bc.f[col];
          const auto& support = bc.support[col];
          const double nnz = static_cast<double>(ij.size());
          const double ns_d = static_cast<double>(support.size());
          const double cost_outer = 2.0 * nnz * d * d;
          const double cost_support = d * ns_d * ns_d + static_cast<double>(d) * d * ns_d;
          Mat Ym;
          if (cost_outer <= cost_support) {
            Ym = Mat::Zero(d, d);
            for (std::size_t q = 0; q < ij.size(); ++q) {
              const int ii = ij[q][0];
              const int jj = ij[q][1];
              if (ii == jj) {
                Ym.noalias() += fv[q] * P.col(ii) * P.row(ii);
              } else {
                Ym.noalias() += fv[q] * (P.col(ii) * P.row(jj) + P.col(jj) * P.row(ii));
              }
            }
          } else {
            const int ns = static_cast<int>(support.size());
            for (int a = 0; a < ns; ++a) pos[support[a]] = a;
            Mat Fs = Mat::Zero(ns, ns);
            for (std::size_t q = 0; q < ij.size(); ++q) {
              const int a = pos[ij[q][0]];
              const int b = pos[ij[q][1]];
              Fs(a, b) += fv[q];
              if (a != b) Fs(b, a) += fv[q];
            }
            Mat Ps(d, ns);
            for (int a = 0; a < ns; ++a) Ps.col(a) = P.col(support[a]);
            Ym.noalias() = Ps * Fs * Ps.transpose();
          }
          Y.col(j) = svec(Ym);
        }
        Mat hc = bc.g.transpose() * Y.leftCols(nc);
        for (int j = 0; j < nc; ++j) {
          const int gj = bc.cols[c0 + j];
          for (int i = 0; i < t; ++i) H(bc.cols[i], gj) += hc(i, j);
        }
      }
    }
  }
}

bool Ipm::factor() {
  build_h(K_);
  if (p_ > 0) {
    Mat AtA = Mat(At_ * sf_.A);
    K_ += AtA;
  }
  // Regularization proportional to each diagonal entry, so small entries are not swamped by large ones.
  const Vec base = K_.diagonal().cwiseAbs().cwiseMax(1e-8 * std::max(1.0, K_.diagonal().cwiseAbs().maxCoeff()));
  double reg = 1e-13;
  Mat backup;
  for (int attempt = 0; attempt < 6; ++attempt) {
    if (attempt == 0) backup = K_;
    else K_ = backup;
    K_.diagonal() += reg * base;
    const Eigen::Index info = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(K_);
    if (info < 0) break;
    reg *= 100.0;
    if (attempt == 5) return false;
  }
  if (p_ > 0) {
    Mat At = Mat(At_);
    KinvAt_ = K_.triangularView<Eigen::Lower>().solve(At);
    K_.triangularView<Eigen::Lower>().adjoint().solveInPlace(KinvAt_);
    Mat S = Mat(sf_.A * KinvAt_);
    S = (0.5 * (S + S.transpose())).eval();
    S.diagonal().array() += 1e-13 * std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());
    schur_.compute(S);
    if (schur_.info() != Eigen::Success) return false;
  }
  return true;
}

void Ipm::solve_reduced(const Vec& r1, const Vec& r2, Vec& dx, Vec& dy) const {
  Vec rt = r1;
  if (p_ > 0) rt += At_ * r2;
  Vec kr = K_.triangularView<Eigen::Lower>().solve(rt);
  K_.triangularView<Eigen::Lower>().adjoint().solveInPlace(kr);
  if (p_ > 0) {
    dy = schur_.solve(Vec(sf_.A * kr - r2));
    dx = kr - KinvAt_ * dy;
  } else {
    dy = Vec::Zero(0);
    dx = kr;
  }
}

void Ipm::newton(const Vec& rx, const Vec& ry, const Vec& rz, const Vec& d, Vec& dx, Vec& dy, Vec& dz,
                 Vec& ds) const {
  const Vec t = d - apply(Op::Wtinv, rz);
  Vec r1 = rx - Gt_ * apply(Op::Winv, t);
  solve_reduced(r1, ry, dx, dy);
  for (int refine = 0; refine < 8; ++refine) {
    Vec Gdx = sf_.G * dx;
    dz = apply(Op::Winv, Vec(apply(Op::Wtinv, Gdx) + t));
    Vec e1 = rx - Gt_ * dz;
    if (p_ > 0) e1 -= At_ * dy;
    Vec e2 = (p_ > 0) ? Vec(ry - sf_.A * dx) : Vec::Zero(0);
    const double err = std::max(e1.lpNorm<Eigen::Infinity>(), p_ > 0 ? e2.lpNorm<Eigen::Infinity>() : 0.0);
    const double ref = std::max({1.0, rx.lpNorm<Eigen::Infinity>(), p_ > 0 ? ry.lpNorm<Eigen::Infinity>() : 0.0});
    if (err <= 1e-14 * ref) break;
    Vec cx;
    Vec cy;
    // Correction: same system with rz = 0, d = 0, i.e. H cx + A' cy = e1, A cx = e2.
    solve_reduced(e1, e2, cx, cy);
    dx += cx;
    if (p_ > 0) dy += cy;
  }
  Vec Gdx = sf_.G * dx;
  dz = apply(Op::Winv, Vec(apply(Op::Wtinv, Gdx) + t));
  ds = rz - Gdx;
}

Solution Ipm::run() {
  Solution sol;
  const int m = sf_.cone_rows();
  const Vec e = identity();
  const double deg = std::max(1.0, degree());

  const double resx0 = std::max(1.0, sf_.c.norm());
  const double resy0 = std::max(1.0, sf_.b.norm());
  const double resz0 = std::max(1.0, sf_.h.norm());

  Vec x(n_), y(p_), z(m), s(m);
  Vec dx, dy, dz, ds;

  // Initial point: least-norm primal and dual solutions, then shifted into the cone interior.
  set_identity_scaling();
  if (!factor()) {
    sol.status = Status::MaxIterations;
    sol.x = Vec::Zero(n_);
    return sol;
  }
  newton(Vec::Zero(n_), sf_.b, sf_.h, Vec::Zero(m), dx, dy, dz, ds);
  x = dx;
  s = ds;
  newton(-sf_.c, Vec::Zero(p_), Vec::Zero(m), Vec::Zero(m), dx, dy, dz, ds);
  y = dy;
  z = dz;
  if (m > 0) {
    const double ts = interior_margin(s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    const double tz = interior_margin(z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  }

  Vec bx = x, by = y, bz = z, bs = s;
  double best_merit = kInf;
  Solution best;
  int stalls = 0;

  for (int it = 0; it <= opts_.max_iterations; ++it) {
    const Vec rx = Gt_ * z + (p_ > 0 ? Vec(At_ * y) : Vec::Zero(n_)) + sf_.c;
    const Vec ry = (p_ > 0) ? Vec(sf_.A * x - sf_.b) : Vec::Zero(0);
    const Vec rz = sf_.G * x + s - sf_.h;
    const double pcost = sf_.c.dot(x);
    const double dcost = -sf_.h.dot(z) - (p_ > 0 ? sf_.b.dot(y) : 0.0);
    const double gap = s.dot(z);
    const double pres = std::max(p_ > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0);
    const double dres = rx.norm() / resx0;
    const double relgap = std::max(gap, std::abs(pcost - dcost)) / std::max(1.0, std::abs(pcost));

    sol.x = x;
    sol.y = y;
    sol.z = z;
    sol.s = s;
    sol.primal_objective = pcost + sf_.c0;
    sol.dual_objective = dcost + sf_.c0;
    sol.gap = gap;
    sol.relative_gap = relgap;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.iterations = it;

    if (opts_.verbose) {
      std::fprintf(stderr, "%3d  pcost % .8e  dcost % .8e  gap %.2e  pres %.2e  dres %.2e\n", it, pcost,
                   dcost, gap, pres, dres);
    }

    const double merit = std::max({pres, dres, relgap});
    if (merit < best_merit) {
      best_merit = merit;
      best = sol;
    }
    if (pres <= opts_.tol && dres <= opts_.tol && relgap <= opts_.tol) {
      sol.status = Status::Optimal;
      return sol;
    }

    // Infeasibility certificates.
    const double hz_by = sf_.h.dot(z) + (p_ > 0 ? sf_.b.dot(y) : 0.0);
    if (hz_by < 0.0) {
      const Vec gz = Gt_ * z + (p_ > 0 ? Vec(At_ * y) : Vec::Zero(n_));
      const double pinf = gz.norm() / resx0 / (-hz_by);
      if (pinf <= opts_.tol && -hz_by > 1e-12) {
        sol.status = Status::Infeasible;
        return sol;
      }
    }
    if (pcost < 0.0) {
      const Vec gx = sf_.G * x + s;
      const double ax = (p_ > 0) ? Vec(sf_.A * x).norm() / resy0 : 0.0;
      const double dinf = std::max(ax, gx.norm() / resz0) / (-pcost);
      if (dinf <= opts_.tol && -pcost > 1e-12) {
        sol.status = Status::Unbounded;
        return sol;
      }
    }
    if (it == opts_.max_iterations) break;
    if (m == 0) {
      // No cones: a single Newton step on the equality-constrained linear problem.
      set_identity_scaling();
      if (!factor()) break;
      newton(-rx, -ry, Vec::Zero(0), Vec::Zero(0), dx, dy, dz, ds);
      x += dx;
      if (p_ > 0) y += dy;
      continue;
    }

    if (!compute_scaling(s, z) || !factor()) break;

    // Predictor.
    const Vec& lam = sc_.lambda;
    newton(-rx, -ry, -rz, -lam, dx, dy, dz, ds);
    const double aff_p = max_step(s, ds);
    const double aff_d = max_step(z, dz);
    const double alpha_aff = std::min({1.0, aff_p, aff_d});
    const double gap_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz);
    double sigma = std::pow(std::max(0.0, gap_aff) / gap, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);
    const double mu = gap / deg;

    // Corrector.
    const Vec ds_t = apply(Op::Wtinv, ds);
    const Vec dz_t = apply(Op::W, dz);
    const Vec rs = sigma * mu * e - jprod(lam, lam) - jprod(ds_t, dz_t);
    newton(-rx, -ry, -rz, jdiv_lambda(rs), dx, dy, dz, ds);
    const double amax = std::min(max_step(s, ds), max_step(z, dz));
    const double alpha = std::min(1.0, 0.99 * amax);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) break;
    x += alpha * dx;
    if (p_ > 0) y += alpha * dy;
    s += alpha * ds;
    z += alpha * dz;
    if (alpha < 1e-8) {
      if (++stalls >= 5) break;
    } else {
      stalls = 0;
    }
    if (!x.allFinite() || !z.allFinite() || !s.allFinite()) break;
  }
  best.status = Status::MaxIterations;
  (void)bx;
  (void)by;
  (void)bz;
  (void)bs;
  return best;
}

}  // namespace

Solution solve(const StandardForm& sf, const SolverOptions& opts) {
  if (sf.n == 0) {
    Solution sol;
    sol.x = Vec::Zero(0);
    sol.y = Vec::Zero(sf.A.rows());
    sol.s = sf.h;
    sol.z = Vec::Zero(sf.h.size());
    sol.primal_objective = sf.c0;
    sol.dual_objective = sf.c0;
    bool feasible = sf.b.size() == 0 || sf.b.lpNorm<Eigen::Infinity>() <= opts.tol;
    for (const ConeBlock& cb : sf.cones) {
      const auto hk = sf.h.segment(cb.offset, cb.size);
      if (cb.kind == ConeKind::Nonneg) {
        feasible = feasible && hk.minCoeff() >= -opts.tol;
      } else if (cb.kind == ConeKind::SecondOrder) {
        feasible = feasible && hk(0) + opts.tol >= hk.tail(cb.size - 1).norm();
      } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(smat(hk, cb.dim), Eigen::EigenvaluesOnly);
        feasible = feasible && es.eigenvalues()(0) >= -opts.tol;
      }
    }
    sol.status = feasible ? Status::Optimal : Status::Infeasible;
    return sol;
  }
  Ipm ipm(sf, opts);
  return ipm.run();
}

Solution solve(const Program& p, const SolverOptions& opts) { return solve(p.compile(), opts); }

bool check_membership(const Program& p, double tol) {
  int t = -1;
  const Program r = p.relaxed(&t);
  SolverOptions opts;
  opts.tol = std::clamp(0.01 * tol, 1e-10, 1e-8);
  const Solution sol = solve(r, opts);
  if (sol.x.size() == 0) return false;
  // equalities are not relaxed, so an unconverged iterate may violate them
  const bool converged = sol.optimal() || (sol.status == Status::MaxIterations && sol.primal_residual <= 1e-7);
  return converged && sol.x(t) <= tol;
}

}  // namespace polyest::conic

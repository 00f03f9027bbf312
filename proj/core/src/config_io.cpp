#include "polyest/config_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace polyest {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) fail(where, "unknown key '" + it.key() + "'");
  }
}

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return j.at(key);
}

// Numbers, or the strings "inf" / "infinity".
double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
  }
  fail(where, "expected a number");
}

double number_or(const json& j, const std::string& where, const char* key, double fallback) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long>();
}

int int_or(const json& j, const std::string& where, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const long v = integer(j.at(key), where + "." + key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(where, "integer out of range");
  return static_cast<int>(v);
}

double probability(const json& j, const std::string& where) {
  const double p = number(j, where);
  if (!(p > 0.0 && p < 1.0)) fail(where, "probability must lie in (0,1)");
  return p;
}

Vec vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  if (!v.allFinite()) fail(where, "entries must be finite");
  return v;
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  Vec v = vector(j, where);
  return {v.data(), v.data() + v.size()};
}

Mat matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(where, "rows must be arrays of equal length");
    for (std::size_t k = 0; k < cols; ++k) M(i, k) = number(j[i][k], where);
  }
  if (!M.allFinite()) fail(where, "entries must be finite");
  return M;
}

MonotoneSet monotone(const json& j, const std::string& where) {
  allow_keys(j, where, {"type", "upper", "gamma", "p", "weights", "dim"});
  const std::string type = need(j, where, "type").get<std::string>();
  const int dim = int_or(j, where, "dim", 1);
  if (type == "box") return MonotoneSet::box(j.contains("upper") ? vector(j.at("upper"), where) : Vec::Ones(dim));
  if (type == "ball") {
    return MonotoneSet::ball(j.contains("gamma") ? vector(j.at("gamma"), where) : Vec::Ones(dim),
                             number(need(j, where, "p"), where + ".p"));
  }
  if (type == "simplex") return MonotoneSet::simplex(j.contains("weights") ? vector(j.at("weights"), where) : Vec::Ones(dim));
  fail(where, "unknown monotone set type '" + type + "'");
}

SignalSet signal_set(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::string type = need(j, where, "type").get<std::string>();
  if (type == "box") {
    allow_keys(j, where, {"type", "lower", "upper", "n", "radius"});
    if (j.contains("n")) {
      const int n = int_or(j, where, "n", 0);
      const double rad = number_or(j, where, "radius", 1.0);
      if (n < 1 || !(rad > 0.0) || !std::isfinite(rad)) fail(where, "box needs n >= 1 and a positive finite radius");
      return make_box(-rad * Vec::Ones(n), rad * Vec::Ones(n));
    }
    Vec lo = vector(need(j, where, "lower"), where + ".lower");
    Vec hi = vector(need(j, where, "upper"), where + ".upper");
    if (lo.size() != hi.size() || lo.size() == 0 || (hi - lo).minCoeff() < 0.0) fail(where, "box needs lower <= upper");
    return make_box(lo, hi);
  }
  if (type == "ball") {
    allow_keys(j, where, {"type", "p", "n", "gamma"});
    const double p = number(need(j, where, "p"), where + ".p");
    if (!(p >= 1.0)) fail(where, "ball exponent must be >= 1");
    Vec gamma = j.contains("gamma") ? vector(j.at("gamma"), where + ".gamma") : Vec::Ones(int_or(j, where, "n", 0));
    if (gamma.size() == 0 || gamma.minCoeff() <= 0.0) fail(where, "ball needs n >= 1 or positive gamma");
    return ScaledBall{gamma, p};
  }
  if (type == "simplex") {
    allow_keys(j, where, {"type", "n", "equality", "C", "d"});
    Simplex s;
    s.n = int_or(j, where, "n", 0);
    if (s.n < 1) fail(where, "simplex needs n >= 1");
    s.equality = j.value("equality", true);
    if (j.contains("C")) {
      s.C = matrix(j.at("C"), where + ".C");
      s.d = vector(need(j, where, "d"), where + ".d");
      if (s.C.cols() != s.n || s.C.rows() != s.d.size()) fail(where, "simplex C, d have wrong sizes");
    } else {
      s.C = Mat(0, s.n);
      s.d = Vec(0);
    }
    return s;
  }
  if (type == "ellitope") {
    allow_keys(j, where, {"type", "M", "R", "calR"});
    Ellitope e;
    e.M = matrix(need(j, where, "M"), where + ".M");
    for (const json& r : need(j, where, "R")) e.R.push_back(matrix(r, where + ".R"));
    e.calR = monotone(need(j, where, "calR"), where + ".calR");
    return e;
  }
  if (type == "spectratope") {
    allow_keys(j, where, {"type", "M", "R", "calR"});
    Spectratope s;
    s.M = matrix(need(j, where, "M"), where + ".M");
    for (const json& blocks : need(j, where, "R")) {
      std::vector<Mat> bl;
      for (const json& r : blocks) bl.push_back(matrix(r, where + ".R"));
      s.R.push_back(std::move(bl));
    }
    s.calR = monotone(need(j, where, "calR"), where + ".calR");
    return s;
  }
  if (type == "linear_image") {
    allow_keys(j, where, {"type", "M", "inner"});
    return LinearImage{matrix(need(j, where, "M"), where + ".M"), signal_set(need(j, where, "inner"), where + ".inner")};
  }
  if (type == "intersection") {
    allow_keys(j, where, {"type", "parts"});
    Intersection in;
    for (const json& p : need(j, where, "parts")) in.parts.push_back(signal_set(p, where + ".parts"));
    return in;
  }
  if (type == "symmetrized") {
    allow_keys(j, where, {"type", "inner"});
    return Symmetrized{signal_set(need(j, where, "inner"), where + ".inner")};
  }
  fail(where, "unknown set type '" + type + "'");
}

NormSpec norm_spec(const json& j, const std::string& where) {
  if (j.is_object()) {
    allow_keys(j, where, {"conjugate_ball"});
    return NormSpec::dual_of(signal_set(need(j, where, "conjugate_ball"), where + ".conjugate_ball"));
  }
  const double r = number(j, where);
  if (!(r >= 1.0)) fail(where, "norm exponent must be >= 1");
  return NormSpec::lp(r);
}

ObservationScheme scheme(const json& j, const std::string& where) {
  allow_keys(j, where, {"type", "sigma", "K"});
  const std::string type = need(j, where, "type").get<std::string>();
  if (type == "gaussian" || type == "sub_gaussian") {
    const double s = number(need(j, where, "sigma"), where + ".sigma");
    if (!(s >= 0.0) || !std::isfinite(s)) fail(where, "sigma must be finite and nonnegative");
    return SubGaussian{s};
  }
  if (type == "discrete") {
    const long k = integer(need(j, where, "K"), where + ".K");
    if (k < 1) fail(where, "K must be >= 1");
    return DiscreteScheme{k};
  }
  if (type == "poisson") return PoissonScheme{};
  fail(where, "unknown scheme type '" + type + "'");
}

ScenarioSpec scenario_spec(const json& j) {
  const std::string where = "problem";
  if (!j.is_object()) fail(where, "expected an object");
  if (!j.contains("generator")) {
    allow_keys(j, where, {"A", "B", "X", "norm", "scheme", "eps", "trials"});
    InlineSpec s{EstimationProblem{matrix(need(j, where, "A"), "problem.A"), matrix(need(j, where, "B"), "problem.B"),
                                   signal_set(need(j, where, "X"), "problem.X"),
                                   norm_spec(need(j, where, "norm"), "problem.norm"),
                                   scheme(need(j, where, "scheme"), "problem.scheme"),
                                   probability(need(j, where, "eps"), "problem.eps")},
                 int_or(j, where, "trials", 20)};
    s.problem.validate();
    return s;
  }
  const std::string gen = j.at("generator").get<std::string>();
  if (gen == "double_integration") {
    allow_keys(j, where, {"generator", "n", "m", "delta", "sigma_list", "eps", "trials", "norm"});
    DoubleIntegrationSpec s;
    s.n = int_or(j, where, "n", s.n);
    s.m = int_or(j, where, "m", s.m);
    s.delta = number_or(j, where, "delta", 0.0);
    if (j.contains("sigma_list")) s.sigma_list = number_list(j.at("sigma_list"), "problem.sigma_list");
    if (j.contains("eps")) s.eps = probability(j.at("eps"), "problem.eps");
    s.trials = int_or(j, where, "trials", s.trials);
    s.r = number_or(j, where, "norm", s.r);
    if (s.delta < 0.0) fail(where, "delta must be positive (or 0 for 4/n)");
    return s;
  }
  if (gen == "motivating") {
    allow_keys(j, where, {"generator", "n", "sigma", "trials"});
    MotivatingSpec s;
    s.n = int_or(j, where, "n", s.n);
    s.sigma = number_or(j, where, "sigma", s.sigma);
    s.trials = int_or(j, where, "trials", s.trials);
    return s;
  }
  if (gen == "diagonal") {
    allow_keys(j, where, {"generator", "n", "alpha", "beta", "delta_exp", "rho", "r", "sigma", "eps", "trials"});
    DiagonalSpec s;
    s.n = int_or(j, where, "n", s.n);
    s.alpha = number_or(j, where, "alpha", s.alpha);
    s.beta = number_or(j, where, "beta", s.beta);
    s.delta_exp = number_or(j, where, "delta_exp", s.delta_exp);
    s.rho = number_or(j, where, "rho", s.rho);
    s.r = number_or(j, where, "r", s.r);
    if (j.contains("sigma")) s.sigma = number_list(j.at("sigma"), "problem.sigma");
    if (j.contains("eps")) s.eps = probability(j.at("eps"), "problem.eps");
    s.trials = int_or(j, where, "trials", s.trials);
    return s;
  }
  fail(where, "unknown generator '" + gen + "'");
}

json matrix_json(const Mat& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json pairs_json(const std::vector<std::pair<std::string, std::string>>& v) {
  json o = json::object();
  for (const auto& [k, s] : v) o[k] = s;
  return o;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    allow_keys(j, "config", {"id", "seed", "output", "estimators", "record_timing", "jobs", "problem"});
    ScenarioConfig c;
    if (j.contains("id")) c.id = j.at("id").get<std::string>();
    if (c.id.empty() || c.id.find_first_of(",\"\n\r") != std::string::npos) {
      fail("config.id", "must be nonempty without commas, quotes or newlines");
    }
    if (j.contains("seed")) {
      const json& s = j.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long>() >= 0)) {
        fail("config.seed", "expected a nonnegative integer");
      }
      c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("estimators")) {
      for (const json& e : j.at("estimators")) c.estimators.push_back(parse_estimator(e.get<std::string>()));
    }
    if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
    c.jobs = int_or(j, "config", "jobs", 1);
    if (c.jobs < 1) fail("config.jobs", "must be >= 1");
    c.spec = scenario_spec(need(j, "config", "problem"));
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config has a wrong type: ") + e.what());
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SignalSet parse_signal_set(const std::string& json_text) {
  try {
    return signal_set(json::parse(json_text), "set");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("set: ") + e.what());
  }
}

void write_json(std::ostream& os, const RunResult& result) {
  json rows = json::array();
  for (const ResultRow& r : result.rows) {
    rows.push_back({{"scenario", r.scenario},
                    {"estimator", r.estimator},
                    {"sigma", r.sigma},
                    {"trial", r.trial},
                    {"error", r.error},
                    {"bound", r.bound},
                    {"seconds", r.seconds}});
  }
  json summary = json::object();
  for (const auto& [k, v] : result.summary) summary[k] = v;
  json out = {{"metadata", pairs_json(result.metadata)}, {"summary", summary}, {"rows", rows}};
  os << out.dump(2) << '\n';
}

void write_design_json(std::ostream& os, const DesignReport& report) {
  json entries = json::array();
  for (const DesignEntry& e : report.entries) {
    entries.push_back({{"estimator", e.estimator},
                       {"sigma", e.sigma},
                       {"bound", e.certificate.bound},
                       {"eps", e.certificate.eps},
                       {"norm", e.certificate.norm},
                       {"provenance", e.certificate.provenance},
                       {"seconds", e.seconds},
                       {"H", matrix_json(e.H)}});
  }
  json out = {{"scenario", report.scenario}, {"metadata", pairs_json(report.metadata)}, {"designs", entries}};
  os << out.dump(2) << '\n';
}

}  // namespace polyest

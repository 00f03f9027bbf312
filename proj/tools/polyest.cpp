#include "polyest/config_io.hpp"
#include "polyest/experiments.hpp"
#include "polyest/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

namespace {

enum Exit { kOk = 0, kConfig = 1, kVerify = 2, kSolver = 3 };

struct Options {
  std::string path;
  std::string suite;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::string format = "csv";
  std::optional<int> jobs;
};

void override_trials(polyest::ScenarioConfig& c, int trials) {
  if (trials < 1) throw std::invalid_argument("--trials must be positive");
  std::visit([trials](auto& s) { s.trials = trials; }, c.spec);
}

polyest::ScenarioConfig load(const Options& o) {
  polyest::ScenarioConfig c = polyest::load_config(o.path);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) override_trials(c, *o.trials);
  if (o.jobs) c.jobs = *o.jobs;
  if (c.jobs < 1) throw std::invalid_argument("--jobs must be positive");
  if (!o.out.empty()) c.output = o.out;
  return c;
}

template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open output '" + path + "'");
  write(f);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

int cmd_run(const Options& o) {
  polyest::ScenarioConfig c = load(o);
  polyest::RunResult r = polyest::run_scenario(c);
  emit(c.output, [&](std::ostream& os) {
    if (o.format == "json") polyest::write_json(os, r);
    else polyest::write_csv(os, r.rows);
  });
  for (const auto& [k, v] : r.summary) std::cerr << "# " << k << " = " << v << '\n';
  return kOk;
}

int cmd_design(const Options& o) {
  if (o.format != "json" && o.format != "csv") throw std::invalid_argument("unknown format");
  polyest::ScenarioConfig c = load(o);
  polyest::DesignReport r = polyest::design_scenario(c);
  emit(c.output, [&](std::ostream& os) {
    if (o.format == "json") {
      polyest::write_design_json(os, r);
      return;
    }
    os << "scenario,estimator,sigma,bound,provenance\n";
    for (const auto& e : r.entries) {
      os << r.scenario << ',' << e.estimator << ',' << e.sigma << ',' << e.certificate.bound << ','
         << e.certificate.provenance << '\n';
    }
  });
  return kOk;
}

int cmd_verify(const Options& o) {
  polyest::VerifyReport r = polyest::run_verify(o.suite, o.seed.value_or(1), o.jobs.value_or(1));
  emit(o.out, [&](std::ostream& os) {
    for (const auto& c : r.checks) {
      os << (c.passed ? "PASS " : "FAIL ") << c.suite << " / " << c.name << " : " << c.detail << '\n';
    }
    os << (r.passed() ? "verify: all checks passed" : "verify: failures present") << '\n';
  });
  return r.passed() ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyhedral estimation for linear inverse problems"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output path (default: config output or stdout)");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "Run a scenario config and emit result rows");
  run->add_option("config", o.path, "Scenario JSON")->required();
  run->add_option("--trials", o.trials, "Override the trial count")->check(CLI::PositiveNumber);
  run->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  common(run);
  CLI::App* design = app.add_subcommand("design", "Build contrasts and certificates without simulation");
  design->add_option("config", o.path, "Scenario JSON")->required();
  design->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  common(design);
  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", o.suite, "Suite name")->required()->check(CLI::IsMember(polyest::verify_suites()));
  common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    if (*run) return cmd_run(o);
    if (*design) {
      if (design->count("--format") == 0) o.format = "json";
      return cmd_design(o);
    }
    return cmd_verify(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
}

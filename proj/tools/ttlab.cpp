// Command-line front end: simulation runs, linear decay studies, decay-rate
// fits, inequality verification, small-grid oracle checks, and steady-state
// drift audits, all driven by one INI config.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical abort,
// 3 I/O error, 4 verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ttlab/experiments.hpp"

namespace {

using nlohmann::ordered_json;

struct CliOptions {
  std::string config;
  std::string output;
  long long seed = -1;
  bool has_seed = false;
  std::vector<std::string> overrides;
};

std::vector<std::pair<std::string, std::string>> collect_overrides(const CliOptions& opt) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const std::string& o : opt.overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos)
      throw ttlab::ConfigError("override '" + o + "' must look like section.key=value");
    kv.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  if (opt.has_seed) {
    kv.emplace_back("init.seed", std::to_string(opt.seed));
    kv.emplace_back("inequalities.seed", std::to_string(opt.seed));
  }
  if (!opt.output.empty()) kv.emplace_back("output.dir", opt.output);
  return kv;
}

ttlab::ExperimentConfig load(const CliOptions& opt,
                             std::vector<std::pair<std::string, std::string>> extra = {}) {
  if (opt.config.empty()) throw ttlab::ConfigError("--config is required");
  auto kv = collect_overrides(opt);
  kv.insert(kv.end(), extra.begin(), extra.end());
  return ttlab::load_config(opt.config, kv);
}

int cmd_simulate(const CliOptions& opt, bool force_linear_exact) {
  std::vector<std::pair<std::string, std::string>> extra;
  if (force_linear_exact) extra.emplace_back("stepper.propagation", "linear-exact");
  ttlab::ExperimentConfig cfg = load(opt, extra);
  std::filesystem::create_directories(cfg.output.dir);
  const std::string series_path = cfg.output.dir + "/" + cfg.output.series;
  std::ofstream series(series_path, std::ios::trunc);
  if (!series) throw ttlab::IoError("cannot open series file for writing: " + series_path);
  ttlab::RunResult res = ttlab::run_experiment(cfg, series);
  ttlab::State dev = cfg.model.form == ttlab::ModelForm::perturbation
                         ? res.final_state
                         : [&] {
                             ttlab::State d = res.final_state;
                             ttlab::State base = ttlab::steady_state(cfg.grid, cfg.model);
                             for (int a = 0; a < cfg.grid.d; ++a)
                               d.u.comp[a].c[0] -= base.u.comp[a].c[0];
                             d.eta.c[0] -= base.eta.c[0];
                             return d;
                           }();
  ordered_json j;
  j["series"] = series_path;
  j["steps"] = res.steps;
  j["records"] = res.records;
  j["t_final"] = res.final_state.t;
  j["h3_final"] = ttlab::sobolev_pair(dev, 3);
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_fit_decay(const CliOptions& opt) {
  ttlab::ExperimentConfig cfg = load(opt);
  const std::string series_path = cfg.output.dir + "/" + cfg.output.series;
  bool all_pass = true;
  for (int level : cfg.fit.levels) {
    std::ifstream in(series_path);
    if (!in) throw ttlab::IoError("cannot open series file: " + series_path);
    auto samples = ttlab::read_series_level(in, level);
    ttlab::DecayFit fit = ttlab::fit_decay(samples, level, cfg.diag.s, cfg.fit.t0, cfg.fit.t1,
                                           cfg.fit.tolerance);
    ordered_json j;
    j["level"] = fit.level;
    j["slope"] = fit.slope;
    j["stderr"] = fit.stderr_;
    j["expected"] = fit.expected;
    j["tolerance"] = fit.tolerance;
    j["t0"] = fit.t0;
    j["t1"] = fit.t1;
    j["points"] = fit.points;
    j["pass"] = fit.pass;
    std::cout << j.dump() << "\n";
    all_pass = all_pass && fit.pass;
  }
  return all_pass ? 0 : 4;
}

int cmd_verify_inequalities(const CliOptions& opt) {
  ttlab::ExperimentConfig cfg = load(opt);
  ttlab::TrialEnsemble ens;
  ens.grid = cfg.grid;
  ens.spectrum = ttlab::Spectrum::parse(cfg.ineq.spectrum);
  ens.count = cfg.ineq.count;
  ens.seed = cfg.ineq.seed;
  std::vector<ttlab::InequalityReport> reports =
      ttlab::run_inequality_suite(ens, cfg.ineq.items);
  bool ok = true;
  for (const auto& r : reports) {
    bool pass = !r.exact_constant || r.max_ratio <= 1.0 + 1e-9;
    ok = ok && pass;
    ordered_json j;
    j["item"] = r.name;
    j["params"] = r.params;
    j["count"] = r.count;
    j["max_ratio"] = r.max_ratio;
    j["max_ratio_half"] = r.max_ratio_half;
    j["argmax_seed"] = r.argmax_seed;
    j["box_length"] = r.box_length;
    j["exact_constant"] = r.exact_constant;
    j["stable"] = r.stable;
    j["pass"] = pass;
    std::cout << j.dump() << "\n";
    if (!r.stable)
      std::cerr << "warning: " << r.name << " [" << r.params
                << "] largest ratio still moving under ensemble doubling; treat the bound as "
                   "unconverged\n";
  }
  return ok ? 0 : 4;
}

int cmd_oracle(const CliOptions& opt) {
  ttlab::ExperimentConfig cfg = load(opt);
  bool ok = true;
  for (ttlab::ModelKind kind : {ttlab::ModelKind::pptt, ttlab::ModelKind::tt}) {
    ttlab::OracleReport rep = ttlab::oracle_smallgrid(cfg.grid, kind, cfg.oracle.seed,
                                                      cfg.oracle.amplitude, cfg.oracle.mean_shift,
                                                      cfg.oracle.dt, cfg.oracle.tolerance);
    ordered_json j;
    j["model"] = ttlab::to_string(kind);
    j["tolerance"] = rep.tolerance;
    ordered_json checks = ordered_json::object();
    for (const auto& c : rep.checks) checks[c.name] = c.err;
    j["checks"] = checks;
    j["max_err"] = rep.max_err();
    j["pass"] = rep.pass();
    std::cout << j.dump() << "\n";
    ok = ok && rep.pass();
  }
  return ok ? 0 : 4;
}

int cmd_steady_check(const CliOptions& opt) {
  ttlab::ExperimentConfig cfg = load(opt);
  const ttlab::GridSpec& g = cfg.grid;
  ttlab::State init = cfg.model.form == ttlab::ModelForm::primitive
                          ? ttlab::steady_state(g, cfg.model)
                          : ttlab::State::zeros(g);
  const double mean0 = ttlab::mean_eta(init);
  ttlab::Stepper stepper(g, cfg.model, cfg.stepper);
  double max_h3 = 0.0, max_mean = 0.0;
  size_t steps = 0;
  ttlab::State base = ttlab::steady_state(g, cfg.model);
  stepper.integrate(init, [&](const ttlab::State& full, const ttlab::StepReport& rep) {
    ttlab::State dev = full;
    if (cfg.model.form == ttlab::ModelForm::primitive) {
      for (int a = 0; a < g.d; ++a) dev.u.comp[a].c[0] -= base.u.comp[a].c[0];
      dev.eta.c[0] -= base.eta.c[0];
    }
    max_h3 = std::max(max_h3, ttlab::sobolev_pair(dev, 3));
    max_mean = std::max(max_mean, std::abs(ttlab::mean_eta(full) - mean0));
    steps = rep.step;
  });
  const bool pass = max_h3 <= cfg.steady.tolerance && max_mean <= 1e-12;
  ordered_json j;
  j["model"] = ttlab::to_string(cfg.model.kind);
  j["form"] = ttlab::to_string(cfg.model.form);
  j["steps"] = steps;
  j["t_end"] = cfg.stepper.t_end;
  j["h3_drift"] = max_h3;
  j["mean_eta_drift"] = max_mean;
  j["tolerance"] = cfg.steady.tolerance;
  j["pass"] = pass;
  std::cout << j.dump() << "\n";
  return pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toner-Tu and parabolic-parabolic Toner-Tu flocking lab"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config,-c", opt.config, "INI configuration file")->expected(1);
  auto* seed_opt = app.add_option("--seed", opt.seed, "override init and inequality seeds");
  app.add_option("--output,-o", opt.output, "override output directory");
  app.add_option("--override,-D", opt.overrides,
                 "override one config value, section.key=value (repeatable)");

  auto* sim = app.add_subcommand("simulate", "integrate the configured model and write a series");
  auto* lin = app.add_subcommand("linear-decay",
                                 "evolve under the exact linear propagator and write a series");
  auto* fit = app.add_subcommand("fit-decay", "fit decay exponents from a written series");
  auto* ineq = app.add_subcommand("verify-inequalities",
                                  "stress the functional inequalities on random ensembles");
  auto* orc = app.add_subcommand("oracle",
                                 "check the spectral pipeline against direct convolution");
  auto* steady = app.add_subcommand("steady-check",
                                    "integrate from the ordered steady state and report drift");
  for (CLI::App* sub : {sim, lin, fit, ineq, orc, steady}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  opt.has_seed = seed_opt->count() > 0;

  try {
    if (sim->parsed()) return cmd_simulate(opt, false);
    if (lin->parsed()) return cmd_simulate(opt, true);
    if (fit->parsed()) return cmd_fit_decay(opt);
    if (ineq->parsed()) return cmd_verify_inequalities(opt);
    if (orc->parsed()) return cmd_oracle(opt);
    if (steady->parsed()) return cmd_steady_check(opt);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ttlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ttlab::WindowTooShort& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ttlab::BlowUp& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const ttlab::NonFiniteField& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const ttlab::SolveSingular& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const ttlab::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const ttlab::ChecksumMismatch& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const ttlab::NotANumberInSeries& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const ttlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

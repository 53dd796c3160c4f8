// modnls: command-line front end.
//
// Exit codes: 0 success, 1 numerical failure (or bad input), 2 hypothesis violation.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "modnls/modnls.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace modnls;

namespace {

struct Run {
  std::string config_path;
  std::uint64_t seed = 7;
  std::string out_dir = "modnls-out";
  int threads = 0;
  std::string subcommand;
  std::vector<std::string> outputs;
  json effective = json::object();
  json arguments = json::object();

  std::string path(const std::string& name) {
    fs::create_directories(out_dir);
    outputs.push_back(name);
    return (fs::path(out_dir) / name).string();
  }

  void json_out(const std::string& name, const json& j) { write_json(path(name), j); }

  std::ofstream csv(const std::string& name) {
    std::ofstream os(path(name));
    if (!os) throw Error("cannot write '" + name + "'");
    return os;
  }
};

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_manifest(Run& run, const std::string& status, int code, const std::string& message, double wall) {
  json m;
  m["tool"] = "modnls";
  m["subcommand"] = run.subcommand;
  m["seed"] = run.seed;
  m["threads"] = thread_count();
  m["config_path"] = run.config_path;
  json hashed{{"subcommand", run.subcommand}, {"arguments", run.arguments}, {"config", run.effective}, {"seed", run.seed}};
  m["config_hash"] = hex(fnv1a(hashed.dump()));
  json versions;
  versions["modnls"] = kVersion;
  versions["fftw"] = std::string(fftw_version);
  versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  versions["cli11"] = CLI11_VERSION;
  versions["compiler"] = __VERSION__;
  m["versions"] = versions;
  m["status"] = status;
  m["exit_code"] = code;
  if (!message.empty()) m["message"] = message;
  m["wall_time_s"] = wall;
  m["outputs"] = run.outputs;
  try {
    fs::create_directories(run.out_dir);
    write_json((fs::path(run.out_dir) / "manifest.json").string(), m);
  } catch (const std::exception& e) {
    std::cerr << "warning: manifest not written: " << e.what() << "\n";
  }
}

RunConfig config_for(Run& run) {
  RunConfig rc = run.config_path.empty() ? parse_config("", run.seed) : load_config(run.config_path, run.seed);
  run.effective = rc.effective;
  return rc;
}

/// JSON has no infinities or NaN: those become strings.
json num(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

json interval_json(const Interval& I) { return json::array({I.lo.str(), I.hi.str()}); }

json ledger_json(const ParamLedger& L) {
  json j;
  j["d"] = L.d;
  j["m"] = L.m;
  j["gamma_nonzero"] = L.gamma_nonzero;
  j["c_gamma"] = L.c_gamma;
  j["m0"] = L.m0;
  j["I"] = interval_json(L.I);
  j["r"] = L.r.str();
  j["l"] = L.l;
  j["J"] = interval_json(L.J);
  if (L.p) j["p"] = L.p->str();
  j["p_a"] = L.p_a.str();
  j["p_tilde"] = L.dual.p_tilde.str();
  j["r_tilde"] = L.dual.r_tilde.str();
  j["p_tilde_prime"] = L.dual.p_prime.str();
  j["r_tilde_prime"] = L.dual.r_prime.str();
  j["dual_in_range"] = L.dual.in_range;
  json checks = json::array();
  for (const auto& c : L.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  return j;
}

/// Whatever part of the ledger can be computed when the full one is rejected.
json partial_ledger(int d, int m, bool gnz) {
  json j{{"d", d}, {"m", m}, {"gamma_nonzero", gnz}, {"c_gamma", c_gamma(gnz)}};
  try {
    j["m0"] = compute_m0(d, gnz);
    j["I"] = interval_json(interval_I(m, d, gnz));
  } catch (const std::exception&) {
  }
  return j;
}

json report_json(const SolveReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["theta_hat"] = num(r.theta_hat);
  j["initial_x_norm"] = r.initial_x_norm;
  j["final_x_norm"] = r.final_x_norm;
  j["data_norm"] = r.data_norm;
  j["oracle_deviation"] = std::isnan(r.oracle_deviation) ? json(nullptr) : json(r.oracle_deviation);
  j["mass_drift"] = r.mass_drift;
  j["truncation_residual"] = r.truncation_residual;
  j["aliasing_residual"] = r.aliasing_residual;
  j["differences"] = r.differences;
  j["warnings"] = r.warnings;
  return j;
}

SpectralField make_data(const RunConfig& rc, std::uint64_t seed) {
  const auto& c = rc.solve;
  const auto& d = rc.data;
  SpectralField f;
  if (d.kind == "file") {
    f = read_field(d.path);
    if (!(f.grid() == c.grid)) throw GridMismatch("data file grid does not match the configured grid");
  } else if (d.kind == "random") {
    EnsembleSpec e;
    e.seed = seed;
    e.band = d.band;
    f = random_field(c.grid, e, 0);
  } else {
    f = gaussian_packet(c.grid, d.width, d.center, d.momentum, d.band);
  }
  if (d.amplitude) f = normalized(Partition(c.partition, c.grid), f, c.data_norm(), *d.amplitude);
  return f;
}

void write_series(Run& run, const std::string& name, const SolveConfig& c, const Trajectory& u) {
  const Partition part(c.partition, c.grid);
  const auto tab = tabulate(part, u, {2.0, c.pd()});
  const auto m2 = tab.mod_norm_series(0, c.qd(), c.s);
  const auto mp = tab.mod_norm_series(1, c.qd(), c.s);
  auto os = run.csv(name);
  os << "t,mass,m_2q_s,m_pq_s\n";
  for (std::size_t j = 0; j < u.size(); ++j)
    os << fmt(u.times()[j]) << "," << fmt(mass(u[j])) << "," << fmt(m2[j]) << "," << fmt(mp[j]) << "\n";
}

void write_differences(Run& run, const SolveReport& r) {
  auto os = run.csv("differences.csv");
  os << "iteration,difference,ratio\n";
  for (std::size_t i = 0; i < r.differences.size(); ++i)
    os << i + 1 << "," << fmt(r.differences[i]) << "," << (i ? fmt(r.differences[i] / r.differences[i - 1]) : "") << "\n";
}

/// Prints the hypothesis report for a solve config.
void print_gate(const SolveConfig& c) {
  const auto h = check_hypotheses(c);
  json j;
  if (h.ledger) j["ledger"] = ledger_json(*h.ledger);
  j["violations"] = h.violations;
  std::cerr << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

struct ParamsArgs {
  int d = 2;
  int m = 3;
  bool gamma_zero = false;
  std::string r, p;
};

int cmd_params(Run& run, const ParamsArgs& a) {
  run.arguments = {{"d", a.d}, {"m", a.m}, {"gamma_nonzero", !a.gamma_zero}, {"r", a.r}, {"p", a.p}};
  std::optional<Rational> r, p;
  if (!a.r.empty()) r = Rational::parse(a.r);
  if (!a.p.empty()) p = Rational::parse(a.p);
  try {
    const auto L = compute_ledger(a.d, a.m, !a.gamma_zero, r, p);
    const json j = ledger_json(L);
    run.json_out("params.json", j);
    std::cout << j.dump(2) << "\n";
    return L.all_passed() ? 0 : 1;
  } catch (const HypothesisViolation&) {
    std::cerr << partial_ledger(a.d, a.m, !a.gamma_zero).dump(2) << "\n";
    throw;
  }
}

struct NormArgs {
  std::string field;
  std::string p = "2", q = "1";
  double s = 0.0;
};

int cmd_norm(Run& run, const NormArgs& a) {
  run.arguments = {{"field", a.field}, {"p", a.p}, {"q", a.q}, {"s", a.s}};
  const RunConfig rc = config_for(run);
  const SpectralField f = read_field(a.field);
  const Partition part(rc.solve.partition, f.grid());
  const ModNormSpec spec{Rational::parse(a.p).to_double(), Rational::parse(a.q).to_double(), a.s};
  json j;
  j["spec"] = {{"p", a.p}, {"q", a.q}, {"s", a.s}, {"partition", detail::partition_json(rc.solve.partition)}, {"grid", grid_json(f.grid())}};
  j["value"] = mod_norm(part, f, spec);
  j["truncation_residual"] = truncation_residual(part, f.spectrum_copy());
  run.json_out("norm.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_evolve(Run& run) {
  const RunConfig rc = config_for(run);
  const auto& c = rc.solve;
  if (!check_hypotheses(c).ok()) std::cerr << "note: configuration is outside the theory; the oracle runs regardless\n";
  const SpectralField u0 = make_data(rc, run.seed);
  const Trajectory u = split_step_oracle(c, u0);
  write_trajectory(run.path("trajectory.bin"), u);
  write_series(run, "series.csv", c, u);
  json j;
  j["integrator"] = "split-step";
  j["substeps"] = c.oracle_substeps;
  j["data_norm"] = mod_norm(Partition(c.partition, c.grid), u0, c.data_norm());
  j["mass_drift"] = mass_drift(u, index_of_time_zero(u.times()));
  j["aliasing_residual"] = aliasing_residual(c.nonlin, u);
  run.json_out("report.json", j);
  return 0;
}

int cmd_picard(Run& run) {
  RunConfig rc = config_for(run);
  SolveConfig& c = rc.solve;
  const auto h = check_hypotheses(c);
  if (!h.ok() && !c.override_hypotheses) {
    print_gate(c);
    gate(c, 0.0);
  }
  SpectralField u0 = make_data(rc, run.seed);
  json extra;
  if (rc.delta_search.enabled) {
    const auto& ds = rc.delta_search;
    const auto found = find_delta(c, u0, ds.lo, ds.hi, ds.steps, ds.probe_iters, ds.threshold);
    auto os = run.csv("delta_search.csv");
    os << "delta,theta_hat,iterations\n";
    for (const auto& p : found.probes) os << fmt(p.delta) << "," << fmt(p.theta_hat) << "," << p.iterations << "\n";
    c.delta = found.delta;
    u0 = normalized(Partition(c.partition, c.grid), u0, c.data_norm(), 0.5 * found.delta);
    extra["delta_search"] = {{"delta", found.delta}, {"theta_hat", num(found.theta_hat)}, {"probes", found.probes.size()}};
  }
  PicardResult res;
  try {
    res = picard_solve(c, u0);
  } catch (const ContractionFailure& e) {
    json j = report_json(e.report());
    j["error"] = e.what();
    run.json_out("report.json", j);
    write_differences(run, e.report());
    throw;
  }
  if (rc.compare_oracle) {
    const auto oracle = split_step_oracle(c, u0);
    res.report.oracle_deviation = linf_l2_deviation(res.solution, oracle);
    extra["oracle_mass_drift"] = mass_drift(oracle, index_of_time_zero(oracle.times()));
  }
  write_trajectory(run.path("trajectory.bin"), res.solution);
  write_series(run, "series.csv", c, res.solution);
  write_differences(run, res.report);
  json j = report_json(res.report);
  j["delta"] = c.delta;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  run.json_out("report.json", j);
  return 0;
}

int cmd_scatter(Run& run) {
  RunConfig rc = config_for(run);
  const SolveConfig& c = rc.solve;
  const auto h = check_hypotheses(c);
  if (!h.ok() && !c.override_hypotheses) print_gate(c);
  const SpectralField u0 = make_data(rc, run.seed);
  const auto s = scattering_map(c, u0);
  write_field(run.path("u0_plus.bin"), s.u0_plus);
  write_trajectory(run.path("trajectory.bin"), s.minus.solution);
  {
    auto os = run.csv("tails.csv");
    os << "t,minus_tail,plus_tail\n";
    const auto& t = s.minus.solution.times();
    for (std::size_t j = 0; j < t.size(); ++j)
      os << fmt(t[j]) << "," << fmt(s.minus.minus_tail[j]) << "," << fmt(s.plus.plus_tail[j]) << "\n";
  }
  json j;
  j["u0_minus_norm"] = s.minus.report.data_norm;
  j["u0_plus_norm"] = s.u0_plus_norm;
  j["difference_norm"] = s.plus.difference_norm;
  j["defect_minus"] = s.plus.defect_minus;
  j["defect_plus"] = s.plus.defect_plus;
  j["quadrature_tolerance"] = s.plus.quadrature_tolerance;
  j["integrand_start_ratio"] = s.minus.integrand_start_ratio;
  j["integrand_end_ratio"] = s.plus.integrand_end_ratio;
  j["picard"] = report_json(s.minus.report);
  run.json_out("report.json", j);
  return 0;
}

struct VerifyArgs {
  std::string check = "all";
  bool probe = false;
};

json ratio_json(const RatioReport& r) {
  return {{"name", r.name},       {"used", r.used()},           {"max_ratio", num(r.max_ratio)}, {"median_ratio", r.median_ratio},
          {"flagged", r.flagged}, {"failures", r.failures},     {"passed", r.passed()}};
}

int cmd_verify(Run& run, const VerifyArgs& a) {
  run.arguments = {{"check", a.check}, {"probe", a.probe}};
  RunConfig rc = config_for(run);
  VerifySettings vs = rc.verify;
  vs.probe = a.probe;
  if (a.check != "all" && std::find(verify_check_names().begin(), verify_check_names().end(), a.check) == verify_check_names().end())
    throw Error("unknown check '" + a.check + "'");
  const auto groups = run_verify(a.check, vs);
  json summary;
  summary["check"] = a.check;
  summary["probe"] = a.probe;
  summary["seed"] = run.seed;
  summary["samples"] = vs.ensemble.count;
  bool all = true;
  json checks = json::array();
  for (const auto& g : groups) {
    json jg;
    jg["check"] = g.check;
    json reps = json::array();
    for (const auto& o : g.outcomes) {
      auto os = run.csv("ratios_" + o.base.name + ".csv");
      os << "grid,sample,lhs,rhs,ratio,excluded\n";
      auto dump = [&](const char* grid, const RatioReport& r) {
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
          const auto& s = r.samples[i];
          os << grid << "," << i << "," << fmt(s.lhs) << "," << fmt(s.rhs) << "," << fmt(s.ratio) << "," << (s.excluded ? 1 : 0)
             << "\n";
        }
      };
      dump("base", o.base);
      if (o.has_refined) dump("refined", o.refined);
      json jr;
      jr["base"] = ratio_json(o.base);
      if (o.has_refined) {
        jr["refined"] = ratio_json(o.refined);
        jr["drift"] = o.drift;
      }
      jr["passed"] = o.passed(vs.drift_limit);
      all = all && o.passed(vs.drift_limit);
      reps.push_back(jr);
    }
    jg["reports"] = reps;
    if (g.check == "strichartz-hom") jg["max_end_ratio"] = g.max_end_ratio;
    if (!g.trend.empty()) {
      auto os = run.csv("trend_" + g.check + ".csv");
      os << "band,boxes,max_ratio,median_ratio\n";
      for (const auto& t : g.trend) os << fmt(t.band) << "," << t.boxes << "," << fmt(t.max_ratio) << "," << fmt(t.median_ratio) << "\n";
    }
    checks.push_back(jg);
  }
  summary["checks"] = checks;
  summary["passed"] = all;
  run.json_out("summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order NLS in modulation spaces: parameters, norms, solves, scattering and estimate checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Run run;
  app.add_option("--config", run.config_path, "JSON configuration file");
  app.add_option("--seed", run.seed, "Seed for random data and ensembles")->capture_default_str();
  app.add_option("--out", run.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", run.threads, "Worker threads (overrides MODNLS_THREADS)")->check(CLI::PositiveNumber);

  ParamsArgs pa;
  auto* params = app.add_subcommand("params", "Exponent ledger for (d, m, gamma, r, p)");
  params->add_option("-d", pa.d, "Dimension")->required();
  params->add_option("-m", pa.m, "Power degree m (f has m+1 factors)")->required();
  auto* gz = params->add_flag("--gamma-zero", pa.gamma_zero, "No fourth-order term");
  params->add_flag("--gamma-nonzero", "Fourth-order term present (default)")->excludes(gz);
  params->add_option("-r,--r", pa.r, "Time exponent (e.g. 4, 9/2)");
  params->add_option("-p,--p", pa.p, "Space exponent");

  NormArgs na;
  auto* norm = app.add_subcommand("norm", "Modulation norm of a stored field");
  norm->add_option("--field", na.field, "Binary field file")->required()->check(CLI::ExistingFile);
  norm->add_option("--p", na.p, "Lebesgue exponent (integer, a/b or inf)")->capture_default_str();
  norm->add_option("--q", na.q, "Sequence exponent")->capture_default_str();
  norm->add_option("--s", na.s, "Regularity index")->capture_default_str();

  auto* evolve = app.add_subcommand("evolve", "Split-step integration of the configured problem");
  auto* picard = app.add_subcommand("picard", "Picard iteration of the Duhamel map");
  auto* scatter = app.add_subcommand("scatter", "Scattering map u0- -> u0+ on the configured window");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Monte Carlo checks of the linear and multilinear estimates");
  verify->add_option("--check", va.check, "strichartz-hom, strichartz-inhom, hoelder, lipschitz, embeddings or all")
      ->capture_default_str();
  verify->add_flag("--probe", va.probe, "Run with exponents that violate the hypotheses; trend data only");

  const auto start = std::chrono::steady_clock::now();
  auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    run.subcommand = "invalid";
    write_manifest(run, "error", 1, e.what(), wall());
    return 1;
  }
  if (run.threads > 0) set_thread_count(run.threads);
  run.subcommand = app.get_subcommands().front()->get_name();

  int code = 0;
  std::string status = "ok", message;
  try {
    if (params->parsed())
      code = cmd_params(run, pa);
    else if (norm->parsed())
      code = cmd_norm(run, na);
    else if (evolve->parsed())
      code = cmd_evolve(run);
    else if (picard->parsed())
      code = cmd_picard(run);
    else if (scatter->parsed())
      code = cmd_scatter(run);
    else if (verify->parsed())
      code = cmd_verify(run, va);
    if (code != 0) status = "failed";
  } catch (const HypothesisViolation& e) {
    code = 2;
    status = "hypothesis-violation";
    message = e.what();
  } catch (const NumericalFailure& e) {
    code = 1;
    status = "numerical-failure";
    message = e.what();
  } catch (const std::exception& e) {
    code = 1;
    status = "error";
    message = e.what();
  }
  if (!message.empty()) std::cerr << "modnls " << run.subcommand << ": " << message << "\n";
  write_manifest(run, status, code, message, wall());
  return code;
}

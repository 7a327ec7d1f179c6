// icp: command-line front end.
//
// Exit codes: 0 ok, 1 invalid config or arguments, 2 invariant violation,
// 3 unresolved result or exhausted budget.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "icp/config.hpp"
#include "icp/coupling.hpp"
#include "icp/experiments.hpp"
#include "icp/front_chain.hpp"
#include "icp/report.hpp"
#include "icp/rng.hpp"
#include "icp/simulator.hpp"

namespace {

using namespace icp;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum Exit { kOk = 0, kInvalid = 1, kViolation = 2, kUnresolved = 3 };

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  bool format_set = false;
};

// Flags shared by the model-level subcommands; unset ones fall back to the
// config file, then to ExperimentConfig defaults.
struct ModelFlags {
  std::string profile;
  std::optional<double> lambda;
  std::optional<Site> start;
  std::optional<double> tmax;
  std::optional<Site> rmax;
  bool no_rmax = false;
  std::optional<std::uint64_t> runs;

  void add(CLI::App* app, bool with_runs) {
    app->add_option("--profile", profile, "profile as inline JSON or a path to a JSON file");
    app->add_option("--lambda", lambda, "birth-rate multiplier");
    app->add_option("--start", start, "initial site");
    app->add_option("--tmax", tmax, "time horizon");
    app->add_option("--rmax", rmax, "right escape cutoff (default 2*tmax)");
    app->add_flag("--no-rmax", no_rmax, "disable the right cutoff");
    if (with_runs) app->add_option("--runs", runs, "number of replicas");
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  const std::string text = first != std::string::npos && arg[first] == '{' ? arg : read_file(arg);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed profile JSON: ") + e.what());
  }
}

ExperimentConfig resolve(const Globals& g, const ModelFlags& f) {
  nlohmann::json doc = g.config.empty() ? nlohmann::json::object() : nlohmann::json::parse(read_file(g.config),
                                                                                            nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("malformed config file " + g.config);
  if (!f.profile.empty()) doc["profile"] = parse_json_arg(f.profile);
  if (!doc.contains("profile")) throw ConfigError("no profile given (use --profile or --config)");
  if (f.lambda) doc["lambda"] = *f.lambda;
  if (f.start) doc["start"] = *f.start;
  if (f.tmax) {
    doc["tmax"] = *f.tmax;
    if (!f.rmax && !f.no_rmax && !doc.contains("rmax")) doc.erase("rmax");
  }
  if (f.rmax) doc["rmax"] = *f.rmax;
  if (f.no_rmax) doc["rmax"] = nullptr;
  if (f.runs) doc["runs"] = *f.runs;
  return config_from_json(doc);
}

ModelParams model_params(const ExperimentConfig& c) {
  if (!c.lambda) throw ConfigError("lambda is required (use --lambda or \"lambda\" in the config)");
  return {*c.lambda, c.profile, c.start};
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text_file(g.out, text);
  }
}

void require_format(const Globals& g, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (g.format == f) return;
  }
  throw ConfigError("--format " + g.format + " is not supported by this command");
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += '\n';
  }
  return s;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json run_json(const RunResult& r) {
  Json j;
  j["outcome"] = to_string(r.outcome);
  j["extinction_time"] = r.extinction_time ? Json(*r.extinction_time) : Json(nullptr);
  j["end_time"] = r.end_time;
  j["max_right"] = r.max_right;
  j["events"] = r.events;
  j["seed"] = r.seed;
  return j;
}

int cmd_simulate(const Globals& g, const ModelFlags& f, const std::string& trace_path) {
  require_format(g, {"json", "csv"});
  const auto c = resolve(g, f);
  const auto params = model_params(c);
  RunResult r;
  if (trace_path.empty()) {
    r = simulate_run(params, c.stop_rule(), g.seed);
  } else {
    std::ofstream trace(trace_path, std::ios::binary);
    if (!trace) throw ReportError("cannot write " + trace_path);
    trace << "time,event,site\n";
    r = simulate_trace(params, c.stop_rule(), g.seed, [&](const TraceEvent& e) {
      trace << num(e.time) << ',' << to_string(e.kind) << ',' << e.site << '\n';
    });
    if (!trace.flush()) throw ReportError("cannot write " + trace_path);
  }
  if (g.format == "csv") {
    emit(g, csv_table({"outcome", "extinction_time", "end_time", "max_right", "events", "seed"},
                      {{std::string(to_string(r.outcome)), r.extinction_time ? num(*r.extinction_time) : "",
                        num(r.end_time), std::to_string(r.max_right), std::to_string(r.events),
                        std::to_string(r.seed)}}));
  } else {
    emit(g, run_json(r).dump(2) + "\n");
  }
  return kOk;
}

struct FrontFlags {
  std::optional<double> birth, death;
  Site truncation = 64;
  Site terms = kSeriesTerms;
};

int cmd_front_chain(const Globals& g, ModelFlags f, const FrontFlags& ff) {
  require_format(g, {"json"});
  const bool constant = ff.birth || ff.death;
  if (constant && !(ff.birth && ff.death)) throw ConfigError("--birth and --death go together");
  if (constant && f.profile.empty() && g.config.empty()) f.profile = R"({"kind": "one_sided"})";
  auto c = resolve(g, f);
  const FrontChain chain = constant ? FrontChain::constant(*ff.birth, *ff.death)
                                    : FrontChain::from_params(model_params(c));
  if (ff.truncation <= c.start + 1) throw ConfigError("--truncation must exceed start + 1");
  const auto series = series_test(chain, ff.terms);
  const auto br = absorption_probability(chain, c.start, ff.truncation);

  // Monte Carlo absorption frequency; reaching the cutoff counts as escape.
  const StopRule stop = c.stop_rule();
  std::uint64_t absorbed = 0;
  for (std::uint64_t k = 0; k < c.runs; ++k) {
    absorbed += simulate_front(chain, c.start, stop, derive_seed(g.seed, k)).outcome == Outcome::Extinct;
  }
  const auto ci = wilson_interval(absorbed, c.runs, c.ci_level);

  Json j;
  j["series_test"] = {{"verdict", to_string(series.verdict)},
                      {"tail_ratio", series.tail_ratio},
                      {"tail_ratio_min", series.tail_ratio_min},
                      {"tail_ratio_max", series.tail_ratio_max},
                      {"log_partial_sum", series.log_partial_sum},
                      {"by_partial_sums", series.by_partial_sums}};
  j["bracket"] = {{"lower", br.lower}, {"upper", br.upper}, {"truncation", br.truncation}};
  j["mc_frequency"] = double(absorbed) / double(c.runs);
  j["wilson_ci"] = {ci.lo, ci.hi};
  j["runs"] = c.runs;
  emit(g, j.dump(2) + "\n");
  return kOk;
}

int cmd_couple(const Globals& g, const ModelFlags& f) {
  require_format(g, {"json", "csv"});
  const auto c = resolve(g, f);
  const auto params = model_params(c);
  std::uint64_t violations = 0, eta = 0, xi = 0;
  for (std::uint64_t k = 0; k < c.runs; ++k) {
    const auto r = coupled_run(params, c.stop_rule(), derive_seed(g.seed, k));
    violations += r.violations;
    eta += r.eta.survived();
    xi += r.xi.survived();
  }
  const double pe = double(eta) / double(c.runs), px = double(xi) / double(c.runs);
  if (g.format == "csv") {
    emit(g, csv_table({"runs", "violations", "eta_survival", "xi_survival"},
                      {{std::to_string(c.runs), std::to_string(violations), num(pe), num(px)}}));
  } else {
    Json j;
    j["runs"] = c.runs;
    j["violations"] = violations;
    j["eta_survival"] = pe;
    j["xi_survival"] = px;
    emit(g, j.dump(2) + "\n");
  }
  if (violations > 0 || eta > xi) {
    std::cerr << "icp: domination violated\n";
    return kViolation;
  }
  return kOk;
}

int cmd_sweep(const Globals& g, const ModelFlags& f, std::vector<double> grid, bool shared) {
  const std::string format = g.format_set ? g.format : "csv";
  auto c = resolve(g, f);
  if (!grid.empty()) {
    nlohmann::json doc = config_to_json(c);
    doc["lambda_grid"] = grid;
    c = config_from_json(doc);
  }
  if (c.lambda_grid.empty()) throw ConfigError("lambda grid is empty (use --grid or \"lambda_grid\")");
  const auto res = sweep(c.profile, c.start, c.lambda_grid, c.stop_rule(), c.runs, g.seed, shared, c.ci_level,
                         shared);
  ReportFormats formats{format == "csv", format == "json", format == "svg"};
  if (!formats.csv && !formats.json && !formats.svg) throw ConfigError("unknown --format " + format);
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  for (const auto& p : emit_report(res.estimates, formats, dir, "survival")) std::cerr << "wrote " << p.string() << "\n";
  if (shared && (res.monotonicity_exceptions > 0 || res.containment_violations > 0)) {
    std::cerr << "icp: monotonicity exceptions " << res.monotonicity_exceptions << ", containment violations "
              << res.containment_violations << "\n";
    return kViolation;
  }
  return kOk;
}

int cmd_critical(const Globals& g, const ModelFlags& f, CriticalSearchOptions opt) {
  require_format(g, {"json", "csv"});
  const auto c = resolve(g, f);
  opt.runs_per_probe = c.runs;
  opt.p_floor = c.p_floor;
  opt.ci_level = c.ci_level;
  const auto br = estimate_lambda_c(c.profile, c.start, c.stop_rule(), opt, g.seed);
  if (g.format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : br.probes) {
      rows.push_back({num(p.estimate.lambda), std::to_string(p.estimate.runs), std::to_string(p.estimate.alive),
                      num(p.estimate.wilson_lo), num(p.estimate.wilson_hi), num(p.estimate.horizon),
                      std::string(to_string(p.decision))});
    }
    emit(g, csv_table({"lambda", "runs", "alive", "wilson_lo", "wilson_hi", "horizon", "decision"}, rows));
  } else {
    Json j;
    j["lo"] = br.lo;
    j["hi"] = br.hi;
    j["status"] = to_string(br.status);
    j["probes"] = Json::array();
    for (const auto& p : br.probes) {
      j["probes"].push_back({{"lambda", p.estimate.lambda},
                             {"runs", p.estimate.runs},
                             {"alive", p.estimate.alive},
                             {"wilson_lo", p.estimate.wilson_lo},
                             {"wilson_hi", p.estimate.wilson_hi},
                             {"horizon", p.estimate.horizon},
                             {"decision", to_string(p.decision)}});
    }
    emit(g, j.dump(2) + "\n");
  }
  return br.resolved() ? kOk : kUnresolved;
}

int cmd_classify(const Globals& g, const ModelFlags& f, double lc_lo, double lc_hi) {
  require_format(g, {"json"});
  if (!(0 < lc_lo && lc_lo <= lc_hi)) throw ConfigError("need 0 < --lambda-c-lo <= --lambda-c-hi");
  const auto c = resolve(g, f);
  const auto params = model_params(c);
  const auto v = regime_verdict(params.profile, params.lambda, {lc_lo, lc_hi});
  Json j;
  j["regime"] = to_string(v.regime);
  if (!v.ell) {
    j["ell"] = nullptr;
  } else if (std::isinf(*v.ell)) {
    j["ell"] = "inf";
  } else {
    j["ell"] = *v.ell;
  }
  if (v.regime == Regime::PhaseTransition) j["window"] = {v.window_lo, v.window_hi};
  j["below_window"] = v.below_window;
  j["above_window"] = v.above_window;
  j["inside_window"] = v.inside_window;
  j["series_test"] = to_string(v.series);
  j["coherent"] = v.coherent;
  emit(g, j.dump(2) + "\n");
  if (!v.coherent) return kViolation;
  return v.regime == Regime::Unclassifiable ? kUnresolved : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inhomogeneous contact process on the half-line"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output file (sweep: output directory)");
  auto* fmt = app.add_option("--format", g.format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));

  ModelFlags sim_f, front_f, couple_f, sweep_f, crit_f, class_f;

  auto* sim = app.add_subcommand("simulate", "one trajectory of the contact process");
  sim_f.add(sim, false);
  sim->add_option("--seed", g.seed, "seed");
  std::string trace_path;
  sim->add_option("--trace", trace_path, "write events as CSV (time,event,site)");

  auto* front = app.add_subcommand("front-chain", "series test, absorption bracket and MC check of the front chain");
  front_f.add(front, true);
  FrontFlags ff;
  front->add_option("--birth", ff.birth, "constant birth rate (instead of a profile)");
  front->add_option("--death", ff.death, "constant death rate (instead of a profile)");
  front->add_option("--truncation", ff.truncation, "truncation site of the bracket");
  front->add_option("--terms", ff.terms, "series terms inspected");

  auto* couple = app.add_subcommand("couple", "coupled runs of eta and the front process");
  couple_f.add(couple, true);

  auto* sw = app.add_subcommand("sweep", "survival estimates over a lambda grid");
  sweep_f.add(sw, true);
  std::vector<double> grid;
  bool shared = false;
  sw->add_option("--grid", grid, "lambda values, strictly increasing");
  sw->add_flag("--shared", shared, "run the grid on shared randomness");

  auto* crit = app.add_subcommand("critical", "bracket the critical lambda by bisection");
  crit_f.add(crit, true);
  CriticalSearchOptions opt;
  crit->add_option("--tol", opt.tol, "target bracket width");
  crit->add_option("--lo", opt.lambda_lo, "initial dying guess");
  crit->add_option("--hi", opt.lambda_hi, "initial surviving guess");
  crit->add_option("--max-runs", opt.max_runs, "run budget per probe");
  crit->add_option("--max-horizon", opt.max_horizon, "horizon budget per probe");
  crit->add_option("--max-probes", opt.max_probes, "probe budget");

  auto* cls = app.add_subcommand("classify", "regime of (profile, lambda) given the one-sided critical value");
  class_f.add(cls, false);
  double lc_lo = 3.1, lc_hi = 3.4;
  cls->add_option("--lambda-c-lo", lc_lo, "lower end of the one-sided critical value");
  cls->add_option("--lambda-c-hi", lc_hi, "upper end of the one-sided critical value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }
  g.format_set = fmt->count() > 0;

  try {
    if (*sim) return cmd_simulate(g, sim_f, trace_path);
    if (*front) return cmd_front_chain(g, front_f, ff);
    if (*couple) return cmd_couple(g, couple_f);
    if (*sw) return cmd_sweep(g, sweep_f, grid, shared);
    if (*crit) return cmd_critical(g, crit_f, opt);
    if (*cls) return cmd_classify(g, class_f, lc_lo, lc_hi);
  } catch (const ConfigError& e) {
    std::cerr << "icp: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "icp: " << e.what() << "\n";
    return kInvalid;
  } catch (const ReportError& e) {
    std::cerr << "icp: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}

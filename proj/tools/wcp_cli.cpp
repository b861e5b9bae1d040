// wcp: experiment runner for weighted contact processes on regular trees.
//
//   wcp run CONFIG.json [--threads K] [--output-dir DIR]
//   wcp version

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wcp/io.hpp"
#include "wcp/wcp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace wcp;

enum Exit { kOk = 0, kCheckFailed = 1, kValidation = 2, kCapacity = 3, kInconclusive = 4 };

constexpr const char* kEnvOutputDir = "WCP_OUTPUT_DIR";

// Keys shared by every command, with defaults. null means "no default".
const json& common_defaults() {
  static const json d = {
      {"seed", 0},       {"n", 2},          {"dist", {{"kind", "constant"}, {"value", 1.0}}},
      {"horizon", 10.0}, {"depth", 20},     {"boundary", "absorbing"},
      {"mode", "annealed"}, {"field_seed", nullptr}, {"max_active", 1000000},
      {"max_vertices", 10000000}, {"output_dir", nullptr},
  };
  return d;
}

const std::map<std::string, json>& command_defaults() {
  static const std::map<std::string, json> d = {
      {"simulate", {{"lambda", nullptr}, {"init", "root_only"}, {"record_series", true}, {"log_events", false}}},
      {"sir", {{"lambda", nullptr}, {"replicates", 1000}}},
      {"bounds", {{"lambda", nullptr}, {"tol", 1e-12}}},
      {"gw", {{"p", nullptr}}},
      {"rwalk-check", {{"n_values", {1, 2, 3, 4, 10}}, {"max_steps", 60}, {"x_grid", nullptr}}},
      {"duality-check", {{"lambda", nullptr}, {"t", nullptr}, {"replicates", 100000}}},
      {"survival", {{"lambda_grid", nullptr}, {"replicates", 1000}, {"crn", false}}},
      {"critical", {{"tol", 0.01}, {"theta", 0.02}, {"replicates", 2000}}},
      {"decay", {{"lambda", nullptr}, {"t_grid", nullptr}, {"replicates", 10000}}},
      {"alpha-scan", {{"alpha_grid", nullptr}, {"lambda_grid", nullptr}, {"replicates", 1000}}},
  };
  return d;
}

// Keys each command actually reads; the rest of the common block is rejected
// so a stray field never looks meaningful.
const std::map<std::string, std::set<std::string>>& command_common_keys() {
  static const std::set<std::string> sim = {"seed",       "n",          "dist",         "horizon",
                                            "depth",      "boundary",   "mode",         "field_seed",
                                            "max_active", "max_vertices", "output_dir"};
  static const std::map<std::string, std::set<std::string>> d = {
      {"simulate", sim},
      {"sir", {"seed", "n", "dist", "depth", "boundary", "mode", "field_seed", "max_active", "max_vertices",
               "output_dir"}},
      {"bounds", {"n", "dist", "output_dir"}},
      {"gw", {"n", "output_dir"}},
      {"rwalk-check", {"output_dir"}},
      {"duality-check", {"seed", "n", "dist", "depth", "field_seed", "max_active", "max_vertices", "output_dir"}},
      {"survival", sim},
      {"critical", sim},
      {"decay", {"seed", "n", "dist", "depth", "mode", "field_seed", "max_active", "max_vertices", "output_dir"}},
      {"alpha-scan", {"seed", "n", "horizon", "depth", "boundary", "mode", "field_seed", "max_active",
                      "max_vertices", "output_dir"}},
  };
  return d;
}

json resolve(const json& raw, const std::optional<std::string>& cli_output_dir) {
  require(raw.is_object(), "config must be a JSON object");
  require(raw.contains("command") && raw.at("command").is_string(), "config needs a string 'command'");
  const std::string cmd = raw.at("command").get<std::string>();
  const auto it = command_defaults().find(cmd);
  require(it != command_defaults().end(), "unknown command '" + cmd + "'");
  const auto& common_keys = command_common_keys().at(cmd);

  json out = {{"command", cmd}};
  for (const auto& key : common_keys) out[key] = common_defaults().at(key);
  for (const auto& [k, v] : it->second.items()) out[k] = v;
  if (cmd == "alpha-scan") out["n"] = 1;

  for (const auto& [k, v] : raw.items()) {
    if (k == "command") continue;
    if (k == "toolkit_version") {  // manifests carry it; accept them as configs
      require(v == kVersion, "manifest was written by toolkit version " + v.dump());
      continue;
    }
    require(out.contains(k), "unknown key '" + k + "' for command '" + cmd + "'");
    out[k] = v;
  }
  if (out.contains("output_dir")) {
    if (cli_output_dir) {
      out["output_dir"] = *cli_output_dir;
    } else if (out["output_dir"].is_null()) {
      const char* env = std::getenv(kEnvOutputDir);
      out["output_dir"] = env && *env ? env : "wcp-out";
    }
  }
  if (out.contains("field_seed") && out["field_seed"].is_null()) out["field_seed"] = out["seed"];
  static const std::set<std::string> optional_keys = {"bounds/lambda", "rwalk-check/x_grid"};
  for (const auto& [k, v] : out.items())
    require(!v.is_null() || optional_keys.count(cmd + "/" + k), "missing required key '" + k + "' for '" + cmd + "'");
  return out;
}

// --- typed accessors --------------------------------------------------------

double num(const json& c, const char* k) {
  require(c.at(k).is_number(), std::string("'") + k + "' must be a number");
  return c.at(k).get<double>();
}

std::int64_t integer(const json& c, const char* k, std::int64_t lo, std::int64_t hi) {
  const auto& v = c.at(k);
  require(v.is_number_integer() || v.is_number_unsigned(), std::string("'") + k + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  require(x >= lo && x <= hi, std::string("'") + k + "' out of range");
  return x;
}

std::uint64_t seed_of(const json& c, const char* k) {
  const auto& v = c.at(k);
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0),
          std::string("'") + k + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool flag(const json& c, const char* k) {
  require(c.at(k).is_boolean(), std::string("'") + k + "' must be true or false");
  return c.at(k).get<bool>();
}

std::string choice(const json& c, const char* k, const std::set<std::string>& allowed) {
  require(c.at(k).is_string() && allowed.count(c.at(k).get<std::string>()),
          std::string("'") + k + "' has an unsupported value");
  return c.at(k).get<std::string>();
}

std::vector<double> numbers(const json& c, const char* k) {
  require(c.at(k).is_array() && !c.at(k).empty(), std::string("'") + k + "' must be a nonempty array");
  std::vector<double> v;
  for (const auto& x : c.at(k)) {
    require(x.is_number(), std::string("'") + k + "' entries must be numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

SimulationConfig sim_config(const json& c) {
  SimulationConfig s;
  if (c.contains("n")) s.n = static_cast<int>(integer(c, "n", 1, 65535));
  if (c.contains("dist")) s.dist = distribution_from_json(c.at("dist"));
  if (c.contains("horizon")) s.horizon = num(c, "horizon");
  if (c.contains("depth")) s.depth = static_cast<int>(integer(c, "depth", 0, 65534));
  if (c.contains("boundary"))
    s.boundary = choice(c, "boundary", {"absorbing", "escape"}) == "escape" ? Boundary::escape : Boundary::absorbing;
  if (c.contains("mode"))
    s.mode = choice(c, "mode", {"annealed", "quenched"}) == "quenched" ? Mode::quenched : Mode::annealed;
  if (c.contains("field_seed")) s.master_seed = seed_of(c, "field_seed");
  if (c.contains("max_active")) s.max_active = static_cast<std::size_t>(integer(c, "max_active", 1, INT64_MAX));
  if (c.contains("max_vertices"))
    s.max_vertices = static_cast<std::size_t>(integer(c, "max_vertices", 1, INT64_MAX));
  if (c.contains("lambda") && c.at("lambda").is_number()) s.lambda = num(c, "lambda");
  s.validate();
  return s;
}

std::size_t replicates(const json& c) { return static_cast<std::size_t>(integer(c, "replicates", 1, INT64_MAX)); }

// --- output ------------------------------------------------------------------

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void prepare() { fs::create_directories(dir_); }

  void json_file(const std::string& name, const json& j) const {
    std::ofstream f(dir_ / name);
    require(static_cast<bool>(f), "cannot write " + (dir_ / name).string());
    f << j.dump(2) << '\n';
  }

  std::ofstream csv(const std::string& name, const std::string& header) const {
    std::ofstream f(dir_ / name);
    require(static_cast<bool>(f), "cannot write " + (dir_ / name).string());
    f << header << '\n';
    return f;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

std::string fd(double v) { return format_double(v); }

void write_point(std::ostream& os, const SurvivalPoint& p) {
  os << fd(p.lambda) << ',' << to_string(p.boundary) << ',' << fd(p.p_hat) << ',' << fd(p.se) << ',' << p.reps << ','
     << p.escapes << ',' << p.capacity_errors << '\n';
}

constexpr const char* kCurveHeader = "lambda,mode,p_hat,se,reps,escapes,capacity_errors";

// --- commands ----------------------------------------------------------------

int cmd_simulate(const json& c, const Output& out, unsigned) {
  SimulationConfig s = sim_config(c);
  const auto init = choice(c, "init", {"root_only", "all_infected"}) == "all_infected" ? Init::all_infected
                                                                                        : Init::root_only;
  const bool series = flag(c, "record_series"), log_events = flag(c, "log_events");
  const std::uint64_t seed = seed_of(c, "seed");
  const WeightField field = s.mode == Mode::quenched ? WeightField(s.master_seed, s.dist, s.n)
                                                     : replicate_field(s, seed, 0, 0);
  Stream stream(make_key(seed, {stream_tag::kRun, 0, 0}));
  std::vector<EventLogEntry> log;
  EventEngine<ContactRule> engine;
  RunOptions opt;
  opt.init = init;
  opt.record_series = series;
  opt.log = log_events ? &log : nullptr;
  const auto o = engine.run(s, field, stream, opt);

  out.json_file("result.json", {{"status", to_string(o.status)},
                                {"time", o.time},
                                {"max_infected", o.max_infected},
                                {"event_count", o.event_count},
                                {"ever_infected", o.ever_infected},
                                {"deepest", o.deepest},
                                {"root_infected", o.root_infected}});
  if (series) {
    auto f = out.csv("infected_series.csv", "time,infected");
    for (const auto& [t, k] : o.infected_count_series) f << fd(t) << ',' << k << '\n';
  }
  if (log_events) {
    std::ofstream f(out.dir() / "events.csv");
    write_event_log(f, log);
  }
  return o.status == Status::capacity_exceeded ? kCapacity : kOk;
}

int cmd_sir(const json& c, const Output& out, unsigned threads) {
  SimulationConfig s = sim_config(c);
  const std::size_t reps = replicates(c);
  const std::uint64_t seed = seed_of(c, "seed");
  std::vector<SirRecord> recs(reps);
  std::vector<EventEngine<SirRule>> engines(std::max(1u, threads));
  parallel_for(reps, threads, [&](std::size_t i, unsigned w) {
    const WeightField field = replicate_field(s, seed, 0, i);
    Stream stream(make_key(seed, {stream_tag::kRun, 0, i}));
    recs[i] = simulate_sir(s, field, stream, &engines[w]);
  });
  auto f = out.csv("sir_progeny.csv", "replicate,progeny,reached_depth,status");
  double total = 0.0;
  std::size_t reached = 0, capped = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    f << i << ',' << recs[i].progeny_count << ',' << recs[i].reached_depth << ',' << to_string(recs[i].status) << '\n';
    total += static_cast<double>(recs[i].progeny_count);
    reached += recs[i].reached_depth >= s.depth;
    capped += recs[i].status == Status::capacity_exceeded;
  }
  const double success = expected_infection_ratio(s.dist, s.lambda);
  const double p_reach = static_cast<double>(reached) / static_cast<double>(reps);
  out.json_file("sir.json", {{"replicates", reps},
                             {"mean_progeny", total / static_cast<double>(reps)},
                             {"p_reached_depth", p_reach},
                             {"se_reached_depth", binomial_se(p_reach, reps)},
                             {"capacity_errors", capped},
                             {"child_success_probability", success},
                             {"mean_offspring", s.n * success}});
  return kOk;
}

int cmd_bounds(const json& c, const Output& out, unsigned) {
  const int n = static_cast<int>(integer(c, "n", 1, 1 << 30));
  const auto dist = distribution_from_json(c.at("dist"));
  std::optional<double> lambda;
  if (!c.at("lambda").is_null()) lambda = num(c, "lambda");
  const double tol = num(c, "tol");
  require(tol > 0.0, "'tol' must be > 0");
  const auto r = bounds_report(dist, n, lambda, tol);
  json j = {{"n", n},
            {"dist", distribution_to_json(dist)},
            {"lambda_c_upper", json_number(r.lambda_c_upper)},
            {"lambda_e_lower", json_number(r.lambda_e_lower)},
            {"limit_bracket", {json_number(r.bracket.lo), json_number(r.bracket.hi)}},
            {"limit_target", json_number(r.limit_target)},
            {"open_cluster_extinction", r.open_cluster_extinction}};
  if (lambda) {
    j["lambda"] = *lambda;
    j["envelope_slope"] = *r.envelope_slope;
    j["sir_child_success"] = *r.sir_child_success;
    j["sir_mean_offspring"] = *r.sir_mean_offspring;
  }
  out.json_file("bounds.json", j);
  return kOk;
}

int cmd_gw(const json& c, const Output& out, unsigned) {
  const BranchingModel m(static_cast<int>(integer(c, "n", 1, 1 << 20)), num(c, "p"));
  out.json_file("gw.json", {{"n", m.n}, {"p", m.child_success}, {"mean_offspring", m.mean_offspring()},
                            {"extinction", extinction_probability(m)}});
  return kOk;
}

int cmd_rwalk(const json& c, const Output& out, unsigned) {
  std::vector<int> ns;
  for (double v : numbers(c, "n_values")) {
    require(v >= 1 && v == std::floor(v), "'n_values' entries must be positive integers");
    ns.push_back(static_cast<int>(v));
  }
  const int max_steps = static_cast<int>(integer(c, "max_steps", 0, 100000));
  std::vector<double> xs;
  if (c.at("x_grid").is_array()) {
    xs = numbers(c, "x_grid");
  } else {
    for (int i = 1; i <= 20; ++i) xs.push_back(0.05 * i);
  }
  for (double x : xs) check_walk_args(1, 0, x);
  auto f = out.csv("rwalk.csv", "N,n,x,functional,bound,slack");
  double worst = -kInfinity;
  for (int n : ns)
    for (int s = 0; s <= max_steps; ++s)
      for (double x : xs) {
        const double a = depth_functional(n, s, x), b = lemma41_bound(n, s, x);
        worst = std::max(worst, a - b);
        f << n << ',' << s << ',' << fd(x) << ',' << fd(a) << ',' << fd(b) << ',' << fd(b - a) << '\n';
      }
  const bool holds = worst <= 1e-12;
  out.json_file("rwalk.json", {{"holds", holds}, {"max_excess", worst}});
  return holds ? kOk : kCheckFailed;
}

int cmd_duality(const json& c, const Output& out, unsigned threads) {
  SimulationConfig s = sim_config(c);
  const double t = num(c, "t");
  require(std::isfinite(t) && t >= 0.0, "'t' must be finite and >= 0");
  const WeightField field(s.master_seed, s.dist, s.n);
  const auto r = duality_check(s, field, t, replicates(c), seed_of(c, "seed"), threads);
  out.json_file("duality.json", {{"p_forward", r.p_forward}, {"p_dual", r.p_dual}, {"pooled_se", r.pooled_se},
                                 {"z_score", r.z_score}, {"replicates", r.reps}, {"agrees_3se", r.z_score <= 3.0}});
  return kOk;
}

int cmd_survival(const json& c, const Output& out, unsigned threads) {
  const SimulationConfig s = sim_config(c);
  const auto curve = survival_curve(s, numbers(c, "lambda_grid"), replicates(c), flag(c, "crn"),
                                    seed_of(c, "seed"), threads);
  auto f = out.csv("survival_curve.csv", kCurveHeader);
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    write_point(f, curve.absorbing[i]);
    write_point(f, curve.escape[i]);
  }
  if (curve.crn)
    out.json_file("survival.json", {{"crn", true}, {"containment_violations", curve.containment_violations}});
  return kOk;
}

int cmd_critical(const json& c, const Output& out, unsigned threads) {
  const SimulationConfig s = sim_config(c);
  const auto est =
      estimate_lambda_c(s, num(c, "tol"), replicates(c), num(c, "theta"), seed_of(c, "seed"), threads);
  auto f = out.csv("critical.csv",
                   "probe,lambda,class,escape_p_hat,escape_se,absorbing_p_hat,absorbing_se,reps,capacity_errors");
  for (std::size_t i = 0; i < est.probes.size(); ++i) {
    const auto& p = est.probes[i];
    f << i << ',' << fd(p.lambda) << ',' << to_string(p.cls) << ',' << fd(p.escape.p_hat) << ',' << fd(p.escape.se)
      << ',';
    if (p.absorbing.reps) f << fd(p.absorbing.p_hat) << ',' << fd(p.absorbing.se);
    else f << ',';
    f << ',' << p.escape.reps << ',' << p.escape.capacity_errors + p.absorbing.capacity_errors << '\n';
  }
  json j = {{"verdict", to_string(est.verdict)},
            {"certified", est.certified},
            {"reason", est.reason},
            {"mode", to_string(est.mode)},
            {"horizon", est.horizon},
            {"depth", est.depth},
            {"theta", est.theta},
            {"replicates_per_probe", est.reps}};
  if (est.verdict != Verdict::infinite) {
    j["interval"] = {json_number(est.interval.lo), json_number(est.interval.hi)};
    j["analytic_bracket"] = {json_number(est.analytic.lo), json_number(est.analytic.hi)};
  }
  if (est.mode == Mode::quenched) j["field_seed"] = s.master_seed;
  out.json_file("critical.json", j);
  return est.verdict == Verdict::inconclusive ? kInconclusive : kOk;
}

int cmd_decay(const json& c, const Output& out, unsigned threads) {
  const SimulationConfig s = sim_config(c);
  const double lambda = num(c, "lambda");
  const auto r = estimate_decay_rate(s, lambda, numbers(c, "t_grid"), replicates(c), seed_of(c, "seed"), threads);
  auto f = out.csv("decay.csv", "t,p_hat,se,used");
  for (const auto& p : r.points) f << fd(p.t) << ',' << fd(p.p_hat) << ',' << fd(p.se) << ',' << p.used << '\n';
  json j = {{"sufficient", r.sufficient},
            {"lambda", lambda},
            {"slope", json_number(r.slope)},
            {"slope_se", json_number(r.slope_se)},
            {"intercept", json_number(r.intercept)},
            {"envelope_slope", json_number(r.envelope_slope)}};
  if (r.above_lower_bound) j["warning"] = "lambda is at or above lambda_e_lower; exponential decay is not guaranteed";
  if (!r.sufficient) j["status"] = "insufficient-signal";
  out.json_file("decay.json", j);
  return r.sufficient ? kOk : kInconclusive;
}

int cmd_alpha_scan(const json& c, const Output& out, unsigned threads) {
  const SimulationConfig base = sim_config(c);
  const auto alphas = numbers(c, "alpha_grid");
  const auto lambdas = numbers(c, "lambda_grid");
  const std::uint64_t seed = seed_of(c, "seed");
  auto f = out.csv("alpha_scan.csv", std::string("alpha,") + kCurveHeader);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    SimulationConfig s = base;
    s.dist = WeightDistribution::power_law(alphas[a]);
    const auto curve = survival_curve(s, lambdas, replicates(c), false, make_key(seed, {a}).hi, threads);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      f << fd(alphas[a]) << ',';
      write_point(f, curve.absorbing[i]);
      f << fd(alphas[a]) << ',';
      write_point(f, curve.escape[i]);
    }
  }
  return kOk;
}

using Handler = int (*)(const json&, const Output&, unsigned);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"simulate", cmd_simulate}, {"sir", cmd_sir},           {"bounds", cmd_bounds},
      {"gw", cmd_gw},             {"rwalk-check", cmd_rwalk}, {"duality-check", cmd_duality},
      {"survival", cmd_survival}, {"critical", cmd_critical}, {"decay", cmd_decay},
      {"alpha-scan", cmd_alpha_scan},
  };
  return h;
}

// Runs every validation a command performs, without simulating.
void dry_validate(const json& c) {
  const std::string cmd = c.at("command");
  if (c.contains("seed")) seed_of(c, "seed");
  if (cmd != "bounds" && cmd != "gw" && cmd != "rwalk-check") sim_config(c);
  if (c.contains("dist")) distribution_from_json(c.at("dist"));
  if (c.contains("replicates")) replicates(c);
  if (c.contains("lambda") && !c.at("lambda").is_null()) {
    const double l = num(c, "lambda");
    require(std::isfinite(l) && l >= 0.0, "'lambda' must be finite and >= 0");
  }
  if (c.contains("lambda_grid")) {
    const auto g = numbers(c, "lambda_grid");
    require(std::is_sorted(g.begin(), g.end()), "'lambda_grid' must be ascending");
    for (double l : g) require(std::isfinite(l) && l >= 0.0, "'lambda_grid' values must be finite and >= 0");
  }
  if (c.contains("t_grid")) {
    const auto g = numbers(c, "t_grid");
    require(std::is_sorted(g.begin(), g.end()) && g.front() > 0.0, "'t_grid' must be ascending and positive");
  }
  if (c.contains("alpha_grid"))
    for (double a : numbers(c, "alpha_grid")) WeightDistribution::power_law(a);
  if (c.contains("crn")) flag(c, "crn");
  if (c.contains("init")) choice(c, "init", {"root_only", "all_infected"});
  if (c.contains("record_series")) flag(c, "record_series");
  if (c.contains("log_events")) flag(c, "log_events");
  if (c.contains("theta")) {
    const double th = num(c, "theta");
    require(th > 0.0 && th < 1.0, "'theta' must lie in (0,1)");
  }
  if (c.contains("tol")) require(num(c, "tol") > 0.0, "'tol' must be > 0");
  if (c.contains("p")) BranchingModel(1, num(c, "p"));
  if (c.contains("t")) require(num(c, "t") >= 0.0, "'t' must be >= 0");
  if (c.contains("x_grid") && c.at("x_grid").is_array())
    for (double x : numbers(c, "x_grid")) check_walk_args(1, 0, x);
  if (c.contains("n_values")) numbers(c, "n_values");
  if (c.contains("max_steps")) integer(c, "max_steps", 0, 100000);
}

void write_diagnostics(const fs::path& dir, const char* kind, const std::string& message, int code) {
  const json j = {{"error", kind}, {"message", message}, {"exit_code", code}, {"toolkit_version", kVersion}};
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream f(dir / "diagnostics.json");
  if (f) f << j.dump(2) << '\n';
  std::cerr << "wcp: " << kind << " error: " << message << '\n';
}

int run(const std::string& config_path, std::optional<std::string> output_dir, unsigned threads) {
  fs::path dir = output_dir ? fs::path(*output_dir)
                            : fs::path(std::getenv(kEnvOutputDir) && *std::getenv(kEnvOutputDir)
                                           ? std::getenv(kEnvOutputDir)
                                           : "wcp-out");
  json resolved;
  try {
    std::ifstream in(config_path);
    require(static_cast<bool>(in), "cannot read config file " + config_path);
    json raw;
    try {
      raw = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (raw.is_object() && raw.contains("output_dir") && raw.at("output_dir").is_string() && !output_dir)
      dir = raw.at("output_dir").get<std::string>();
    resolved = resolve(raw, output_dir);
    if (resolved.contains("output_dir")) {
      require(resolved.at("output_dir").is_string(), "'output_dir' must be a string");
      dir = resolved.at("output_dir").get<std::string>();
    }
    dry_validate(resolved);
  } catch (const ValidationError& e) {
    write_diagnostics(dir, "validation", e.what(), kValidation);
    return kValidation;
  } catch (const json::exception& e) {
    write_diagnostics(dir, "validation", e.what(), kValidation);
    return kValidation;
  }

  Output out(dir);
  try {
    out.prepare();
    json manifest = resolved;
    manifest["toolkit_version"] = kVersion;
    out.json_file("manifest.json", manifest);
    const int code = handlers().at(resolved.at("command").get<std::string>())(resolved, out, threads);
    if (code == kCapacity) write_diagnostics(dir, "capacity", "run stopped at the population or vertex cap", code);
    return code;
  } catch (const ValidationError& e) {
    write_diagnostics(dir, "validation", e.what(), kValidation);
    return kValidation;
  } catch (const CapacityError& e) {
    write_diagnostics(dir, "capacity", e.what(), kCapacity);
    return kCapacity;
  } catch (const std::exception& e) {
    write_diagnostics(dir, "internal", e.what(), kCheckFailed);
    return kCheckFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted contact processes on rooted regular trees"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a JSON config (or a manifest)");
  std::string config;
  std::string output_dir;
  unsigned threads = wcp::default_threads();
  run_cmd->add_option("config", config, "Config file")->required();
  run_cmd->add_option("--output-dir,-o", output_dir,
                      std::string("Output directory (default: $") + kEnvOutputDir + ", else ./wcp-out)");
  run_cmd->add_option("--threads,-j", threads, "Worker threads")->check(CLI::Range(1u, 4096u));

  auto* version_cmd = app.add_subcommand("version", "Print the toolkit version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }
  if (version_cmd->parsed()) {
    std::cout << wcp::kVersion << '\n';
    return 0;
  }
  return run(config, output_dir.empty() ? std::nullopt : std::optional<std::string>(output_dir), threads);
}

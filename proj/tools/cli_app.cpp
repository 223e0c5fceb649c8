#include "cli_app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehc/analytics.hpp"
#include "ehc/battery_sim.hpp"
#include "ehc/energy_profiles.hpp"
#include "ehc/errors.hpp"
#include "ehc/policies.hpp"
#include "ehc/verification.hpp"

namespace ehc::cli {

namespace {

using nlohmann::json;

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": not a number: '" + item + "'");
    }
  }
  return values;
}

// "start:stop:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text, const char* flag) {
  if (text.find(':') == std::string::npos) return parse_list(text, flag);
  std::vector<double> parts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ':')) parts.push_back(parse_list(item, flag).at(0));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw ConfigError(std::string(flag) + ": expected start:stop:step with step > 0");
  }
  std::vector<double> values;
  const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long i = 0; i <= count; ++i) values.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return values;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
}

template <typename T>
T config_value(const json& config, const char* key, T fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<double> config_grid(const json& config, const char* key) {
  if (!config.contains(key)) return {};
  const auto& node = config.at(key);
  if (node.is_string()) return parse_grid(node.get<std::string>(), key);
  if (node.is_number()) return {node.get<double>()};
  return config_value<std::vector<double>>(config, key, {});
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  file << text;
}

// Profile flags shared by bounds and simulate. Flags given on the command line
// win over the config file.
struct ProfileFlags {
  std::string kind;
  std::optional<double> p, E, a1, a2;
  std::optional<std::int64_t> n;
  std::string levels, probs;

  void attach(CLI::App& cmd) {
    cmd.add_option("--profile", kind, "bernoulli | uniform | k_level | harmonic");
    cmd.add_option("--p", p, "Bernoulli arrival probability");
    cmd.add_option("--E", E, "Bernoulli packet energy");
    cmd.add_option("--a1", a1, "uniform profile lower end");
    cmd.add_option("--a2", a2, "uniform profile upper end");
    cmd.add_option("--levels", levels, "k-level energies, comma separated");
    cmd.add_option("--probs", probs, "k-level probabilities, comma separated");
    cmd.add_option("--n", n, "harmonic profile index");
  }

  EnergyProfile resolve(const json& config) const {
    json desc = json::object();
    if (config.contains("profile")) {
      const auto& node = config.at("profile");
      if (node.is_object()) {
        desc = node;
      } else if (node.is_string()) {
        desc["kind"] = node;
      } else {
        throw ConfigError("config key 'profile' must be a string or object");
      }
    }
    for (const char* key : {"p", "E", "A1", "A2", "levels", "probs", "n"}) {
      if (config.contains(key) && !desc.contains(key)) desc[key] = config.at(key);
    }
    if (config.contains("a1") && !desc.contains("A1")) desc["A1"] = config.at("a1");
    if (config.contains("a2") && !desc.contains("A2")) desc["A2"] = config.at("a2");
    if (!kind.empty()) desc["kind"] = kind;
    if (!desc.contains("kind")) desc["kind"] = "bernoulli";
    if (p) desc["p"] = *p;
    if (E) desc["E"] = *E;
    if (a1) desc["A1"] = *a1;
    if (a2) desc["A2"] = *a2;
    if (n) desc["n"] = *n;
    if (!levels.empty()) desc["levels"] = parse_list(levels, "--levels");
    if (!probs.empty()) desc["probs"] = parse_list(probs, "--probs");
    return desc.get<EnergyProfile>();
  }
};

struct BoundsRow {
  std::string profile;
  double bmax;
  BoundsReport report;
  double gap_bound;
};

int cmd_bounds(const ProfileFlags& flags, const std::string& config_path,
               const std::optional<std::string>& bmax_grid, const std::optional<double>& bmax,
               const std::string& format, const std::string& out_path, std::optional<double> tol,
               std::ostream& out) {
  const json config = load_config(config_path);
  const auto profile = flags.resolve(config);
  std::vector<double> grid;
  if (bmax_grid) {
    grid = parse_grid(*bmax_grid, "--bmax-grid");
  } else if (bmax) {
    grid = {*bmax};
  } else {
    grid = config_grid(config, config.contains("bmax_grid") ? "bmax_grid" : "bmax");
  }
  if (grid.empty()) throw ConfigError("bounds: empty B_max grid");
  const double series_tol = tol.value_or(config_value(config, "tol", 1e-12));
  const std::string output = out_path.empty() ? config_value<std::string>(config, "out", "")
                                              : out_path;

  std::vector<BoundsRow> rows;
  for (double b : grid) {
    BoundsRow row{std::string(kind_name(profile)), b, {}, 0.0};
    if (const auto* bern = std::get_if<Bernoulli>(&profile)) {
      const double budget = std::min(b, bern->E);
      row.report.upper = upper_bound(bern->p, b, bern->E);
      row.report.achieved_series = policy_rate_series(bern->p, budget, series_tol);
      row.report.lower =
          std::max(0.0, *row.report.achieved_series - side_information_penalty(bern->p));
      row.report.gap = row.report.upper - row.report.lower;
      row.gap_bound = constants::kCapacityGap;
    } else {
      row.report = general_bounds(profile, b);
      row.gap_bound = gap_bound_ratio(profile, b);
    }
    rows.push_back(row);
  }

  std::string text;
  if (format == "json") {
    json array = json::array();
    for (const auto& row : rows) {
      json j = row.report;
      j["profile"] = row.profile;
      j["bmax"] = row.bmax;
      j["gap_bound_bits"] = row.gap_bound;
      array.push_back(j);
    }
    text = array.dump(2) + "\n";
  } else {
    text = "profile,bmax,upper_bits,lower_bits,series_bits,gap_bits,gap_bound_bits\n";
    for (const auto& row : rows) {
      text += row.profile + "," + fmt12(row.bmax) + "," + fmt12(row.report.upper) + "," +
              fmt12(row.report.lower) + "," +
              (row.report.achieved_series ? fmt12(*row.report.achieved_series) : "") + "," +
              fmt12(row.report.gap) + "," + fmt12(row.gap_bound) + "\n";
    }
  }
  emit(text, output, out);
  return kOk;
}

struct SimulateFlags {
  std::optional<double> p, E, bmax, bmax_ratio;
  std::optional<std::string> bmax_grid, snr_db;
  std::string policies;
  std::optional<std::int64_t> horizon, trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> tol;
  std::string out;
  std::string config;
};

struct GridPoint {
  double snr_db;
  double p;
  double E;
  double bmax;
};

// constant_fraction resolves to the epoch policy when B_max <= E and to the
// adaptive policy otherwise, matching how the two regimes are usually plotted.
Policy make_policy(const std::string& name, const GridPoint& g) {
  const double budget = std::min(g.bmax, g.E);
  if (name == "constant_fraction") {
    if (g.bmax <= g.E) return ConstantFractionEpoch{g.p, budget};
    return ConstantFractionAdaptive{g.p};
  }
  if (name == "constant_fraction_epoch") return ConstantFractionEpoch{g.p, budget};
  if (name == "constant_fraction_adaptive") return ConstantFractionAdaptive{g.p};
  if (name == "uniform") return Uniform{g.p * budget};
  throw ConfigError("unknown policy '" + name + "'");
}

int cmd_simulate(const SimulateFlags& flags, std::ostream& out) {
  const json config = load_config(flags.config);
  const double p = flags.p.value_or(config_value(config, "p", std::nan("")));
  if (std::isnan(p)) throw ConfigError("simulate: --p is required");
  if (config.contains("profile")) {
    const auto& node = config.at("profile");
    const bool bernoulli = (node.is_string() && node.get<std::string>() == "bernoulli") ||
                           (node.is_object() && node.value("kind", "") == "bernoulli");
    if (!bernoulli) throw ConfigError("simulate: only bernoulli profiles are supported");
  }
  validate(EnergyProfile{Bernoulli{p, 1.0}});

  std::vector<GridPoint> grid;
  const std::optional<double> energy =
      flags.E ? flags.E
              : (config.contains("E") ? std::optional<double>(config_value(config, "E", 0.0))
                                      : std::nullopt);
  const std::vector<double> snr = flags.snr_db ? parse_grid(*flags.snr_db, "--snr-db")
                                               : config_grid(config, "snr_db");
  const bool use_snr = flags.snr_db.has_value() || (!flags.bmax_grid && !flags.bmax &&
                                                    config.contains("snr_db"));
  if (use_snr) {
    const double ratio = flags.bmax_ratio.value_or(config_value(config, "bmax_ratio", 1.0));
    if (!(ratio > 0.0)) throw DomainError("simulate: --bmax-ratio must be > 0");
    for (double db : snr) {
      const double level = std::pow(10.0, db / 10.0) / p;  // min(B_max, E)
      const double e = ratio >= 1.0 ? level : level / ratio;
      grid.push_back({db, p, e, e * ratio});
    }
  } else {
    std::vector<double> bmaxes;
    if (flags.bmax_grid) {
      bmaxes = parse_grid(*flags.bmax_grid, "--bmax-grid");
    } else if (flags.bmax) {
      bmaxes = {*flags.bmax};
    } else {
      bmaxes = config_grid(config, config.contains("bmax_grid") ? "bmax_grid" : "bmax");
    }
    if (!bmaxes.empty() && !energy) throw ConfigError("simulate: --E is required with --bmax");
    for (double b : bmaxes) {
      const double snr_linear = p * std::min(b, *energy);
      grid.push_back({10.0 * std::log10(snr_linear), p, *energy, b});
    }
  }
  if (grid.empty()) throw ConfigError("simulate: empty grid");

  std::string policy_text = flags.policies;
  std::vector<std::string> policies;
  if (policy_text.empty() && config.contains("policies")) {
    policies = config_value<std::vector<std::string>>(config, "policies", {});
  } else {
    if (policy_text.empty()) policy_text = "constant_fraction,uniform";
    std::stringstream stream(policy_text);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (!item.empty()) policies.push_back(item);
    }
  }
  if (policies.empty()) throw ConfigError("simulate: empty policy list");

  TraceConfig trace;
  trace.horizon = flags.horizon.value_or(config_value<std::int64_t>(config, "horizon", 100'000));
  trace.trials = flags.trials.value_or(config_value<std::int64_t>(config, "trials", 20));
  trace.seed = flags.seed.value_or(config_value<std::uint64_t>(config, "seed", 1));
  trace.threads = flags.threads.value_or(config_value<unsigned>(config, "threads", 0));
  const double series_tol = flags.tol.value_or(config_value(config, "tol", 1e-12));
  const std::string output =
      flags.out.empty() ? config_value<std::string>(config, "out", "") : flags.out;

  std::string text =
      "snr_db,p,E,bmax,policy,mc_rate_bits,mc_stderr_bits,series_bits,upper_bits,gap_bits\n";
  for (const auto& g : grid) {
    const double series = policy_rate_series(g.p, std::min(g.bmax, g.E), series_tol);
    const double upper = upper_bound(g.p, g.bmax, g.E);
    for (const auto& name : policies) {
      const auto policy = make_policy(name, g);
      const auto mc = monte_carlo(Bernoulli{g.p, g.E}, policy, g.bmax, trace);
      text += fmt12(g.snr_db) + "," + fmt12(g.p) + "," + fmt12(g.E) + "," + fmt12(g.bmax) + "," +
              std::string(kind_name(policy)) + "," + fmt12(mc.mean) + "," +
              fmt12(mc.std_error) + "," + fmt12(series) + "," + fmt12(upper) + "," +
              fmt12(upper - mc.mean) + "\n";
    }
  }
  emit(text, output, out);
  return kOk;
}

struct VerifyFlags {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::int64_t> horizon, trials;
  std::vector<std::string> overrides;
  bool quick = false;
  std::string out;
  std::string config;
};

int cmd_verify(const VerifyFlags& flags, std::ostream& out, std::ostream& err) {
  const json config = load_config(flags.config);
  VerifyOptions options;
  if (flags.quick || config_value(config, "quick", false)) {
    options.renewal_horizon = 200'000;
    options.renewal_trials = 20;
    options.divergence_horizon = 200'000;
    options.divergence_trials = 10;
    options.property_cases = 200;
    options.property_steps = 2'000;
  }
  options.seed = flags.seed.value_or(config_value<std::uint64_t>(config, "seed", options.seed));
  options.threads = flags.threads.value_or(config_value<unsigned>(config, "threads", 0));
  if (const auto h = flags.horizon ? flags.horizon
                                   : (config.contains("horizon")
                                          ? std::optional(config_value<std::int64_t>(config, "horizon", 0))
                                          : std::nullopt)) {
    options.renewal_horizon = options.divergence_horizon = *h;
  }
  if (const auto t = flags.trials ? flags.trials
                                  : (config.contains("trials")
                                         ? std::optional(config_value<std::int64_t>(config, "trials", 0))
                                         : std::nullopt)) {
    options.renewal_trials = options.divergence_trials = *t;
  }
  for (const auto& item : flags.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--override-constant expects name=value");
    const std::string name = item.substr(0, eq);
    const double value = parse_list(item.substr(eq + 1), "--override-constant").at(0);
    if (name == "policy_gap") {
      options.constants.policy_gap = value;
    } else if (name == "capacity_gap") {
      options.constants.capacity_gap = value;
    } else if (name == "two_level_gap") {
      options.constants.two_level_gap = value;
    } else {
      throw ConfigError("unknown constant '" + name + "'");
    }
  }

  const auto results = run_verification(options);
  const auto report = verification_report(results, options);
  for (const auto& r : results) {
    err << (r.passed ? "PASS " : "FAIL ") << r.id << "  (" << fmt12(r.seconds) << " s)\n";
  }
  const std::string output =
      flags.out.empty() ? config_value<std::string>(config, "out", "") : flags.out;
  emit(report.dump(2) + "\n", output, out);
  return report.at("passed").get<bool>() ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "Energy-harvesting AWGN channel: capacity bounds, online power policies, Monte Carlo.\n"
      "SNR convention: snr = p * min(B_max, E), reported in dB as 10*log10(snr).",
      "ehc"};
  app.require_subcommand(1);

  auto* bounds = app.add_subcommand("bounds", "Capacity upper/lower bounds over a B_max grid");
  ProfileFlags bounds_profile;
  bounds_profile.attach(*bounds);
  std::optional<std::string> bounds_grid;
  std::optional<double> bounds_bmax;
  std::optional<double> bounds_tol;
  std::string bounds_format = "csv";
  std::string bounds_out;
  std::string bounds_config;
  bounds->add_option("--bmax", bounds_bmax, "battery capacity");
  bounds->add_option("--bmax-grid", bounds_grid, "battery grid: a,b,c or start:stop:step");
  bounds->add_option("--tol", bounds_tol, "series truncation tolerance in bits");
  bounds->add_option("--format", bounds_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  bounds->add_option("--out", bounds_out, "output file (default stdout)");
  bounds->add_option("--config", bounds_config, "JSON config; flags override it");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo policy sweep, CSV output");
  SimulateFlags sim;
  simulate->add_option("--profile", "only bernoulli is supported")
      ->check(CLI::IsMember({"bernoulli"}));
  simulate->add_option("--p", sim.p, "arrival probability");
  simulate->add_option("--E", sim.E, "packet energy (with --bmax/--bmax-grid)");
  simulate->add_option("--bmax", sim.bmax, "battery capacity");
  simulate->add_option("--bmax-grid", sim.bmax_grid, "battery grid: a,b,c or start:stop:step");
  simulate->add_option("--snr-db", sim.snr_db, "SNR grid in dB: a,b,c or start:stop:step");
  simulate->add_option("--bmax-ratio", sim.bmax_ratio, "B_max / E for --snr-db sweeps (default 1)");
  simulate->add_option("--policy", sim.policies,
                       "comma list of constant_fraction, constant_fraction_epoch, "
                       "constant_fraction_adaptive, uniform");
  simulate->add_option("--horizon", sim.horizon, "channel uses per trial");
  simulate->add_option("--trials", sim.trials, "independent trials per point");
  simulate->add_option("--seed", sim.seed, "64-bit seed");
  simulate->add_option("--threads", sim.threads, "worker threads (0 = all cores)");
  simulate->add_option("--tol", sim.tol, "series truncation tolerance in bits");
  simulate->add_option("--out", sim.out, "output file (default stdout)");
  simulate->add_option("--config", sim.config, "JSON config; flags override it");

  auto* verify = app.add_subcommand("verify", "Run the guarantee/invariant grid, JSON report");
  VerifyFlags ver;
  verify->add_option("--seed", ver.seed, "64-bit seed for Monte Carlo checks");
  verify->add_option("--threads", ver.threads, "worker threads (0 = all cores)");
  verify->add_option("--horizon", ver.horizon, "channel uses per Monte Carlo trial");
  verify->add_option("--trials", ver.trials, "Monte Carlo trials");
  verify->add_flag("--quick", ver.quick, "smaller Monte Carlo budgets");
  verify->add_option("--override-constant", ver.overrides,
                     "name=value, replaces policy_gap | capacity_gap | two_level_gap "
                     "(negative-control testing)");
  verify->add_option("--out", ver.out, "report file (default stdout)");
  verify->add_option("--config", ver.config, "JSON config; flags override it");

  std::vector<std::string> storage{"ehc"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (bounds->parsed()) {
      return cmd_bounds(bounds_profile, bounds_config, bounds_grid, bounds_bmax, bounds_format,
                        bounds_out, bounds_tol, out);
    }
    if (simulate->parsed()) return cmd_simulate(sim, out);
    return cmd_verify(ver, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kDomain;
  }
}

}  // namespace ehc::cli

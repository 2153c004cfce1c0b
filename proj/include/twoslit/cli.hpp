// Copyright 2026 The twoslit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file cli.hpp
 * Command-line front end: configuration, JSON config files and rendering.
 *
 * Subcommands: exact, run, sweep, bomb-protocol, env-overlap. Flags override
 * fields of a `--config` JSON file; SIM_SEED is the fallback seed.
 */
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mc.hpp"

namespace twoslit::cli {

using nlohmann::json;

enum class OutputFormat { Csv, Table };

struct RunConfig {
  Scenario scenario;
  std::int64_t trials = 10000;
  std::optional<std::uint64_t> seed;
  OutputFormat output = OutputFormat::Table;
  std::optional<std::string> out_path;
};

/// Thrown for malformed configuration; reported as a one-line diagnostic.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// %.12g, the numeric format of every CSV cell.
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// -- enum <-> string ----------------------------------------------------------

inline ScenarioKind parse_kind(const std::string &s) {
  for (auto k : kAllScenarioKinds) {
    if (kind_name(k) == s) {
      return k;
    }
  }
  throw ConfigError("unknown scenario '" + s + "'");
}

inline std::string policy_name(PolicyKind k) {
  switch (k) {
  case PolicyKind::Unitary:
    return "unitary";
  case PolicyKind::CollapseAtDetector:
    return "collapse";
  case PolicyKind::Threshold:
    return "threshold";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string &s) {
  if (s == "unitary") {
    return PolicyKind::Unitary;
  }
  if (s == "collapse") {
    return PolicyKind::CollapseAtDetector;
  }
  if (s == "threshold") {
    return PolicyKind::Threshold;
  }
  throw ConfigError("unknown policy '" + s + "' (expected unitary|collapse|threshold)");
}

inline std::string bomb_name(BombKind k) { return k == BombKind::Real ? "real" : "dud"; }

inline BombKind parse_bomb(const std::string &s) {
  if (s == "real") {
    return BombKind::Real;
  }
  if (s == "dud") {
    return BombKind::Dud;
  }
  throw ConfigError("unknown bomb kind '" + s + "' (expected real|dud)");
}

inline std::string idler_basis_name(IdlerBasis b) { return b == IdlerBasis::WhichPath ? "which-path" : "plus-minus"; }

inline IdlerBasis parse_idler_basis(const std::string &s) {
  if (s == "which-path") {
    return IdlerBasis::WhichPath;
  }
  if (s == "plus-minus") {
    return IdlerBasis::PlusMinus;
  }
  throw ConfigError("unknown idler basis '" + s + "' (expected which-path|plus-minus)");
}

inline std::string order_name(MeasureOrder o) { return o == MeasureOrder::ScreenFirst ? "screen-first" : "idler-first"; }

inline MeasureOrder parse_order(const std::string &s) {
  if (s == "screen-first") {
    return MeasureOrder::ScreenFirst;
  }
  if (s == "idler-first") {
    return MeasureOrder::IdlerFirst;
  }
  throw ConfigError("unknown order '" + s + "' (expected screen-first|idler-first)");
}

inline OutputFormat parse_format(const std::string &s) {
  if (s == "csv") {
    return OutputFormat::Csv;
  }
  if (s == "table") {
    return OutputFormat::Table;
  }
  throw ConfigError("unknown format '" + s + "' (expected csv|table)");
}

inline std::string format_name(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "table"; }

/// A single value "1.5" or a grid "start:stop:step".
struct TauSpec {
  std::optional<double> value;
  std::vector<double> grid;
};

inline double parse_number(const std::string &s, const char *what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception &) {
    throw ConfigError(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

inline TauSpec parse_tau(const std::string &s) {
  const auto first = s.find(':');
  if (first == std::string::npos) {
    return {parse_number(s, "tau"), {}};
  }
  const auto second = s.find(':', first + 1);
  if (second == std::string::npos) {
    throw ConfigError("tau grid must be start:stop:step");
  }
  const double start = parse_number(s.substr(0, first), "tau start");
  const double stop = parse_number(s.substr(first + 1, second - first - 1), "tau stop");
  const double step = parse_number(s.substr(second + 1), "tau step");
  return {std::nullopt, tau_range(start, stop, step)};
}

// -- JSON ---------------------------------------------------------------------

inline json scenario_to_json(const Scenario &s) {
  json j;
  j["kind"] = std::string(kind_name(s.kind));
  j["policy"] = policy_name(s.policy.kind);
  if (s.policy.kind == PolicyKind::Threshold) {
    j["tau_star"] = s.policy.tau_star;
  }
  if (s.epsilon) {
    j["epsilon"] = *s.epsilon;
  }
  if (s.bomb_kind) {
    j["bomb"] = bomb_name(*s.bomb_kind);
  }
  if (s.idler_basis) {
    j["idler_basis"] = idler_basis_name(*s.idler_basis);
  }
  if (s.measure_order) {
    j["order"] = order_name(*s.measure_order);
  }
  if (s.lambda_rate) {
    j["lambda"] = *s.lambda_rate;
  }
  if (s.omega) {
    j["omega"] = *s.omega;
  }
  if (s.tau) {
    j["tau"] = *s.tau;
  }
  if (!s.tau_grid.empty()) {
    j["tau_grid"] = s.tau_grid;
  }
  if (s.env_dim) {
    j["env_dim"] = *s.env_dim;
  }
  if (s.env_seed) {
    j["env_seed"] = *s.env_seed;
  }
  if (s.max_rounds) {
    j["max_rounds"] = *s.max_rounds;
  }
  return j;
}

inline Scenario scenario_from_json(const json &j) {
  if (!j.is_object()) {
    throw ConfigError("scenario must be a JSON object");
  }
  static const std::vector<std::string> known = {"kind",  "policy", "tau_star", "epsilon",  "bomb",
                                                 "idler_basis", "order", "lambda", "omega", "tau",
                                                 "tau_grid", "env_dim", "env_seed", "max_rounds"};
  for (const auto &[key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown scenario field '" + key + "'");
    }
  }
  try {
    Scenario s;
    s.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("policy")) {
      s.policy.kind = parse_policy(j["policy"].get<std::string>());
    }
    if (j.contains("tau_star")) {
      s.policy.tau_star = j["tau_star"].get<double>();
    }
    if (j.contains("epsilon")) {
      s.epsilon = j["epsilon"].get<double>();
    }
    if (j.contains("bomb")) {
      s.bomb_kind = parse_bomb(j["bomb"].get<std::string>());
    }
    if (j.contains("idler_basis")) {
      s.idler_basis = parse_idler_basis(j["idler_basis"].get<std::string>());
    }
    if (j.contains("order")) {
      s.measure_order = parse_order(j["order"].get<std::string>());
    }
    if (j.contains("lambda")) {
      s.lambda_rate = j["lambda"].get<double>();
    }
    if (j.contains("omega")) {
      s.omega = j["omega"].get<double>();
    }
    if (j.contains("tau")) {
      s.tau = j["tau"].get<double>();
    }
    if (j.contains("tau_grid")) {
      s.tau_grid = j["tau_grid"].get<std::vector<double>>();
    }
    if (j.contains("env_dim")) {
      s.env_dim = j["env_dim"].get<int>();
    }
    if (j.contains("env_seed")) {
      s.env_seed = j["env_seed"].get<std::uint64_t>();
    }
    if (j.contains("max_rounds")) {
      s.max_rounds = j["max_rounds"].get<int>();
    }
    return s;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad scenario field: ") + e.what());
  }
}

inline json config_to_json(const RunConfig &c) {
  json j;
  j["scenario"] = scenario_to_json(c.scenario);
  j["trials"] = c.trials;
  if (c.seed) {
    j["seed"] = *c.seed;
  }
  j["output"] = format_name(c.output);
  if (c.out_path) {
    j["out_path"] = *c.out_path;
  }
  return j;
}

inline RunConfig config_from_json(const json &j) {
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto &[key, value] : j.items()) {
    if (key != "scenario" && key != "trials" && key != "seed" && key != "output" && key != "out_path") {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  try {
    RunConfig c;
    if (j.contains("scenario")) {
      c.scenario = scenario_from_json(j["scenario"]);
    }
    if (j.contains("trials")) {
      c.trials = j["trials"].get<std::int64_t>();
    }
    if (j.contains("seed")) {
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
      c.output = parse_format(j["output"].get<std::string>());
    }
    if (j.contains("out_path")) {
      c.out_path = j["out_path"].get<std::string>();
    }
    return c;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
}

inline RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path + "'");
  }
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

// -- rendering ----------------------------------------------------------------

/// Rows of cells; CSV joins with ',', table pads columns to a common width.
inline void render_rows(std::ostream &out, const std::vector<std::vector<std::string>> &rows, OutputFormat f) {
  if (f == OutputFormat::Csv) {
    for (const auto &row : rows) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        out << (k ? "," : "") << row[k];
      }
      out << '\n';
    }
    return;
  }
  std::vector<std::size_t> width;
  for (const auto &row : rows) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t k = 0; k < row.size(); ++k) {
      width[k] = std::max(width[k], row[k].size());
    }
  }
  for (const auto &row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const bool last = k + 1 == row.size();
      out << (k ? "  " : "") << std::left << std::setw(last ? 0 : static_cast<int>(width[k])) << row[k];
    }
    out << '\n';
  }
}

inline std::vector<std::vector<std::string>> distribution_rows(const Distribution &d) {
  std::vector<std::vector<std::string>> rows{{"outcome", "probability"}};
  for (const auto &c : d.cells()) {
    rows.push_back({flatten_key(c.key), fmt(c.probability)});
  }
  return rows;
}

inline std::vector<std::vector<std::string>> report_rows(const OracleReport &r) {
  std::vector<std::vector<std::string>> rows{{"outcome", "count", "freq", "ci95", "exact", "z", "pass"}};
  for (const auto &c : r.cells) {
    const double ci = wilson_halfwidth(c.count, r.total);
    rows.push_back({c.label, std::to_string(c.count), fmt(c.freq), fmt(ci), fmt(c.exact),
                    c.degenerate ? "exact" : fmt(c.z), c.pass ? "yes" : "no"});
  }
  return rows;
}

/// Sweep table for the timed scenarios.
inline std::vector<std::vector<std::string>> sweep_rows(const Scenario &s) {
  std::vector<std::vector<std::string>> rows;
  switch (s.kind) {
  case ScenarioKind::DecoherenceSweep: {
    rows.push_back({"tau", "p_A_exact_unitary", "p_A_exact_policy", "p_B_exact_unitary", "c_tau"});
    Scenario unitary = s;
    unitary.policy = CollapsePolicy::unitary();
    const auto u = sweep(unitary);
    const auto p = sweep(s);
    const DecoherenceLaw law{s.lambda_or_default()};
    for (std::size_t k = 0; k < u.size(); ++k) {
      rows.push_back({fmt(u[k].tau), fmt(u[k].distribution.probability("screen", "A")),
                      fmt(p[k].distribution.probability("screen", "A")),
                      fmt(u[k].distribution.probability("screen", "B")), fmt(law.overlap(u[k].tau))});
    }
    break;
  }
  case ScenarioKind::RotatingIdler: {
    rows.push_back({"tau", "p_A", "p_B"});
    for (const auto &pt : sweep(s)) {
      rows.push_back({fmt(pt.tau), fmt(pt.distribution.probability("screen", "A")),
                      fmt(pt.distribution.probability("screen", "B"))});
    }
    break;
  }
  case ScenarioKind::FiniteEnvironment: {
    s.validate();
    rows.push_back({"t", "re_c", "im_c", "abs_c", "abs_c_paperform"});
    const auto bh =
        random_block_hamiltonian(static_cast<std::size_t>(s.env_dim_or_default()), s.env_seed_or_default());
    if (s.tau_grid.empty()) {
      throw ScenarioError("sweep needs a nonempty tau grid");
    }
    for (double t : s.tau_grid) {
      const Complex c = finite_env_overlap(bh, t);
      rows.push_back({fmt(t), fmt(c.real()), fmt(c.imag()), fmt(std::abs(c)),
                      fmt(std::abs(commuting_form_overlap(bh, t)))});
    }
    break;
  }
  default:
    throw ConfigError("sweep supports decoherence, rotating-idler and finite-env, not " +
                      std::string(kind_name(s.kind)));
  }
  return rows;
}

// -- commands -----------------------------------------------------------------

inline void cmd_exact(const RunConfig &c, std::ostream &out) {
  render_rows(out, distribution_rows(exact_distribution(c.scenario)), c.output);
}

inline std::uint64_t resolve_seed(const RunConfig &c) {
  if (c.seed) {
    return *c.seed;
  }
  if (const char *env = std::getenv("SIM_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) {
        return v;
      }
    } catch (const std::exception &) {
    }
    throw ConfigError(std::string("SIM_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

inline OracleReport cmd_run(const RunConfig &c, std::ostream &out) {
  const auto summary = run_many(c.scenario, c.trials, resolve_seed(c));
  const auto report = compare_to_oracle(summary, exact_distribution(c.scenario));
  render_rows(out, report_rows(report), c.output);
  if (c.output == OutputFormat::Table) {
    out << "trials " << summary.total << ", all cells within " << fmt(kSigmaThreshold)
        << " sigma: " << (report.all_pass() ? "yes" : "no") << '\n';
  }
  return report;
}

inline void cmd_sweep(const RunConfig &c, std::ostream &out) { render_rows(out, sweep_rows(c.scenario), c.output); }

inline void cmd_env_overlap(double lambda_atom, double n_atoms, OutputFormat f, std::ostream &out) {
  const auto est = overlap_estimate(lambda_atom, n_atoms);
  render_rows(out, {{"log10_overlap", fmt(est.log10_overlap)}}, f);
}

// -- argument parsing ---------------------------------------------------------

/// Raw flag values; unset flags leave the config untouched.
struct ScenarioFlags {
  std::optional<std::string> scenario, policy, idler_basis, order, bomb, tau, format, out, config;
  std::optional<double> tau_star, lambda, omega, epsilon;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed, env_seed;
  std::optional<int> env_dim, max_rounds;
};

inline void add_scenario_flags(CLI::App &cmd, ScenarioFlags &f) {
  cmd.add_option("--config", f.config, "JSON run configuration");
  cmd.add_option("--scenario", f.scenario, "scenario kind");
  cmd.add_option("--policy", f.policy, "unitary|collapse|threshold");
  cmd.add_option("--tau-star", f.tau_star, "threshold collapse time");
  cmd.add_option("--lambda", f.lambda, "decoherence rate");
  cmd.add_option("--omega", f.omega, "idler angular frequency");
  cmd.add_option("--epsilon", f.epsilon, "pointer overlap <D_L|D_R>");
  cmd.add_option("--idler-basis", f.idler_basis, "which-path|plus-minus");
  cmd.add_option("--order", f.order, "screen-first|idler-first");
  cmd.add_option("--bomb", f.bomb, "real|dud");
  cmd.add_option("--trials,--bombs", f.trials, "number of trials");
  cmd.add_option("--seed", f.seed, "master seed (fallback: SIM_SEED)");
  cmd.add_option("--tau", f.tau, "screen time, or grid start:stop:step");
  cmd.add_option("--env-dim", f.env_dim, "finite environment dimension");
  cmd.add_option("--env-seed", f.env_seed, "finite environment seed");
  cmd.add_option("--max-rounds", f.max_rounds, "bomb protocol round cap");
  cmd.add_option("--out", f.out, "write output to this file");
  cmd.add_option("--format", f.format, "csv|table");
}

/// Config file first, then flags on top.
inline RunConfig build_config(const ScenarioFlags &f, bool sweep_mode,
                              std::optional<ScenarioKind> forced_kind = std::nullopt) {
  RunConfig c = f.config ? load_config(*f.config) : RunConfig{};
  auto &s = c.scenario;
  if (f.scenario) {
    s.kind = parse_kind(*f.scenario);
  }
  if (forced_kind) {
    if (f.scenario && s.kind != *forced_kind) {
      throw ConfigError("this subcommand only runs scenario " + std::string(kind_name(*forced_kind)));
    }
    s.kind = *forced_kind;
  }
  if (!f.config && !f.scenario && !forced_kind) {
    throw ConfigError("--scenario or --config is required");
  }
  if (f.policy) {
    s.policy.kind = parse_policy(*f.policy);
  }
  if (f.tau_star) {
    s.policy.tau_star = *f.tau_star;
  }
  if (f.lambda) {
    s.lambda_rate = *f.lambda;
  }
  if (f.omega) {
    s.omega = *f.omega;
  }
  if (f.epsilon) {
    s.epsilon = *f.epsilon;
  }
  if (f.idler_basis) {
    s.idler_basis = parse_idler_basis(*f.idler_basis);
  }
  if (f.order) {
    s.measure_order = parse_order(*f.order);
  }
  if (f.bomb) {
    s.bomb_kind = parse_bomb(*f.bomb);
  }
  if (f.tau) {
    auto spec = parse_tau(*f.tau);
    if (sweep_mode) {
      s.tau.reset();
      s.tau_grid = spec.value ? std::vector<double>{*spec.value} : spec.grid;
    } else {
      if (!spec.value) {
        throw ConfigError("this subcommand takes a single --tau value; use sweep for grids");
      }
      s.tau_grid.clear();
      s.tau = spec.value;
    }
  }
  if (f.env_dim) {
    s.env_dim = *f.env_dim;
  }
  if (f.env_seed) {
    s.env_seed = *f.env_seed;
  }
  if (f.max_rounds) {
    s.max_rounds = *f.max_rounds;
  }
  if (f.trials) {
    c.trials = *f.trials;
  }
  if (f.seed) {
    c.seed = *f.seed;
  }
  if (f.format) {
    c.output = parse_format(*f.format);
  }
  if (f.out) {
    c.out_path = *f.out;
  }
  if (s.policy.kind == PolicyKind::Threshold && !std::isfinite(s.policy.tau_star)) {
    throw ConfigError("--policy threshold requires --tau-star");
  }
  if (!sweep_mode && !s.tau && !s.tau_grid.empty() && s.tau_grid.size() == 1) {
    s.tau = s.tau_grid.front();
    s.tau_grid.clear();
  }
  if (c.trials < 1) {
    throw ConfigError("--trials must be >= 1");
  }
  s.validate();
  return c;
}

/// Sends output to --out when set, else to `fallback`.
template <typename Fn> void with_output(const RunConfig &c, std::ostream &fallback, Fn &&fn) {
  if (!c.out_path) {
    fn(fallback);
    return;
  }
  std::ofstream file(*c.out_path);
  if (!file) {
    throw ConfigError("cannot open output file '" + *c.out_path + "'");
  }
  fn(file);
}

/// Entry point shared by the binary and the tests. Returns the exit status.
inline int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Two-outcome interference simulator"};
  app.require_subcommand(1);

  ScenarioFlags exact_flags, run_flags, sweep_flags, bomb_flags;
  auto *exact = app.add_subcommand("exact", "print the exact outcome distribution");
  add_scenario_flags(*exact, exact_flags);
  auto *run = app.add_subcommand("run", "sample trials and compare with the exact distribution");
  add_scenario_flags(*run, run_flags);
  auto *sweep_cmd = app.add_subcommand("sweep", "exact curves over a tau grid as CSV");
  add_scenario_flags(*sweep_cmd, sweep_flags);
  auto *bomb = app.add_subcommand("bomb-protocol", "repeat bomb tests until a verdict");
  add_scenario_flags(*bomb, bomb_flags);

  double lambda_atom = 0.0;
  double n_atoms = 0.0;
  std::string overlap_format = "csv";
  auto *overlap = app.add_subcommand("env-overlap", "log10 of the pointer-state overlap lambda^N");
  overlap->add_option("--lambda-atom", lambda_atom, "per-atom overlap")->required();
  overlap->add_option("--n", n_atoms, "number of atoms")->required();
  overlap->add_option("--format", overlap_format, "csv|table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err);
  }

  try {
    if (exact->parsed()) {
      const auto c = build_config(exact_flags, false);
      with_output(c, out, [&](std::ostream &o) { cmd_exact(c, o); });
    } else if (run->parsed()) {
      const auto c = build_config(run_flags, false);
      with_output(c, out, [&](std::ostream &o) { cmd_run(c, o); });
    } else if (sweep_cmd->parsed()) {
      const auto c = build_config(sweep_flags, true);
      with_output(c, out, [&](std::ostream &o) { cmd_sweep(c, o); });
    } else if (bomb->parsed()) {
      const auto c = build_config(bomb_flags, false, ScenarioKind::BombSavingProtocol);
      with_output(c, out, [&](std::ostream &o) { cmd_run(c, o); });
    } else if (overlap->parsed()) {
      cmd_env_overlap(lambda_atom, n_atoms, parse_format(overlap_format), out);
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

} // namespace twoslit::cli

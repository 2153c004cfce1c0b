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
 * @file scenarios.hpp
 * Declarative experiments, their exact outcome distributions and sampled trials.
 *
 * A scenario compiles to a Protocol: the state right after all couplings,
 * followed by an ordered list of policy checkpoints and measurements. The
 * exact distribution enumerates every branch of that list with Born weights;
 * a trial walks one branch with sampled outcomes. Both read the same list, so
 * Monte Carlo frequencies are checked against the enumeration.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "measure.hpp"

namespace twoslit {

enum class ScenarioKind {
  SingleSlitLeft,
  SingleSlitRight,
  DoubleSlit,
  WhichPathDetector,
  Bomb,
  BombSavingProtocol,
  IdlerDelayedChoice,
  DecoherenceSweep,
  RotatingIdler,
  FiniteEnvironment,
};

enum class MeasureOrder { ScreenFirst, IdlerFirst };

/// Largest environment for FiniteEnvironment (total dimension 2 * 8 = 16).
inline constexpr int kMaxEnvDim = 8;

struct Scenario {
  ScenarioKind kind = ScenarioKind::DoubleSlit;
  CollapsePolicy policy;

  std::optional<double> epsilon;
  std::optional<BombKind> bomb_kind;
  std::optional<IdlerBasis> idler_basis;
  std::optional<MeasureOrder> measure_order;
  std::optional<double> lambda_rate;
  std::optional<double> omega;
  std::optional<double> tau;
  std::vector<double> tau_grid;
  std::optional<int> env_dim;
  std::optional<std::uint64_t> env_seed;
  std::optional<int> max_rounds;

  [[nodiscard]] double epsilon_or_default() const { return epsilon.value_or(0.0); }
  [[nodiscard]] BombKind bomb_or_default() const { return bomb_kind.value_or(BombKind::Real); }
  [[nodiscard]] IdlerBasis idler_basis_or_default() const { return idler_basis.value_or(IdlerBasis::WhichPath); }
  [[nodiscard]] MeasureOrder order_or_default() const { return measure_order.value_or(MeasureOrder::ScreenFirst); }
  [[nodiscard]] double lambda_or_default() const { return lambda_rate.value_or(1.0); }
  [[nodiscard]] double omega_or_default() const { return omega.value_or(1.0); }
  [[nodiscard]] int env_dim_or_default() const { return env_dim.value_or(4); }
  [[nodiscard]] std::uint64_t env_seed_or_default() const { return env_seed.value_or(1); }
  [[nodiscard]] int max_rounds_or_default() const { return max_rounds.value_or(50); }

  void validate() const;
};

/// Thrown for scenarios that set parameters foreign to their kind or out of range.
class ScenarioError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline std::string_view kind_name(ScenarioKind k) {
  switch (k) {
  case ScenarioKind::SingleSlitLeft:
    return "single-slit-left";
  case ScenarioKind::SingleSlitRight:
    return "single-slit-right";
  case ScenarioKind::DoubleSlit:
    return "double-slit";
  case ScenarioKind::WhichPathDetector:
    return "which-path";
  case ScenarioKind::Bomb:
    return "bomb";
  case ScenarioKind::BombSavingProtocol:
    return "bomb-protocol";
  case ScenarioKind::IdlerDelayedChoice:
    return "idler";
  case ScenarioKind::DecoherenceSweep:
    return "decoherence";
  case ScenarioKind::RotatingIdler:
    return "rotating-idler";
  case ScenarioKind::FiniteEnvironment:
    return "finite-env";
  }
  return "?";
}

inline constexpr std::array<ScenarioKind, 10> kAllScenarioKinds = {
    ScenarioKind::SingleSlitLeft,     ScenarioKind::SingleSlitRight,   ScenarioKind::DoubleSlit,
    ScenarioKind::WhichPathDetector,  ScenarioKind::Bomb,              ScenarioKind::BombSavingProtocol,
    ScenarioKind::IdlerDelayedChoice, ScenarioKind::DecoherenceSweep,  ScenarioKind::RotatingIdler,
    ScenarioKind::FiniteEnvironment,
};

inline bool is_timed(ScenarioKind k) {
  return k == ScenarioKind::DecoherenceSweep || k == ScenarioKind::RotatingIdler ||
         k == ScenarioKind::FiniteEnvironment;
}

inline void Scenario::validate() const {
  const auto name = std::string(kind_name(kind));
  auto reject_unless = [&](bool present, bool allowed, const char *field) {
    if (present && !allowed) {
      throw ScenarioError("parameter '" + std::string(field) + "' does not apply to scenario " + name);
    }
  };
  const bool timed = is_timed(kind);
  reject_unless(epsilon.has_value(), kind == ScenarioKind::WhichPathDetector, "epsilon");
  reject_unless(bomb_kind.has_value(), kind == ScenarioKind::Bomb || kind == ScenarioKind::BombSavingProtocol,
                "bomb");
  reject_unless(idler_basis.has_value(), kind == ScenarioKind::IdlerDelayedChoice, "idler_basis");
  reject_unless(measure_order.has_value(), kind == ScenarioKind::IdlerDelayedChoice, "order");
  reject_unless(lambda_rate.has_value(), kind == ScenarioKind::DecoherenceSweep, "lambda");
  reject_unless(omega.has_value(), kind == ScenarioKind::RotatingIdler, "omega");
  reject_unless(tau.has_value(), timed, "tau");
  reject_unless(!tau_grid.empty(), timed, "tau grid");
  reject_unless(env_dim.has_value(), kind == ScenarioKind::FiniteEnvironment, "env_dim");
  reject_unless(env_seed.has_value(), kind == ScenarioKind::FiniteEnvironment, "env_seed");
  reject_unless(max_rounds.has_value(), kind == ScenarioKind::BombSavingProtocol, "max_rounds");

  policy.validate();
  if (policy.kind == PolicyKind::Threshold && !timed) {
    throw ScenarioError("threshold policy needs a timed scenario, not " + name);
  }
  if (epsilon) {
    PointerModel{*epsilon}.validate();
  }
  if (lambda_rate) {
    DecoherenceLaw{*lambda_rate}.validate();
  }
  if (omega) {
    RotatingIdlerLaw{*omega}.validate();
  }
  if (tau) {
    require_time(*tau, "scenario");
  }
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    require_time(tau_grid[k], "tau grid");
    if (k > 0 && !(tau_grid[k] > tau_grid[k - 1])) {
      throw ScenarioError("tau grid must be strictly increasing");
    }
  }
  if (env_dim && (*env_dim < 1 || *env_dim > kMaxEnvDim)) {
    throw ScenarioError("env_dim must lie in [1, " + std::to_string(kMaxEnvDim) + "]");
  }
  if (max_rounds && *max_rounds < 1) {
    throw ScenarioError("max_rounds must be >= 1");
  }
}

// -- distributions ------------------------------------------------------------

/// Ordered (event, label) pairs; the order is the measurement order.
using OutcomeKey = std::vector<std::pair<std::string, std::string>>;

/// `event=label` pairs joined by ';'.
inline std::string flatten_key(const OutcomeKey &key) {
  std::string out;
  for (const auto &[event, label] : key) {
    if (!out.empty()) {
      out += ';';
    }
    out += event + "=" + label;
  }
  return out;
}

/// Joint distribution over all recorded events. Cells are kept in enumeration
/// order (declared outcome order, event by event) and include zero cells.
class Distribution {
public:
  struct Cell {
    OutcomeKey key;
    double probability = 0.0;
  };

  Distribution() = default;
  explicit Distribution(std::vector<Cell> cells) : cells_(std::move(cells)) {}

  [[nodiscard]] const std::vector<Cell> &cells() const { return cells_; }

  void add(const OutcomeKey &key, double p) {
    for (auto &c : cells_) {
      if (c.key == key) {
        c.probability += p;
        return;
      }
    }
    cells_.push_back({key, p});
  }

  /// Total probability of cells matching every (event, label) in `partial`,
  /// regardless of event order.
  [[nodiscard]] double probability(const OutcomeKey &partial) const {
    double total = 0.0;
    for (const auto &c : cells_) {
      const bool match = std::all_of(partial.begin(), partial.end(), [&](const auto &want) {
        return std::find(c.key.begin(), c.key.end(), want) != c.key.end();
      });
      if (match) {
        total += c.probability;
      }
    }
    return total;
  }

  [[nodiscard]] double probability(std::string_view event, std::string_view label) const {
    return probability(OutcomeKey{{std::string(event), std::string(label)}});
  }

  [[nodiscard]] double total() const {
    double t = 0.0;
    for (const auto &c : cells_) {
      t += c.probability;
    }
    return t;
  }

  [[nodiscard]] double flat_probability(std::string_view flat) const {
    for (const auto &c : cells_) {
      if (flatten_key(c.key) == flat) {
        return c.probability;
      }
    }
    throw LayoutError("no outcome '" + std::string(flat) + "' in distribution");
  }

  void validate() const {
    for (const auto &c : cells_) {
      if (!(c.probability >= 0.0)) {
        throw NumericError("negative probability in distribution");
      }
    }
    if (std::abs(total() - 1.0) > kStorageTol) {
      throw NumericError("distribution does not sum to 1");
    }
  }

private:
  std::vector<Cell> cells_;
};

// -- protocols ----------------------------------------------------------------

struct ProtocolStep {
  enum class Kind { PolicyCheck, Measure };
  Kind kind = Kind::Measure;
  PolicyTrigger trigger = PolicyTrigger::Clock;
  std::string event;
  std::optional<MeasurementBasis> basis;
  double time = 0.0;
};

struct Protocol {
  Ket prepared;
  std::vector<ProtocolStep> steps;
  CollapsePolicy policy;
};

namespace detail {

inline ProtocolStep policy_check(PolicyTrigger trigger, double time) {
  return {ProtocolStep::Kind::PolicyCheck, trigger, "collapse", std::nullopt, time};
}

inline ProtocolStep measure_step(std::string event, MeasurementBasis basis, double time) {
  return {ProtocolStep::Kind::Measure, PolicyTrigger::Clock, std::move(event), std::move(basis), time};
}

inline double require_tau(const Scenario &s) {
  if (!s.tau) {
    throw ScenarioError("scenario " + std::string(kind_name(s.kind)) + " needs a single tau value");
  }
  return *s.tau;
}

} // namespace detail

/// Builds the state after all couplings plus the ordered checkpoint/measurement list.
inline Protocol compile(const Scenario &s) {
  s.validate();
  using detail::measure_step;
  using detail::policy_check;
  const auto both = particle_state(SlitConfig::BothSlits);

  switch (s.kind) {
  case ScenarioKind::SingleSlitLeft:
  case ScenarioKind::SingleSlitRight:
  case ScenarioKind::DoubleSlit: {
    const auto which = s.kind == ScenarioKind::SingleSlitLeft    ? SlitConfig::OnlyLeft
                       : s.kind == ScenarioKind::SingleSlitRight ? SlitConfig::OnlyRight
                                                                 : SlitConfig::BothSlits;
    return {particle_state(which), {measure_step("screen", screen_basis(), 0.0)}, s.policy};
  }
  case ScenarioKind::WhichPathDetector: {
    const PointerModel model{s.epsilon_or_default()};
    const auto ready = pointer_states(model).ready;
    return {entangle_which_path(tensor(both, ready), model),
            {policy_check(PolicyTrigger::DetectorChannel, 0.0),
             measure_step("detector", pointer_readout_basis(model), 0.0), measure_step("screen", screen_basis(), 0.0)},
            s.policy};
  }
  case ScenarioKind::Bomb: {
    const auto kind = s.bomb_or_default();
    std::vector<ProtocolStep> steps;
    // A dud does not interact, so it is not a detector.
    if (kind == BombKind::Real) {
      steps.push_back(policy_check(PolicyTrigger::DetectorChannel, 0.0));
    }
    steps.push_back(measure_step("bomb", bomb_readout_basis(), 0.0));
    steps.push_back(measure_step("screen", screen_basis(), 0.0));
    return {bomb_channel(tensor(both, bomb_ready()), kind), std::move(steps), s.policy};
  }
  case ScenarioKind::IdlerDelayedChoice: {
    auto screen = measure_step("screen", screen_basis(), 0.0);
    auto idler = measure_step("idler", idler_basis(s.idler_basis_or_default()), 0.0);
    std::vector<ProtocolStep> steps;
    if (s.order_or_default() == MeasureOrder::ScreenFirst) {
      idler.time = 1.0;
      steps = {std::move(screen), std::move(idler)};
    } else {
      screen.time = 1.0;
      steps = {std::move(idler), std::move(screen)};
    }
    return {emit_idler(both), std::move(steps), s.policy};
  }
  case ScenarioKind::DecoherenceSweep: {
    const double tau = detail::require_tau(s);
    return {monitor_environment(tau, DecoherenceLaw{s.lambda_or_default()}),
            {policy_check(PolicyTrigger::Clock, tau), measure_step("screen", screen_basis(), tau)},
            s.policy};
  }
  case ScenarioKind::RotatingIdler: {
    const double tau = detail::require_tau(s);
    return {rotate_idler(tau, RotatingIdlerLaw{s.omega_or_default()}),
            {policy_check(PolicyTrigger::Clock, tau), measure_step("screen", screen_basis(), tau)},
            s.policy};
  }
  case ScenarioKind::FiniteEnvironment: {
    const double tau = detail::require_tau(s);
    const auto bh =
        random_block_hamiltonian(static_cast<std::size_t>(s.env_dim_or_default()), s.env_seed_or_default());
    return {finite_env_state(bh, tau),
            {policy_check(PolicyTrigger::Clock, tau), measure_step("screen", screen_basis(), tau)},
            s.policy};
  }
  case ScenarioKind::BombSavingProtocol:
    throw ScenarioError("bomb-protocol is a repeated experiment; use bomb_saving_protocol");
  }
  throw ScenarioError("unknown scenario kind");
}

/// State after all couplings, before any collapse or measurement.
inline Ket prepared_state(const Scenario &s) { return compile(s).prepared; }

namespace detail {

inline void enumerate_branches(const Protocol &p, std::size_t step, const Ket &state, double weight,
                               bool threshold_fired, OutcomeKey &prefix, Distribution &acc) {
  if (step == p.steps.size()) {
    acc.add(prefix, weight);
    return;
  }
  const auto &st = p.steps[step];
  if (st.kind == ProtocolStep::Kind::PolicyCheck) {
    if (!policy_fires(p.policy, st.trigger, st.time, threshold_fired)) {
      enumerate_branches(p, step + 1, state, weight, threshold_fired, prefix, acc);
      return;
    }
    const auto basis = which_path_basis(frame_of(state.layout()));
    for (const auto &lp : born_probabilities(state, basis)) {
      if (lp.probability > kMinProjectProb) {
        enumerate_branches(p, step + 1, project_collapse(state, basis, lp.label), weight * lp.probability,
                           threshold_fired || st.trigger == PolicyTrigger::Clock, prefix, acc);
      }
    }
    return;
  }
  for (const auto &lp : born_probabilities(state, *st.basis)) {
    if (lp.probability > kMinProjectProb) {
      prefix.emplace_back(st.event, lp.label);
      enumerate_branches(p, step + 1, project_collapse(state, *st.basis, lp.label), weight * lp.probability,
                         threshold_fired, prefix, acc);
      prefix.pop_back();
    }
  }
}

/// Every combination of declared outcome labels, with probability 0.
inline std::vector<Distribution::Cell> empty_cells(const Protocol &p) {
  std::vector<Distribution::Cell> cells{{}};
  for (const auto &st : p.steps) {
    if (st.kind != ProtocolStep::Kind::Measure) {
      continue;
    }
    std::vector<Distribution::Cell> next;
    for (const auto &c : cells) {
      for (const auto &label : st.basis->labels()) {
        auto key = c.key;
        key.emplace_back(st.event, label);
        next.push_back({std::move(key), 0.0});
      }
    }
    cells = std::move(next);
  }
  return cells;
}

} // namespace detail

inline Distribution exact_distribution(const Protocol &p) {
  Distribution acc(detail::empty_cells(p));
  OutcomeKey prefix;
  detail::enumerate_branches(p, 0, p.prepared, 1.0, false, prefix, acc);
  acc.validate();
  return acc;
}

/// One sampled path through the protocol.
inline OutcomeRecord run_trial(const Protocol &p, RandomStream &rng) {
  OutcomeRecord record;
  Ket state = p.prepared;
  bool fired = false;
  for (const auto &st : p.steps) {
    if (st.kind == ProtocolStep::Kind::PolicyCheck) {
      auto step = apply_policy(state, st.time, p.policy, st.trigger, rng, fired);
      if (step.collapsed_to) {
        record.collapses.push_back({st.event, *step.collapsed_to, st.time});
        fired = fired || st.trigger == PolicyTrigger::Clock;
      }
      state = std::move(step.state);
      continue;
    }
    auto drawn = sample(state, *st.basis, rng);
    record.push({st.event, drawn.label, st.time});
    state = std::move(drawn.state);
  }
  return record;
}

inline OutcomeKey key_of(const OutcomeRecord &r) {
  OutcomeKey key;
  for (const auto &e : r.events) {
    key.emplace_back(e.event_name, e.outcome_label);
  }
  return key;
}

// -- bomb saving protocol -----------------------------------------------------

enum class Verdict { Exploded, CertifiedGood, Inconclusive };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
  case Verdict::Exploded:
    return "Exploded";
  case Verdict::CertifiedGood:
    return "CertifiedGood";
  case Verdict::Inconclusive:
    return "Inconclusive";
  }
  return "?";
}

struct BombVerdict {
  Verdict verdict = Verdict::Inconclusive;
  int rounds_used = 1;
};

namespace detail {

inline Scenario single_bomb(BombKind kind, const CollapsePolicy &policy) {
  Scenario s;
  s.kind = ScenarioKind::Bomb;
  s.bomb_kind = kind;
  s.policy = policy;
  return s;
}

inline BombVerdict run_bomb_rounds(const Protocol &round, BombKind kind, int max_rounds, RandomStream &rng) {
  for (int r = 1; r <= max_rounds; ++r) {
    const auto rec = run_trial(round, rng);
    if (rec.label_of("bomb") == "Exploded") {
      return {Verdict::Exploded, r};
    }
    if (rec.label_of("screen") == "B") {
      // B after no explosion has probability exactly 0 for a dud.
      if (kind == BombKind::Dud) {
        throw std::logic_error("dud bomb reached the certified branch");
      }
      return {Verdict::CertifiedGood, r};
    }
  }
  return {Verdict::Inconclusive, max_rounds};
}

} // namespace detail

/// Repeats single bomb trials: an explosion ends the run, no explosion with the
/// particle at B certifies a good bomb, no explosion at A tries again.
inline BombVerdict bomb_saving_protocol(BombKind kind, int max_rounds, RandomStream &rng,
                                        const CollapsePolicy &policy = {}) {
  if (max_rounds < 1) {
    throw ScenarioError("max_rounds must be >= 1");
  }
  return detail::run_bomb_rounds(compile(detail::single_bomb(kind, policy)), kind, max_rounds, rng);
}

namespace detail {

inline Distribution bomb_protocol_distribution(const Scenario &s) {
  const auto single = exact_distribution(compile(single_bomb(s.bomb_or_default(), s.policy)));
  const double explode = single.probability("bomb", "Exploded");
  const double certify = single.probability({{"bomb", "NoExplosion"}, {"screen", "B"}});
  const double again = single.probability({{"bomb", "NoExplosion"}, {"screen", "A"}});
  double reach = 1.0;
  double p_explode = 0.0;
  double p_certify = 0.0;
  for (int r = 0; r < s.max_rounds_or_default(); ++r) {
    p_explode += reach * explode;
    p_certify += reach * certify;
    reach *= again;
  }
  Distribution d({{{{"verdict", "Exploded"}}, p_explode},
                  {{{"verdict", "CertifiedGood"}}, p_certify},
                  {{{"verdict", "Inconclusive"}}, reach}});
  d.validate();
  return d;
}

} // namespace detail

/// Exact joint distribution of the scenario's recorded events.
inline Distribution exact_distribution(const Scenario &s) {
  if (s.kind == ScenarioKind::BombSavingProtocol) {
    s.validate();
    return detail::bomb_protocol_distribution(s);
  }
  return exact_distribution(compile(s));
}

/// Reusable trial runner; compiles the scenario once.
class TrialRunner {
public:
  explicit TrialRunner(const Scenario &s) : scenario_(s) {
    s.validate();
    if (s.kind == ScenarioKind::BombSavingProtocol) {
      protocol_ = compile(detail::single_bomb(s.bomb_or_default(), s.policy));
    } else {
      protocol_ = compile(s);
    }
  }

  [[nodiscard]] OutcomeRecord operator()(RandomStream &rng) const {
    if (scenario_.kind != ScenarioKind::BombSavingProtocol) {
      return run_trial(*protocol_, rng);
    }
    const auto v = detail::run_bomb_rounds(*protocol_, scenario_.bomb_or_default(),
                                           scenario_.max_rounds_or_default(), rng);
    OutcomeRecord r;
    r.push({"verdict", std::string(verdict_name(v.verdict)), 0.0});
    return r;
  }

private:
  Scenario scenario_;
  std::optional<Protocol> protocol_;
};

inline OutcomeRecord run_trial(const Scenario &s, RandomStream &rng) { return TrialRunner(s)(rng); }

// -- sweeps -------------------------------------------------------------------

struct SweepPoint {
  double tau;
  Distribution distribution;
};

/// exact_distribution at every tau of the scenario's grid.
inline std::vector<SweepPoint> sweep(const Scenario &s) {
  if (s.tau_grid.empty()) {
    throw ScenarioError("sweep needs a nonempty tau grid");
  }
  s.validate();
  std::vector<SweepPoint> out;
  out.reserve(s.tau_grid.size());
  Scenario point = s;
  point.tau_grid.clear();
  for (double tau : s.tau_grid) {
    point.tau = tau;
    out.push_back({tau, exact_distribution(point)});
  }
  return out;
}

/// start, start + step, ... up to and including stop (within half a step).
inline std::vector<double> tau_range(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start) {
    throw ScenarioError("tau range needs finite start <= stop and step > 0");
  }
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 0.5));
  for (long k = 0; k <= n; ++k) {
    grid.push_back(start + static_cast<double>(k) * step);
  }
  return grid;
}

} // namespace twoslit

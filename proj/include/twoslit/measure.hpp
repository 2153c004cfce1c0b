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
 * @file measure.hpp
 * Born-rule probabilities, projective collapse, sampling and collapse policies.
 */
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "expstates.hpp"
#include "random.hpp"

namespace twoslit {

/// Orthonormal, complete family of outcome vectors on one subsystem. The vectors
/// are expressed in the subsystem's basis labels, which are recorded so that a
/// ket in a different frame is rejected rather than misread.
class MeasurementBasis {
public:
  struct Outcome {
    std::string label;
    CVector vector;
  };

  MeasurementBasis(Subsystem subsystem, std::vector<Outcome> outcomes)
      : subsystem_(std::move(subsystem)), outcomes_(std::move(outcomes)) {
    const auto d = subsystem_.dim();
    if (outcomes_.size() != d) {
      throw LayoutError("measurement basis on '" + subsystem_.name + "' is incomplete");
    }
    std::unordered_set<std::string> labels;
    for (const auto &o : outcomes_) {
      if (static_cast<std::size_t>(o.vector.size()) != d) {
        throw LayoutError("outcome vector '" + o.label + "' has the wrong dimension");
      }
      if (!labels.insert(o.label).second) {
        throw LayoutError("duplicate outcome label '" + o.label + "'");
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const Complex g = outcomes_[i].vector.dot(outcomes_[j].vector);
        if (std::abs(g - Complex(i == j ? 1.0 : 0.0, 0.0)) > kStorageTol) {
          throw NumericError("measurement basis on '" + subsystem_.name + "' is not orthonormal");
        }
      }
    }
  }

  /// Builds a basis from single-subsystem kets sharing one layout.
  static MeasurementBasis from_family(const std::vector<LabeledKet> &family) {
    if (family.empty()) {
      throw LayoutError("empty measurement family");
    }
    const auto &layout = family.front().second.layout();
    if (layout.size() != 1) {
      throw LayoutError("measurement family must live on a single subsystem");
    }
    std::vector<Outcome> outcomes;
    for (const auto &[label, ket] : family) {
      detail::require_same_layout(layout, ket.layout(), "measurement family");
      outcomes.push_back({label, ket.amps()});
    }
    return MeasurementBasis(layout.subsystems().front(), std::move(outcomes));
  }

  [[nodiscard]] const std::string &subsystem() const { return subsystem_.name; }
  [[nodiscard]] const Subsystem &subsystem_frame() const { return subsystem_; }
  [[nodiscard]] const std::vector<Outcome> &outcomes() const { return outcomes_; }

  [[nodiscard]] const Outcome &outcome(std::string_view label) const {
    for (const auto &o : outcomes_) {
      if (o.label == label) {
        return o;
      }
    }
    throw LayoutError("basis on '" + subsystem_.name + "' has no outcome '" + std::string(label) + "'");
  }

  [[nodiscard]] std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto &o : outcomes_) {
      out.push_back(o.label);
    }
    return out;
  }

private:
  Subsystem subsystem_;
  std::vector<Outcome> outcomes_;
};

// -- named bases --------------------------------------------------------------

/// Screen outcomes A, B expressed in the particle frame `f`.
inline MeasurementBasis screen_basis(Frame f = Frame::PathLR) {
  const auto ab = particle_layout(Frame::ScreenAB);
  return MeasurementBasis::from_family({{"A", change_frame(Ket::basis(ab, {"A"}), f)},
                                        {"B", change_frame(Ket::basis(ab, {"B"}), f)}});
}

/// Path outcomes L, R expressed in the particle frame `f`.
inline MeasurementBasis which_path_basis(Frame f = Frame::PathLR) {
  const auto lr = particle_layout(Frame::PathLR);
  return MeasurementBasis::from_family({{"L", change_frame(Ket::basis(lr, {"L"}), f)},
                                        {"R", change_frame(Ket::basis(lr, {"R"}), f)}});
}

/// Pointer read-out: D0 plus the symmetric (Loewdin) orthonormalization of
/// D_L, D_R. For epsilon = 0 the outcomes DL, DR are exactly D_L, D_R.
inline MeasurementBasis pointer_readout_basis(const PointerModel &model) {
  const auto p = pointer_states(model);
  CMatrix v(3, 2);
  v.col(0) = p.left.amps();
  v.col(1) = p.right.amps();
  const CMatrix overlap = v.adjoint() * v;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(overlap);
  const CMatrix w = v * es.operatorInverseSqrt();
  const auto layout = detector_layout();
  return MeasurementBasis::from_family(
      {{"D0", p.ready}, {"DL", Ket(layout, w.col(0))}, {"DR", Ket(layout, w.col(1))}});
}

inline MeasurementBasis bomb_readout_basis() {
  return MeasurementBasis::from_family({{"NoExplosion", bomb_ready()}, {"Exploded", bomb_exploded()}});
}

inline MeasurementBasis idler_basis(IdlerBasis b) { return MeasurementBasis::from_family(idler_states(b)); }

// -- Born rule ----------------------------------------------------------------

struct LabeledProbability {
  std::string label;
  double probability;
};

namespace detail {

inline void require_basis_applies(const Ket &psi, const MeasurementBasis &basis) {
  const auto &sub = psi.layout().subsystem(basis.subsystem());
  if (sub.labels != basis.subsystem_frame().labels) {
    throw LayoutError("basis on '" + basis.subsystem() + "' is expressed in a different frame than the state");
  }
}

/// (<v| (x) 1) psi, i.e. the unnormalized conditional state of the other
/// subsystems, flattened in layout order with the measured factor removed.
inline CVector contract(const Ket &psi, std::size_t pos, const CVector &v) {
  const auto &layout = psi.layout();
  const std::size_t d = layout.subsystems()[pos].dim();
  const std::size_t stride = layout.stride(pos);
  const std::size_t rest = psi.dim() / d;
  CVector out = CVector::Zero(static_cast<Eigen::Index>(rest));
  for (std::size_t flat = 0; flat < psi.dim(); ++flat) {
    const std::size_t digit = (flat / stride) % d;
    const std::size_t high = flat / (stride * d);
    const std::size_t low = flat % stride;
    out(static_cast<Eigen::Index>(high * stride + low)) +=
        std::conj(v(static_cast<Eigen::Index>(digit))) * psi.amps()(static_cast<Eigen::Index>(flat));
  }
  return out;
}

} // namespace detail

/// Outcome probabilities in the basis' declared order.
inline std::vector<LabeledProbability> born_probabilities(const Ket &psi, const MeasurementBasis &basis) {
  detail::require_basis_applies(psi, basis);
  if (!psi.is_normalized()) {
    throw NumericError("born_probabilities requires a normalized state");
  }
  const auto pos = psi.layout().position(basis.subsystem());
  std::vector<LabeledProbability> out;
  double total = 0.0;
  for (const auto &o : basis.outcomes()) {
    const double p = detail::contract(psi, pos, o.vector).squaredNorm();
    out.push_back({o.label, p});
    total += p;
  }
  if (std::abs(total - 1.0) > kStorageTol) {
    throw NumericError("Born probabilities do not sum to 1");
  }
  return out;
}

inline double born_probability(const Ket &psi, const MeasurementBasis &basis, std::string_view label) {
  for (const auto &lp : born_probabilities(psi, basis)) {
    if (lp.label == label) {
      return lp.probability;
    }
  }
  throw LayoutError("unknown outcome '" + std::string(label) + "'");
}

/// Projects onto `outcome_label` and renormalizes.
inline Ket project_collapse(const Ket &psi, const MeasurementBasis &basis, std::string_view outcome_label) {
  detail::require_basis_applies(psi, basis);
  const auto &o = basis.outcome(outcome_label);
  const CMatrix projector = o.vector * o.vector.adjoint();
  Ket projected = apply(Operator::local(psi.layout(), basis.subsystem(), projector), psi);
  const double p = projected.norm_squared() / psi.norm_squared();
  if (!(p > kMinProjectProb)) {
    throw NumericError("cannot collapse onto zero-probability outcome '" + o.label + "'");
  }
  return projected.normalized();
}

/// Inverse-CDF choice over declared order: the first outcome with u < cumulative.
/// Outcomes with zero probability are never returned.
inline std::size_t select_outcome(const std::vector<LabeledProbability> &probs, double u) {
  double cumulative = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cumulative += probs[k].probability;
    if (probs[k].probability > 0.0 && u < cumulative) {
      return k;
    }
  }
  // Roundoff left u above the final cumulative sum.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k].probability > 0.0) {
      return k;
    }
  }
  throw NumericError("no outcome has positive probability");
}

struct SampleResult {
  std::string label;
  Ket state;
};

/// Samples with an explicit uniform draw u in [0, 1).
inline SampleResult sample_with_draw(const Ket &psi, const MeasurementBasis &basis, double u) {
  const auto probs = born_probabilities(psi, basis);
  const auto k = select_outcome(probs, u);
  return {probs[k].label, project_collapse(psi, basis, probs[k].label)};
}

inline SampleResult sample(const Ket &psi, const MeasurementBasis &basis, RandomStream &rng) {
  return sample_with_draw(psi, basis, rng.uniform());
}

// -- collapse policies --------------------------------------------------------

enum class PolicyKind { Unitary, CollapseAtDetector, Threshold };

struct CollapsePolicy {
  PolicyKind kind = PolicyKind::Unitary;
  /// Only meaningful for Threshold.
  double tau_star = std::numeric_limits<double>::infinity();

  static CollapsePolicy unitary() { return {}; }
  static CollapsePolicy collapse_at_detector() { return {PolicyKind::CollapseAtDetector}; }
  static CollapsePolicy threshold(double tau_star) { return {PolicyKind::Threshold, tau_star}; }

  void validate() const {
    if (kind == PolicyKind::Threshold && !(std::isfinite(tau_star) && tau_star >= 0.0)) {
      throw std::domain_error("threshold policy requires a finite tau_star >= 0");
    }
  }

  friend bool operator==(const CollapsePolicy &a, const CollapsePolicy &b) {
    return a.kind == b.kind && (a.kind != PolicyKind::Threshold || a.tau_star == b.tau_star);
  }
};

/// Where a policy is consulted: right after a detector-type channel, or at a
/// point in time (the screen hit).
enum class PolicyTrigger { DetectorChannel, Clock };

inline bool policy_fires(const CollapsePolicy &policy, PolicyTrigger trigger, double now, bool threshold_fired) {
  switch (policy.kind) {
  case PolicyKind::Unitary:
    return false;
  case PolicyKind::CollapseAtDetector:
    return trigger == PolicyTrigger::DetectorChannel;
  case PolicyKind::Threshold:
    return trigger == PolicyTrigger::Clock && !threshold_fired && now >= policy.tau_star;
  }
  return false;
}

struct PolicyStep {
  Ket state;
  /// Path label the state collapsed to, when the policy fired.
  std::optional<std::string> collapsed_to;
};

/// Collapses onto L or R (sampled with Born weights) when the policy fires,
/// otherwise returns the state unchanged.
inline PolicyStep apply_policy(const Ket &psi, double now, const CollapsePolicy &policy, PolicyTrigger trigger,
                               RandomStream &rng, bool threshold_fired = false) {
  policy.validate();
  if (!policy_fires(policy, trigger, now, threshold_fired)) {
    return {psi, std::nullopt};
  }
  auto drawn = sample(psi, which_path_basis(frame_of(psi.layout())), rng);
  return {std::move(drawn.state), std::move(drawn.label)};
}

struct EventRecord {
  std::string event_name;
  std::string outcome_label;
  double time = 0.0;

  friend bool operator==(const EventRecord &, const EventRecord &) = default;
};

/// Recorded measurement events of one trial plus any policy collapses, which
/// are kept apart so that they do not change the outcome key.
struct OutcomeRecord {
  std::vector<EventRecord> events;
  std::vector<EventRecord> collapses;

  [[nodiscard]] bool threshold_fired() const { return !collapses.empty(); }

  [[nodiscard]] const std::string &label_of(std::string_view event) const {
    for (const auto &e : events) {
      if (e.event_name == event) {
        return e.outcome_label;
      }
    }
    throw LayoutError("no event '" + std::string(event) + "' in record");
  }

  void push(EventRecord e) {
    if (!events.empty() && e.time < events.back().time) {
      throw std::logic_error("event times must be non-decreasing");
    }
    events.push_back(std::move(e));
  }
};

} // namespace twoslit

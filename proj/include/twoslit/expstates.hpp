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
 * @file expstates.hpp
 * Named states and bases of the two-outcome interference setups.
 *
 * The particle lives in a 2-dim subsystem "particle" that is expressed either
 * in the path frame (labels L, R) or the screen frame (labels A, B), related by
 *
 *     |L> = (|A> - |B>)/sqrt2,   |R> = (|A> + |B>)/sqrt2.
 *
 * Macroscopic partners (detector, bomb, environment) are kept in the smallest
 * Hilbert space that reproduces their inner products.
 */
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qcore.hpp"

namespace twoslit {

inline const std::string kParticle = "particle";
inline const std::string kDetector = "detector";
inline const std::string kBomb = "bomb";
inline const std::string kIdler = "idler";
inline const std::string kEnv = "env";

enum class Frame { PathLR, ScreenAB };

enum class SlitConfig { OnlyLeft, OnlyRight, BothSlits };

enum class BombKind { Real, Dud };

enum class IdlerBasis { WhichPath, PlusMinus };

using LabeledKet = std::pair<std::string, Ket>;

inline std::vector<std::string> frame_labels(Frame f) {
  return f == Frame::PathLR ? std::vector<std::string>{"L", "R"} : std::vector<std::string>{"A", "B"};
}

inline SubsystemLayout particle_layout(Frame f = Frame::PathLR) {
  return SubsystemLayout::single(kParticle, frame_labels(f));
}

/// Frame of the particle subsystem in `layout`.
inline Frame frame_of(const SubsystemLayout &layout) {
  const auto &labels = layout.subsystem(kParticle).labels;
  if (labels == frame_labels(Frame::PathLR)) {
    return Frame::PathLR;
  }
  if (labels == frame_labels(Frame::ScreenAB)) {
    return Frame::ScreenAB;
  }
  throw LayoutError("particle subsystem is in neither the L/R nor the A/B frame");
}

/// Amplitudes in the screen frame from amplitudes in the path frame.
inline CMatrix path_to_screen_matrix() {
  CMatrix m(2, 2);
  m << kInvSqrt2, kInvSqrt2, -kInvSqrt2, kInvSqrt2;
  return m;
}

inline CMatrix screen_to_path_matrix() { return path_to_screen_matrix().adjoint(); }

inline Ket particle_state(SlitConfig which, Frame frame = Frame::PathLR) {
  CVector v(2);
  switch (which) {
  case SlitConfig::OnlyLeft:
    v << 1.0, 0.0;
    break;
  case SlitConfig::OnlyRight:
    v << 0.0, 1.0;
    break;
  case SlitConfig::BothSlits:
    v << kInvSqrt2, kInvSqrt2;
    break;
  }
  if (frame == Frame::ScreenAB) {
    v = path_to_screen_matrix() * v;
  }
  return Ket(particle_layout(frame), std::move(v));
}

/// Re-expresses the particle factor of `psi` in `to`. Other subsystems are untouched.
inline Ket change_frame(const Ket &psi, Frame to) {
  const Frame from = frame_of(psi.layout());
  if (from == to) {
    return psi;
  }
  const CMatrix local = to == Frame::ScreenAB ? path_to_screen_matrix() : screen_to_path_matrix();
  Operator u = Operator::local(psi.layout(), kParticle, local, true);
  Ket moved = apply(u, psi);
  return Ket(psi.layout().relabel(kParticle, frame_labels(to)), moved.amps());
}

inline DensityOperator change_frame(const DensityOperator &rho, Frame to) {
  const Frame from = frame_of(rho.layout());
  if (from == to) {
    return rho;
  }
  const CMatrix local = to == Frame::ScreenAB ? path_to_screen_matrix() : screen_to_path_matrix();
  DensityOperator moved = conjugate(Operator::local(rho.layout(), kParticle, local, true), rho);
  return DensityOperator(rho.layout().relabel(kParticle, frame_labels(to)), moved.matrix());
}

// -- detector pointer ---------------------------------------------------------

/// Effective overlap <D_L|D_R> of the two macroscopic pointer states.
struct PointerModel {
  double epsilon = 0.0;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
      throw std::domain_error("pointer overlap epsilon must lie in [0, 1)");
    }
  }
};

/// Pointer space basis: D0 is the ready state, DL the left pointer, and DR the
/// direction of D_R orthogonal to D_L (equal to D_R when epsilon = 0).
inline SubsystemLayout detector_layout() {
  return SubsystemLayout::single(kDetector, {"D0", "DL", "DR"});
}

struct PointerStates {
  Ket ready;
  Ket left;
  Ket right;
};

inline PointerStates pointer_states(const PointerModel &model) {
  model.validate();
  const auto layout = detector_layout();
  CVector right(3);
  right << 0.0, model.epsilon, std::sqrt(1.0 - model.epsilon * model.epsilon);
  return {Ket::basis(layout, {"D0"}), Ket::basis(layout, {"DL"}), Ket(layout, std::move(right))};
}

/// Per-atom overlap raised to the number of atoms, kept in log10 form.
struct OverlapEstimate {
  double lambda_atom;
  double n_atoms;
  double log10_overlap;
};

inline OverlapEstimate overlap_estimate(double lambda_atom, double n_atoms) {
  if (!(lambda_atom > 0.0 && lambda_atom <= 1.0)) {
    throw std::domain_error("per-atom overlap must lie in (0, 1]");
  }
  if (!(n_atoms >= 1.0) || !std::isfinite(n_atoms)) {
    throw std::domain_error("number of atoms must be finite and >= 1");
  }
  return {lambda_atom, n_atoms, n_atoms * std::log10(lambda_atom)};
}

// -- bomb ---------------------------------------------------------------------

/// B0 is the unexploded bomb, BE the exploded one. A dud is B0 and never leaves it.
inline SubsystemLayout bomb_layout() { return SubsystemLayout::single(kBomb, {"B0", "BE"}); }

inline Ket bomb_ready() { return Ket::basis(bomb_layout(), {"B0"}); }
inline Ket bomb_exploded() { return Ket::basis(bomb_layout(), {"BE"}); }

// -- idler --------------------------------------------------------------------

inline SubsystemLayout idler_layout() { return SubsystemLayout::single(kIdler, {"IL", "IR"}); }

/// WhichPath: {IL, IR}. PlusMinus: I+ = (IR + IL)/sqrt2, I- = (IR - IL)/sqrt2.
inline std::vector<LabeledKet> idler_states(IdlerBasis basis) {
  const auto layout = idler_layout();
  const Ket il = Ket::basis(layout, {"IL"});
  const Ket ir = Ket::basis(layout, {"IR"});
  if (basis == IdlerBasis::WhichPath) {
    return {{"IL", il}, {"IR", ir}};
  }
  return {{"I+", kInvSqrt2 * (ir + il)}, {"I-", kInvSqrt2 * (ir - il)}};
}

// -- environments -------------------------------------------------------------

/// Two-dimensional effective environment: E0 is the initial state (and E_L),
/// E1 the complement direction of E_R.
inline SubsystemLayout effective_env_layout() { return SubsystemLayout::single(kEnv, {"E0", "E1"}); }

/// Rotating idler space spanned by I1, I2.
inline SubsystemLayout rotating_idler_layout() { return SubsystemLayout::single(kIdler, {"I1", "I2"}); }

inline SubsystemLayout finite_env_layout(std::size_t dim) {
  if (dim == 0) {
    throw LayoutError("environment dimension must be >= 1");
  }
  std::vector<std::string> labels;
  labels.reserve(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    labels.push_back("e" + std::to_string(k));
  }
  return SubsystemLayout::single(kEnv, std::move(labels));
}

} // namespace twoslit

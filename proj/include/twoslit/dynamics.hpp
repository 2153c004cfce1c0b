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
 * @file dynamics.hpp
 * Entangling and decohering channels acting on the particle path.
 *
 * Every channel maps a|L> + b|R> (times a ready state of the partner) to
 * a|L>|X_L> + b|R>|X_R>. The channels are isometries on their input sectors;
 * inputs outside the sector are rejected.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "expstates.hpp"

namespace twoslit {

namespace detail {

/// (alpha, beta) path amplitudes of the particle factor of a product state
/// whose partner is in `ready`, or throws if `psi` leaves that sector.
inline std::pair<Complex, Complex> path_amplitudes_in_sector(const Ket &psi, const std::string &partner,
                                                             const std::string &ready, const char *what) {
  const Ket lr = change_frame(psi, Frame::PathLR);
  const auto &layout = lr.layout();
  if (layout.size() != 2 || layout.subsystems()[0].name != kParticle || layout.subsystems()[1].name != partner) {
    throw LayoutError(std::string(what) + ": expected layout particle (x) " + partner);
  }
  const auto &partner_labels = layout.subsystems()[1].labels;
  for (const auto &label : partner_labels) {
    if (label == ready) {
      continue;
    }
    if (std::abs(lr.amp({"L", label})) > kStorageTol || std::abs(lr.amp({"R", label})) > kStorageTol) {
      throw LayoutError(std::string(what) + ": input is not in the " + ready + " sector");
    }
  }
  return {lr.amp({"L", ready}), lr.amp({"R", ready})};
}

/// alpha |L>|x_left> + beta |R>|x_right>, returned in `frame`.
inline Ket branch_state(Complex alpha, const Ket &x_left, Complex beta, const Ket &x_right, Frame frame) {
  const auto l = Ket::basis(particle_layout(), {"L"});
  const auto r = Ket::basis(particle_layout(), {"R"});
  return change_frame(alpha * tensor(l, x_left) + beta * tensor(r, x_right), frame);
}

inline std::pair<Complex, Complex> particle_amplitudes(const Ket &particle, const char *what) {
  if (particle.layout().size() != 1) {
    throw LayoutError(std::string(what) + ": expected a particle-only ket");
  }
  const Ket lr = change_frame(particle, Frame::PathLR);
  return {lr.amps()(0), lr.amps()(1)};
}

} // namespace detail

// -- instantaneous couplings --------------------------------------------------

/// (a|L> + b|R>)|D0>  ->  a|L>|D_L> + b|R>|D_R>.
inline Ket entangle_which_path(const Ket &particle_and_ready, const PointerModel &model) {
  const auto pointers = pointer_states(model);
  const auto [alpha, beta] =
      detail::path_amplitudes_in_sector(particle_and_ready, kDetector, "D0", "entangle_which_path");
  return detail::branch_state(alpha, pointers.left, beta, pointers.right, frame_of(particle_and_ready.layout()));
}

/// Real bomb: |L>|B0> -> |L>|BE>, |R>|B0> -> |R>|B0>. Dud: identity.
inline Ket bomb_channel(const Ket &particle_and_bomb, BombKind kind) {
  const auto [alpha, beta] = detail::path_amplitudes_in_sector(particle_and_bomb, kBomb, "B0", "bomb_channel");
  if (kind == BombKind::Dud) {
    return particle_and_bomb;
  }
  return detail::branch_state(alpha, bomb_exploded(), beta, bomb_ready(), frame_of(particle_and_bomb.layout()));
}

/// a|L> + b|R>  ->  a|L>|I_L> + b|R>|I_R>.
inline Ket emit_idler(const Ket &particle) {
  const auto [alpha, beta] = detail::particle_amplitudes(particle, "emit_idler");
  const auto idlers = idler_states(IdlerBasis::WhichPath);
  return detail::branch_state(alpha, idlers[0].second, beta, idlers[1].second, frame_of(particle.layout()));
}

// -- time-dependent environments ----------------------------------------------

/// Exponential decay c(t) = exp(-rate t) of the branch overlap <E_L(t)|E_R(t)>.
struct DecoherenceLaw {
  double lambda_rate = 1.0;

  void validate() const {
    if (!(lambda_rate >= 0.0) || !std::isfinite(lambda_rate)) {
      throw std::domain_error("decoherence rate must be finite and >= 0");
    }
  }

  [[nodiscard]] double overlap(double t) const { return std::exp(-lambda_rate * t); }
};

/// E_R(t) rotates by omega t away from E_L = I1, so <E_L|E_R> = cos(omega t).
struct RotatingIdlerLaw {
  double omega = 1.0;

  void validate() const {
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
      throw std::domain_error("angular frequency must be finite and >= 0");
    }
  }

  [[nodiscard]] double overlap(double t) const { return std::cos(omega * t); }
};

inline void require_time(double t, const char *what) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::domain_error(std::string(what) + ": time must be finite and >= 0");
  }
}

/// (|L>|E_L(t)> + |R>|E_R(t)>)/sqrt2 with E_L = (1, 0) and E_R = (c, sqrt(1 - c^2)).
/// The single complement direction carries the whole orthogonal weight.
inline Ket monitor_environment(double t, const DecoherenceLaw &law) {
  require_time(t, "monitor_environment");
  law.validate();
  const double c = law.overlap(t);
  const auto layout = effective_env_layout();
  CVector er(2);
  er << c, std::sqrt(std::max(0.0, 1.0 - c * c));
  return detail::branch_state(kInvSqrt2, Ket::basis(layout, {"E0"}), kInvSqrt2, Ket(layout, std::move(er)),
                              Frame::PathLR);
}

inline Ket rotate_idler(double t, const RotatingIdlerLaw &law) {
  require_time(t, "rotate_idler");
  law.validate();
  const auto layout = rotating_idler_layout();
  CVector er(2);
  er << std::cos(law.omega * t), std::sin(law.omega * t);
  return detail::branch_state(kInvSqrt2, Ket::basis(layout, {"I1"}), kInvSqrt2, Ket(layout, std::move(er)),
                              Frame::PathLR);
}

// -- finite environments ------------------------------------------------------

/// Full Hamiltonian |L><L| (x) H_L + |R><R| (x) H_R; it never mixes L and R.
class BlockHamiltonian {
public:
  BlockHamiltonian(CMatrix h_left, CMatrix h_right, Ket env_initial)
      : h_left_(std::move(h_left)), h_right_(std::move(h_right)), env_initial_(std::move(env_initial)),
        spectrum_left_(h_left_), spectrum_right_(h_right_) {
    const auto d = static_cast<Eigen::Index>(env_initial_.dim());
    if (env_initial_.layout().size() != 1 || h_left_.rows() != d || h_right_.rows() != d) {
      throw LayoutError("block Hamiltonian dimensions do not match the environment state");
    }
    if (!env_initial_.is_normalized()) {
      throw NumericError("environment initial state must be normalized");
    }
  }

  [[nodiscard]] std::size_t dim_env() const { return env_initial_.dim(); }
  [[nodiscard]] const CMatrix &h_left() const { return h_left_; }
  [[nodiscard]] const CMatrix &h_right() const { return h_right_; }
  [[nodiscard]] const Ket &env_initial() const { return env_initial_; }
  [[nodiscard]] const SubsystemLayout &env_layout() const { return env_initial_.layout(); }

  [[nodiscard]] Operator left_operator() const { return Operator(env_layout(), h_left_); }
  [[nodiscard]] Operator right_operator() const { return Operator(env_layout(), h_right_); }

  [[nodiscard]] Operator full() const {
    const auto d = static_cast<Eigen::Index>(dim_env());
    CMatrix h = CMatrix::Zero(2 * d, 2 * d);
    h.topLeftCorner(d, d) = h_left_;
    h.bottomRightCorner(d, d) = h_right_;
    return Operator(particle_layout().concat(env_layout()), std::move(h));
  }

  /// E_L(t) = exp(-i H_L t) E0.
  [[nodiscard]] Ket left_branch(double t) const {
    return Ket(env_layout(), spectrum_left_.evolve(env_initial_.amps(), t));
  }
  /// E_R(t) = exp(-i H_R t) E0.
  [[nodiscard]] Ket right_branch(double t) const {
    return Ket(env_layout(), spectrum_right_.evolve(env_initial_.amps(), t));
  }

private:
  CMatrix h_left_;
  CMatrix h_right_;
  Ket env_initial_;
  HermitianSpectrum spectrum_left_;
  HermitianSpectrum spectrum_right_;
};

/// Exact branch overlap <E_L(t)|E_R(t)> = <E0| e^{+i H_L t} e^{-i H_R t} |E0>.
inline Complex finite_env_overlap(const BlockHamiltonian &bh, double t) {
  const Ket left = evolve_hermitian(bh.left_operator(), t, bh.env_initial());
  const Ket right = evolve_hermitian(bh.right_operator(), t, bh.env_initial());
  return inner(left, right);
}

/// <E0| e^{-i (H_R - H_L) t} |E0>. Equals finite_env_overlap only when H_L and
/// H_R commute.
inline Complex commuting_form_overlap(const BlockHamiltonian &bh, double t) {
  const Operator diff(bh.env_layout(), bh.h_right() - bh.h_left());
  return inner(bh.env_initial(), evolve_hermitian(diff, t, bh.env_initial()));
}

/// exp(-i H t) (|L> + |R>)/sqrt2 (x) |E0> over particle (x) env.
inline Ket finite_env_state(const BlockHamiltonian &bh, double t) {
  const Ket start = tensor(particle_state(SlitConfig::BothSlits), bh.env_initial());
  return evolve_hermitian(bh.full(), t, start);
}

/// Random GUE-style blocks (A + A^dagger)/2 with standard normal entries, E0 = e0.
inline BlockHamiltonian random_block_hamiltonian(std::size_t dim, std::uint64_t seed) {
  const auto layout = finite_env_layout(dim);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  auto draw = [&] {
    CMatrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double re = normal(engine);
        const double im = normal(engine);
        a(i, j) = Complex(re, im);
      }
    }
    return CMatrix(0.5 * (a + a.adjoint()));
  };
  CMatrix h_left = draw();
  CMatrix h_right = draw();
  return BlockHamiltonian(std::move(h_left), std::move(h_right), Ket::basis(layout, {"e0"}));
}

/// H_L = 0, H_R = omega (|I1><I2| + |I2><I1|), E0 = I1; the overlap is cos(omega t).
inline BlockHamiltonian rotating_idler_hamiltonian(double omega) {
  CMatrix h_right(2, 2);
  h_right << 0.0, omega, omega, 0.0;
  return BlockHamiltonian(CMatrix::Zero(2, 2), std::move(h_right), Ket::basis(rotating_idler_layout(), {"I1"}));
}

} // namespace twoslit

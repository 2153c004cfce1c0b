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
 * @file qcore.hpp
 * Dense complex linear algebra on small labeled tensor-product spaces.
 *
 * A SubsystemLayout is an ordered list of named subsystems, each with an
 * ordered list of basis labels. Flat indices are row-major over the
 * subsystems in layout order, so the last subsystem varies fastest.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace twoslit {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Storage invariants: norm, trace, Hermiticity of returned values.
inline constexpr double kStorageTol = 1e-12;
/// Unitarity of flagged operators and Hermiticity of Hamiltonians.
inline constexpr double kUnitaryTol = 1e-10;
/// Composition of evolutions.
inline constexpr double kComposeTol = 1e-9;
/// Norm drift of a unitary step that is reported as an error.
inline constexpr double kDriftTol = 1e-8;
/// Smallest eigenvalue accepted for a density operator.
inline constexpr double kPositivityTol = 1e-10;
/// Outcomes with probability at or below this cannot be projected onto.
inline constexpr double kMinProjectProb = 1e-15;

inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

/// Thrown when a precondition on layouts, labels or arguments fails.
class LayoutError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical invariant (unitarity, Hermiticity, norm) fails.
class NumericError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

struct Subsystem {
  std::string name;
  std::vector<std::string> labels;

  [[nodiscard]] std::size_t dim() const { return labels.size(); }

  [[nodiscard]] std::size_t label_index(std::string_view label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw LayoutError("subsystem '" + name + "' has no label '" + std::string(label) + "'");
    }
    return static_cast<std::size_t>(it - labels.begin());
  }

  friend bool operator==(const Subsystem &, const Subsystem &) = default;
};

class SubsystemLayout {
public:
  SubsystemLayout() = default;

  explicit SubsystemLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    std::unordered_set<std::string> names;
    for (const auto &s : subsystems_) {
      if (s.labels.empty()) {
        throw LayoutError("subsystem '" + s.name + "' must have dimension >= 1");
      }
      if (!names.insert(s.name).second) {
        throw LayoutError("duplicate subsystem name '" + s.name + "'");
      }
      std::unordered_set<std::string> seen(s.labels.begin(), s.labels.end());
      if (seen.size() != s.labels.size()) {
        throw LayoutError("duplicate basis label in subsystem '" + s.name + "'");
      }
    }
  }

  static SubsystemLayout single(std::string name, std::vector<std::string> labels) {
    return SubsystemLayout({Subsystem{std::move(name), std::move(labels)}});
  }

  [[nodiscard]] const std::vector<Subsystem> &subsystems() const { return subsystems_; }
  [[nodiscard]] std::size_t size() const { return subsystems_.size(); }

  [[nodiscard]] std::size_t total_dim() const {
    std::size_t d = 1;
    for (const auto &s : subsystems_) {
      d *= s.dim();
    }
    return d;
  }

  [[nodiscard]] bool contains(std::string_view name) const {
    return std::any_of(subsystems_.begin(), subsystems_.end(),
                       [&](const Subsystem &s) { return s.name == name; });
  }

  [[nodiscard]] std::size_t position(std::string_view name) const {
    for (std::size_t k = 0; k < subsystems_.size(); ++k) {
      if (subsystems_[k].name == name) {
        return k;
      }
    }
    throw LayoutError("unknown subsystem '" + std::string(name) + "'");
  }

  [[nodiscard]] const Subsystem &subsystem(std::string_view name) const {
    return subsystems_[position(name)];
  }

  /// Number of flat indices spanned by one step of subsystem `pos`.
  [[nodiscard]] std::size_t stride(std::size_t pos) const {
    std::size_t s = 1;
    for (std::size_t k = pos + 1; k < subsystems_.size(); ++k) {
      s *= subsystems_[k].dim();
    }
    return s;
  }

  [[nodiscard]] std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> digits(subsystems_.size());
    for (std::size_t k = subsystems_.size(); k-- > 0;) {
      digits[k] = flat % subsystems_[k].dim();
      flat /= subsystems_[k].dim();
    }
    return digits;
  }

  [[nodiscard]] std::size_t flatten(const std::vector<std::size_t> &digits) const {
    if (digits.size() != subsystems_.size()) {
      throw LayoutError("index tuple has wrong arity");
    }
    std::size_t flat = 0;
    for (std::size_t k = 0; k < subsystems_.size(); ++k) {
      if (digits[k] >= subsystems_[k].dim()) {
        throw LayoutError("index out of range for subsystem '" + subsystems_[k].name + "'");
      }
      flat = flat * subsystems_[k].dim() + digits[k];
    }
    return flat;
  }

  /// Flat index of a tuple of labels given in layout order.
  [[nodiscard]] std::size_t index_of(const std::vector<std::string> &labels) const {
    if (labels.size() != subsystems_.size()) {
      throw LayoutError("label tuple has wrong arity");
    }
    std::vector<std::size_t> digits(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
      digits[k] = subsystems_[k].label_index(labels[k]);
    }
    return flatten(digits);
  }

  [[nodiscard]] std::vector<std::string> labels_of(std::size_t flat) const {
    auto digits = unflatten(flat);
    std::vector<std::string> out(digits.size());
    for (std::size_t k = 0; k < digits.size(); ++k) {
      out[k] = subsystems_[k].labels[digits[k]];
    }
    return out;
  }

  [[nodiscard]] SubsystemLayout concat(const SubsystemLayout &other) const {
    std::vector<Subsystem> all = subsystems_;
    for (const auto &s : other.subsystems_) {
      if (contains(s.name)) {
        throw LayoutError("subsystem name collision: '" + s.name + "'");
      }
      all.push_back(s);
    }
    return SubsystemLayout(std::move(all));
  }

  /// Layout restricted to `keep`, in original layout order.
  [[nodiscard]] SubsystemLayout restrict_to(const std::vector<std::string> &keep) const {
    for (const auto &name : keep) {
      (void)position(name);
    }
    std::vector<Subsystem> kept;
    for (const auto &s : subsystems_) {
      if (std::find(keep.begin(), keep.end(), s.name) != keep.end()) {
        kept.push_back(s);
      }
    }
    return SubsystemLayout(std::move(kept));
  }

  /// Same layout with one subsystem's labels replaced (a basis relabelling).
  [[nodiscard]] SubsystemLayout relabel(std::string_view name, std::vector<std::string> labels) const {
    auto subs = subsystems_;
    auto &s = subs[position(name)];
    if (labels.size() != s.dim()) {
      throw LayoutError("relabel must preserve the dimension of '" + s.name + "'");
    }
    s.labels = std::move(labels);
    return SubsystemLayout(std::move(subs));
  }

  friend bool operator==(const SubsystemLayout &, const SubsystemLayout &) = default;

private:
  std::vector<Subsystem> subsystems_;
};

namespace detail {

inline void require_finite(const CVector &v) {
  if (!v.allFinite()) {
    throw NumericError("non-finite amplitude");
  }
}

inline void require_same_layout(const SubsystemLayout &a, const SubsystemLayout &b, const char *what) {
  if (!(a == b)) {
    throw LayoutError(std::string(what) + ": layout mismatch");
  }
}

inline double max_abs(const CMatrix &m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const CMatrix &m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

/// Kronecker product, first factor major.
inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

} // namespace detail

/// State vector over a labeled basis. Public operations return unit-norm kets;
/// unnormalized intermediates are allowed but must be finite.
class Ket {
public:
  Ket(SubsystemLayout layout, CVector amps) : layout_(std::move(layout)), amps_(std::move(amps)) {
    if (static_cast<std::size_t>(amps_.size()) != layout_.total_dim()) {
      throw LayoutError("amplitude vector length does not match layout dimension");
    }
    detail::require_finite(amps_);
  }

  /// Unit vector on the basis element named by `labels` (layout order).
  static Ket basis(SubsystemLayout layout, const std::vector<std::string> &labels) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    v(static_cast<Eigen::Index>(layout.index_of(labels))) = 1.0;
    return Ket(std::move(layout), std::move(v));
  }

  [[nodiscard]] const SubsystemLayout &layout() const { return layout_; }
  [[nodiscard]] const CVector &amps() const { return amps_; }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

  [[nodiscard]] Complex amp(const std::vector<std::string> &labels) const {
    return amps_(static_cast<Eigen::Index>(layout_.index_of(labels)));
  }

  [[nodiscard]] double norm_squared() const { return amps_.squaredNorm(); }
  [[nodiscard]] double norm() const { return amps_.norm(); }

  [[nodiscard]] Ket normalized() const {
    const double n = norm();
    if (n <= 0.0) {
      throw NumericError("cannot normalize the zero vector");
    }
    return Ket(layout_, amps_ / n);
  }

  [[nodiscard]] bool is_normalized(double tol = kStorageTol) const {
    return std::abs(norm_squared() - 1.0) <= tol;
  }

  friend Ket operator+(const Ket &a, const Ket &b) {
    detail::require_same_layout(a.layout_, b.layout_, "ket sum");
    return Ket(a.layout_, a.amps_ + b.amps_);
  }
  friend Ket operator-(const Ket &a, const Ket &b) {
    detail::require_same_layout(a.layout_, b.layout_, "ket difference");
    return Ket(a.layout_, a.amps_ - b.amps_);
  }
  friend Ket operator*(Complex s, const Ket &k) { return Ket(k.layout_, s * k.amps_); }
  friend Ket operator*(double s, const Ket &k) { return Ket(k.layout_, s * k.amps_); }

private:
  SubsystemLayout layout_;
  CVector amps_;
};

/// Square matrix over a layout. When flagged unitary, U^dagger U = I is checked
/// on construction.
class Operator {
public:
  Operator(SubsystemLayout layout, CMatrix matrix, bool unitary = false)
      : layout_(std::move(layout)), matrix_(std::move(matrix)), unitary_(unitary) {
    const auto d = static_cast<Eigen::Index>(layout_.total_dim());
    if (matrix_.rows() != d || matrix_.cols() != d) {
      throw LayoutError("operator matrix does not match layout dimension");
    }
    if (!matrix_.allFinite()) {
      throw NumericError("non-finite operator entry");
    }
    if (unitary_) {
      const CMatrix gram = matrix_.adjoint() * matrix_;
      if (detail::max_abs(gram - CMatrix::Identity(d, d)) > kUnitaryTol) {
        throw NumericError("operator flagged unitary is not unitary");
      }
    }
  }

  static Operator identity(SubsystemLayout layout) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return Operator(std::move(layout), CMatrix::Identity(d, d), true);
  }

  /// Embeds `local` acting on subsystem `name` as 1 (x) ... (x) local (x) ... (x) 1.
  static Operator local(const SubsystemLayout &layout, std::string_view name, const CMatrix &local,
                        bool unitary = false) {
    const auto pos = layout.position(name);
    const auto &target = layout.subsystems()[pos];
    if (static_cast<std::size_t>(local.rows()) != target.dim() ||
        static_cast<std::size_t>(local.cols()) != target.dim()) {
      throw LayoutError("local operator dimension does not match subsystem '" + target.name + "'");
    }
    CMatrix full = CMatrix::Identity(1, 1);
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const auto dk = static_cast<Eigen::Index>(layout.subsystems()[k].dim());
      full = detail::kron(full, k == pos ? local : CMatrix::Identity(dk, dk));
    }
    return Operator(layout, std::move(full), unitary);
  }

  [[nodiscard]] const SubsystemLayout &layout() const { return layout_; }
  [[nodiscard]] const CMatrix &matrix() const { return matrix_; }
  [[nodiscard]] bool is_unitary() const { return unitary_; }
  [[nodiscard]] bool is_hermitian(double tol = kUnitaryTol) const {
    return detail::is_hermitian(matrix_, tol);
  }

private:
  SubsystemLayout layout_;
  CMatrix matrix_;
  bool unitary_;
};

/// Hermitian, unit-trace, positive semidefinite matrix over a layout.
class DensityOperator {
public:
  DensityOperator(SubsystemLayout layout, CMatrix matrix)
      : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto d = static_cast<Eigen::Index>(layout_.total_dim());
    if (matrix_.rows() != d || matrix_.cols() != d) {
      throw LayoutError("density matrix does not match layout dimension");
    }
    if (!matrix_.allFinite()) {
      throw NumericError("non-finite density matrix entry");
    }
    if (!detail::is_hermitian(matrix_, kStorageTol)) {
      throw NumericError("density matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0, 0.0)) > kStorageTol) {
      throw NumericError("density matrix trace differs from 1");
    }
    if (min_eigenvalue() < -kPositivityTol) {
      throw NumericError("density matrix has a negative eigenvalue");
    }
  }

  static DensityOperator pure(const Ket &psi) {
    if (!psi.is_normalized()) {
      throw NumericError("pure-state density operator requires a normalized ket");
    }
    return DensityOperator(psi.layout(), psi.amps() * psi.amps().adjoint());
  }

  [[nodiscard]] const SubsystemLayout &layout() const { return layout_; }
  [[nodiscard]] const CMatrix &matrix() const { return matrix_; }

  [[nodiscard]] Complex at(std::string_view row, std::string_view col) const {
    if (layout_.size() != 1) {
      throw LayoutError("label access requires a single-subsystem density operator");
    }
    const auto &s = layout_.subsystems().front();
    return matrix_(static_cast<Eigen::Index>(s.label_index(row)),
                   static_cast<Eigen::Index>(s.label_index(col)));
  }

  [[nodiscard]] Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  [[nodiscard]] double min_eigenvalue() const { return eigenvalues().minCoeff(); }

  [[nodiscard]] double purity() const { return (matrix_ * matrix_).trace().real(); }

private:
  SubsystemLayout layout_;
  CMatrix matrix_;
};

/// a (x) b over the concatenated layout; amplitude of (i, j) is a_i * b_j.
inline Ket tensor(const Ket &a, const Ket &b) {
  auto layout = a.layout().concat(b.layout());
  CVector v(static_cast<Eigen::Index>(layout.total_dim()));
  const auto nb = static_cast<Eigen::Index>(b.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    v.segment(i * nb, nb) = a.amps()(i) * b.amps();
  }
  return Ket(std::move(layout), std::move(v));
}

/// <a|b>, antilinear in the first argument.
inline Complex inner(const Ket &a, const Ket &b) {
  detail::require_same_layout(a.layout(), b.layout(), "inner");
  return a.amps().dot(b.amps());
}

/// Reduced density operator over the subsystems named in `keep` (kept in
/// layout order).
inline DensityOperator partial_trace(const DensityOperator &rho, const std::vector<std::string> &keep) {
  if (keep.empty()) {
    throw LayoutError("partial_trace: keep list must be nonempty");
  }
  const auto &layout = rho.layout();
  auto reduced = layout.restrict_to(keep);
  std::vector<bool> kept(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    kept[k] = reduced.contains(layout.subsystems()[k].name);
  }

  const std::size_t n = layout.total_dim();
  std::vector<std::size_t> kept_index(n);
  std::vector<std::size_t> traced_index(n);
  for (std::size_t flat = 0; flat < n; ++flat) {
    const auto digits = layout.unflatten(flat);
    std::size_t ki = 0;
    std::size_t ti = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) {
      const auto dk = layout.subsystems()[k].dim();
      if (kept[k]) {
        ki = ki * dk + digits[k];
      } else {
        ti = ti * dk + digits[k];
      }
    }
    kept_index[flat] = ki;
    traced_index[flat] = ti;
  }

  const auto m = static_cast<Eigen::Index>(reduced.total_dim());
  CMatrix out = CMatrix::Zero(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (traced_index[i] == traced_index[j]) {
        out(static_cast<Eigen::Index>(kept_index[i]), static_cast<Eigen::Index>(kept_index[j])) +=
            rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  // Symmetrize away roundoff asymmetry from the accumulation order.
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator(std::move(reduced), std::move(out));
}

/// U rho U^dagger for a unitary U over the same layout.
inline DensityOperator conjugate(const Operator &u, const DensityOperator &rho) {
  detail::require_same_layout(u.layout(), rho.layout(), "conjugate");
  if (!u.is_unitary()) {
    throw NumericError("conjugate requires a unitary-flagged operator");
  }
  CMatrix m = u.matrix() * rho.matrix() * u.matrix().adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityOperator(rho.layout(), std::move(m));
}

/// Matrix-vector product. A unitary-flagged operator whose output norm drifts
/// from the input norm by more than kDriftTol is reported, not renormalized.
inline Ket apply(const Operator &u, const Ket &psi) {
  detail::require_same_layout(u.layout(), psi.layout(), "apply");
  Ket out(psi.layout(), u.matrix() * psi.amps());
  if (u.is_unitary() && std::abs(out.norm() - psi.norm()) > kDriftTol) {
    throw NumericError("unitary step drifted in norm");
  }
  return out;
}

/// Spectral data of a Hermitian matrix, cached for repeated exponentiation.
class HermitianSpectrum {
public:
  explicit HermitianSpectrum(const CMatrix &h) {
    if (!detail::is_hermitian(h, kUnitaryTol)) {
      throw NumericError("matrix is not Hermitian");
    }
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    if (es.info() != Eigen::Success) {
      throw NumericError("Hermitian eigendecomposition failed");
    }
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  [[nodiscard]] const Eigen::VectorXd &values() const { return values_; }
  [[nodiscard]] const CMatrix &vectors() const { return vectors_; }

  /// exp(-i H t) as a dense matrix.
  [[nodiscard]] CMatrix propagator(double t) const {
    CVector phases(values_.size());
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
      phases(k) = std::exp(Complex(0.0, -values_(k) * t));
    }
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

  /// exp(-i H t) v without forming the propagator.
  [[nodiscard]] CVector evolve(const CVector &v, double t) const {
    CVector coeffs = vectors_.adjoint() * v;
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
      coeffs(k) *= std::exp(Complex(0.0, -values_(k) * t));
    }
    return vectors_ * coeffs;
  }

private:
  Eigen::VectorXd values_;
  CMatrix vectors_;
};

/// exp(-i H t)|psi> via the eigendecomposition of H.
inline Ket evolve_hermitian(const Operator &h, double t, const Ket &psi) {
  detail::require_same_layout(h.layout(), psi.layout(), "evolve_hermitian");
  if (!std::isfinite(t)) {
    throw NumericError("evolution time must be finite");
  }
  HermitianSpectrum spec(h.matrix());
  Ket out(psi.layout(), spec.evolve(psi.amps(), t));
  if (std::abs(out.norm() - psi.norm()) > kDriftTol) {
    throw NumericError("Hermitian evolution drifted in norm");
  }
  return out;
}

} // namespace twoslit

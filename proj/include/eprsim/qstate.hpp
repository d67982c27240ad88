// Copyright 2026 The eprsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact state algebra for systems of up to three two-level particles:
// construction, tensor composition, projective measurement, unitaries and
// fidelities, for both pure states and small density matrices.
//
// Basis convention, used everywhere in this library: |up> = 0, |down> = 1,
// and the leftmost particle occupies the most significant bit of the basis
// index. A two-particle state is therefore ordered (uu, ud, du, dd).

#pragma once

#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "eprsim/errors.hpp"

namespace eprsim {

using Complex = std::complex<double>;

// Dimensions never exceed 2^3 = 8, so vectors and matrices use Eigen's
// fixed-capacity dynamic types: sized at runtime, stored on the stack.
using AmpVector =
    Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, 8, 1>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::ColMajor, 8, 8>;

inline constexpr int kMaxParticles = 3;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-12;
inline constexpr double kOrthonormalTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-10;

namespace detail {

inline int particles_for_dim(Eigen::Index dim) {
  switch (dim) {
    case 2:
      return 1;
    case 4:
      return 2;
    case 8:
      return 3;
    default:
      return 0;
  }
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex c = m(i, j);
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Normalized pure state of 1-3 two-level particles. Immutable after
/// construction; all operations below are pure functions.
class PureState {
 public:
  int num_particles() const { return num_particles_; }
  Eigen::Index dim() const { return amps_.size(); }
  const AmpVector& amplitudes() const { return amps_; }
  Complex amplitude(Eigen::Index index) const { return amps_(index); }

 private:
  PureState(AmpVector amps, int num_particles)
      : amps_(std::move(amps)), num_particles_(num_particles) {}

  friend PureState make_pure(const AmpVector& amplitudes);

  AmpVector amps_;
  int num_particles_;
};

/// Builds a normalized state from raw amplitudes (length 2, 4 or 8). Inputs
/// are divided by their norm, never rejected for being unnormalized.
inline PureState make_pure(const AmpVector& amplitudes) {
  const int n = detail::particles_for_dim(amplitudes.size());
  if (n == 0) {
    fail(ErrorKind::BadLength, "amplitude vector length must be 2, 4 or 8, got " +
                                   std::to_string(amplitudes.size()));
  }
  if (!detail::all_finite(amplitudes)) {
    fail(ErrorKind::NonFinite, "amplitudes must be finite");
  }
  const double norm = amplitudes.norm();
  if (norm == 0.0) {
    fail(ErrorKind::ZeroNorm, "amplitude vector has zero norm");
  }
  return PureState(amplitudes / norm, n);
}

inline PureState make_pure(std::initializer_list<Complex> amplitudes) {
  AmpVector v(static_cast<Eigen::Index>(amplitudes.size()));
  Eigen::Index i = 0;
  for (const Complex& c : amplitudes) v(i++) = c;
  return make_pure(v);
}

/// The two-particle spin singlet (0, 1/sqrt2, -1/sqrt2, 0).
inline PureState singlet() {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  return make_pure({Complex(0), Complex(inv_sqrt2), Complex(-inv_sqrt2), Complex(0)});
}

/// Kronecker product; `left` occupies the most significant bits.
inline PureState tensor(const PureState& left, const PureState& right) {
  if (left.num_particles() + right.num_particles() > kMaxParticles) {
    fail(ErrorKind::TooManyParticles,
         "tensor product exceeds " + std::to_string(kMaxParticles) + " particles");
  }
  const Eigen::Index ld = left.dim();
  const Eigen::Index rd = right.dim();
  AmpVector out(ld * rd);
  for (Eigen::Index i = 0; i < ld; ++i) {
    for (Eigen::Index j = 0; j < rd; ++j) {
      out(i * rd + j) = left.amplitude(i) * right.amplitude(j);
    }
  }
  return make_pure(out);
}

/// <x|y>, conjugating x.
inline Complex inner_product(const PureState& x, const PureState& y) {
  if (x.num_particles() != y.num_particles()) {
    fail(ErrorKind::DimensionMismatch, "inner product of states with different particle counts");
  }
  return x.amplitudes().dot(y.amplitudes());
}

/// |<x|y>|^2, clamped into [0, 1].
inline double fidelity_pure(const PureState& x, const PureState& y) {
  const double f = std::norm(inner_product(x, y));
  return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

/// States are compared up to global phase: equal iff fidelity is 1 within tol.
inline bool approx_equal(const PureState& x, const PureState& y, double tol = 1e-10) {
  return std::abs(fidelity_pure(x, y) - 1.0) <= tol;
}

/// 2x2 unitary, validated at construction (U U+ = I within 1e-12).
class Unitary2x2 {
 public:
  static Unitary2x2 from_matrix(const Eigen::Matrix2cd& entries) {
    if (!detail::all_finite(entries)) {
      fail(ErrorKind::NonFinite, "unitary entries must be finite");
    }
    const Eigen::Matrix2cd delta =
        entries * entries.adjoint() - Eigen::Matrix2cd::Identity();
    if (delta.cwiseAbs().maxCoeff() > kUnitaryTolerance) {
      fail(ErrorKind::NotUnitary, "matrix is not unitary within 1e-12");
    }
    return Unitary2x2(entries);
  }

  static Unitary2x2 identity() {
    return Unitary2x2(Eigen::Matrix2cd::Identity());
  }

  const Eigen::Matrix2cd& entries() const { return entries_; }

 private:
  explicit Unitary2x2(Eigen::Matrix2cd entries) : entries_(std::move(entries)) {}

  Eigen::Matrix2cd entries_;
};

/// Hermitian, positive-semidefinite, trace-1 matrix over 1 or 2 particles.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(const CMatrix& entries) {
    const int n = detail::particles_for_dim(entries.rows());
    if (n == 0 || n > 2 || entries.rows() != entries.cols()) {
      fail(ErrorKind::DimensionMismatch, "density matrix must be 2x2 or 4x4");
    }
    if (!detail::all_finite(entries)) {
      fail(ErrorKind::NonFinite, "density matrix entries must be finite");
    }
    if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
      fail(ErrorKind::NotHermitian, "density matrix is not Hermitian within 1e-12");
    }
    if (std::abs(entries.trace() - Complex(1.0)) > kHermitianTolerance) {
      fail(ErrorKind::BadTrace, "density matrix trace differs from 1 by more than 1e-12");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(entries, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < kEigenvalueFloor) {
      fail(ErrorKind::NotPositive, "density matrix has an eigenvalue below -1e-10");
    }
    return DensityMatrix(entries, n);
  }

  int num_particles() const { return num_particles_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const CMatrix& entries() const { return entries_; }

 private:
  DensityMatrix(CMatrix entries, int num_particles)
      : entries_(std::move(entries)), num_particles_(num_particles) {}

  CMatrix entries_;
  int num_particles_;
};

/// |state><state| as a density matrix (at most 2 particles).
inline DensityMatrix pure_density(const PureState& state) {
  if (state.num_particles() > 2) {
    fail(ErrorKind::TooManyParticles, "density matrices cover at most 2 particles");
  }
  const AmpVector& v = state.amplitudes();
  CMatrix m = v * v.adjoint();
  return DensityMatrix::from_matrix(m);
}

/// I / 2^n.
inline DensityMatrix maximally_mixed(int num_particles) {
  if (num_particles < 1 || num_particles > 2) {
    fail(ErrorKind::OutOfRange, "maximally mixed state supports 1 or 2 particles");
  }
  const Eigen::Index d = Eigen::Index(1) << num_particles;
  CMatrix m = CMatrix::Identity(d, d) / static_cast<double>(d);
  return DensityMatrix::from_matrix(m);
}

inline DensityMatrix tensor(const DensityMatrix& left, const DensityMatrix& right) {
  if (left.num_particles() + right.num_particles() > 2) {
    fail(ErrorKind::TooManyParticles, "density matrices cover at most 2 particles");
  }
  const Eigen::Index ld = left.dim();
  const Eigen::Index rd = right.dim();
  CMatrix out(ld * rd, ld * rd);
  for (Eigen::Index i = 0; i < ld; ++i) {
    for (Eigen::Index k = 0; k < ld; ++k) {
      out.block(i * rd, k * rd, rd, rd) = left.entries()(i, k) * right.entries();
    }
  }
  return DensityMatrix::from_matrix(out);
}

/// <target| rho |target>, clamped into [0, 1].
inline double fidelity_mixed(const DensityMatrix& rho, const PureState& target) {
  if (rho.dim() != target.dim()) {
    fail(ErrorKind::DimensionMismatch, "density matrix and target state dimensions differ");
  }
  const AmpVector& v = target.amplitudes();
  const double f = (v.adjoint() * rho.entries() * v)(0).real();
  return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

/// Applies a single-particle unitary to the designated tensor factor.
inline PureState apply_unitary(const PureState& state, int particle, const Unitary2x2& u) {
  const int n = state.num_particles();
  if (particle < 0 || particle >= n) {
    fail(ErrorKind::BadIndex, "particle index " + std::to_string(particle) + " out of range");
  }
  const Eigen::Index stride = Eigen::Index(1) << (n - 1 - particle);
  const Eigen::Matrix2cd& m = u.entries();
  AmpVector out(state.dim());
  for (Eigen::Index base = 0; base < state.dim(); ++base) {
    if ((base & stride) != 0) continue;
    const Complex a0 = state.amplitude(base);
    const Complex a1 = state.amplitude(base | stride);
    out(base) = m(0, 0) * a0 + m(0, 1) * a1;
    out(base | stride) = m(1, 0) * a0 + m(1, 1) * a1;
  }
  return make_pure(out);
}

/// U rho U+ on one tensor factor of a density matrix.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, int particle, const Unitary2x2& u) {
  const int n = rho.num_particles();
  if (particle < 0 || particle >= n) {
    fail(ErrorKind::BadIndex, "particle index " + std::to_string(particle) + " out of range");
  }
  CMatrix full;
  if (n == 1) {
    full = u.entries();
  } else {
    const Eigen::Matrix2cd eye = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd& m = u.entries();
    const Eigen::Matrix2cd& hi = (particle == 0) ? m : eye;
    const Eigen::Matrix2cd& lo = (particle == 0) ? eye : m;
    full.resize(4, 4);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) {
        full.block(2 * i, 2 * k, 2, 2) = hi(i, k) * lo;
      }
    }
  }
  CMatrix out = full * rho.entries() * full.adjoint();
  return DensityMatrix::from_matrix(out);
}

namespace detail {

// Bit of `particle` inside a full basis index (leftmost = most significant).
inline Eigen::Index particle_bit(int num_particles, int particle) {
  return Eigen::Index(1) << (num_particles - 1 - particle);
}

}  // namespace detail

/// Unnormalized residual state of the unmeasured particles after projecting
/// the `particles` subset (strictly increasing indices) onto `basis_vector`.
/// The Born weight of that projection is the squared norm of the result.
inline AmpVector project_residual(const PureState& state, std::span<const int> particles,
                                  const PureState& basis_vector) {
  const int n = state.num_particles();
  const int k = static_cast<int>(particles.size());
  if (k < 1 || k >= n) {
    fail(ErrorKind::BadIndex, "measured subset must be a proper nonempty subset");
  }
  for (int t = 0; t < k; ++t) {
    const bool in_range = particles[t] >= 0 && particles[t] < n;
    if (!in_range || (t > 0 && particles[t] <= particles[t - 1])) {
      fail(ErrorKind::BadIndex, "particle indices must be strictly increasing and in range");
    }
  }
  if (basis_vector.num_particles() != k) {
    fail(ErrorKind::DimensionMismatch, "basis vector does not cover the measured subset");
  }

  const int m = n - k;
  AmpVector residual = AmpVector::Zero(Eigen::Index(1) << m);
  for (Eigen::Index z = 0; z < state.dim(); ++z) {
    Eigen::Index sub = 0;
    Eigen::Index rest = 0;
    int next_measured = 0;
    for (int p = 0; p < n; ++p) {
      const bool bit = (z & detail::particle_bit(n, p)) != 0;
      if (next_measured < k && particles[next_measured] == p) {
        if (bit) sub |= detail::particle_bit(k, next_measured);
        ++next_measured;
      } else if (bit) {
        rest |= detail::particle_bit(m, p - next_measured);
      }
    }
    residual(rest) += std::conj(basis_vector.amplitude(sub)) * state.amplitude(z);
  }
  return residual;
}

struct MeasurementResult {
  int outcome_index;
  double probability;
  PureState post_state;
};

/// Projective measurement of a particle subset in an orthonormal basis.
/// The outcome is selected by walking cumulative Born weights against a
/// uniform draw in [0, 1); the post state is the normalized residual of the
/// unmeasured particles.
inline MeasurementResult measure_in_basis(const PureState& state, std::span<const int> particles,
                                          std::span<const PureState> basis, double rng_draw) {
  const int k = static_cast<int>(particles.size());
  if (std::cmp_not_equal(basis.size(), Eigen::Index(1) << k)) {
    fail(ErrorKind::IncompleteBasis, "basis must contain exactly 2^k vectors");
  }
  for (const PureState& b : basis) {
    if (b.num_particles() != k) {
      fail(ErrorKind::IncompleteBasis, "basis vector has the wrong particle count");
    }
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      if (std::abs(inner_product(basis[i], basis[j])) >= kOrthonormalTolerance) {
        fail(ErrorKind::NonOrthonormalBasis, "basis vectors are not pairwise orthogonal");
      }
    }
    if (std::abs(basis[i].amplitudes().norm() - 1.0) >= kOrthonormalTolerance) {
      fail(ErrorKind::NonOrthonormalBasis, "basis vector is not normalized");
    }
  }

  // Residuals for every outcome; probabilities sum to 1 by completeness.
  std::array<AmpVector, 8> residuals;
  std::array<double, 8> probabilities{};
  for (std::size_t i = 0; i < basis.size(); ++i) {
    residuals[i] = project_residual(state, particles, basis[i]);
    probabilities[i] = residuals[i].squaredNorm();
  }

  std::size_t outcome = basis.size() - 1;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    cumulative += probabilities[i];
    if (rng_draw < cumulative) {
      outcome = i;
      break;
    }
  }
  // Guard against a draw beyond the accumulated total (or draw >= 1): fall
  // back to the last outcome with nonzero weight.
  while (outcome > 0 && probabilities[outcome] == 0.0) --outcome;

  return MeasurementResult{static_cast<int>(outcome), probabilities[outcome],
                           make_pure(residuals[outcome])};
}

inline MeasurementResult measure_in_basis(const PureState& state,
                                          std::initializer_list<int> particles,
                                          std::span<const PureState> basis, double rng_draw) {
  return measure_in_basis(state, std::span<const int>(particles.begin(), particles.size()),
                          basis, rng_draw);
}

}  // namespace eprsim

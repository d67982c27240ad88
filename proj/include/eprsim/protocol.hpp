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

// The ideal teleportation protocol: Alice Bell-measures the input qubit
// together with her half of a shared singlet, sends the two-bit result, and
// Bob applies the matching correction unitary to recover the input state.

#pragma once

#include <array>
#include <string>

#include "eprsim/errors.hpp"
#include "eprsim/qstate.hpp"

namespace eprsim {

/// The four Bell-measurement results, in the library's fixed order.
enum class BellOutcome : unsigned { PsiMinus = 0, PsiPlus = 1, PhiMinus = 2, PhiPlus = 3 };

inline constexpr std::array<BellOutcome, 4> kAllBellOutcomes = {
    BellOutcome::PsiMinus, BellOutcome::PsiPlus, BellOutcome::PhiMinus,
    BellOutcome::PhiPlus};

inline const char* to_string(BellOutcome outcome) {
  switch (outcome) {
    case BellOutcome::PsiMinus:
      return "psi_minus";
    case BellOutcome::PsiPlus:
      return "psi_plus";
    case BellOutcome::PhiMinus:
      return "phi_minus";
    case BellOutcome::PhiPlus:
      return "phi_plus";
  }
  return "?";
}

/// Alice's two classical bits; bijective with BellOutcome
/// (psi_minus=00, psi_plus=01, phi_minus=10, phi_plus=11).
class ClassicalMessage {
 public:
  explicit ClassicalMessage(BellOutcome outcome)
      : bits_(static_cast<unsigned>(outcome)) {}

  static ClassicalMessage from_bits(unsigned bits) {
    if (bits > 3) fail(ErrorKind::OutOfRange, "classical message is two bits");
    return ClassicalMessage(static_cast<BellOutcome>(bits));
  }

  unsigned bits() const { return bits_; }
  BellOutcome outcome() const { return static_cast<BellOutcome>(bits_); }

  std::string to_string() const {
    return {static_cast<char>('0' + ((bits_ >> 1) & 1u)),
            static_cast<char>('0' + (bits_ & 1u))};
  }

 private:
  unsigned bits_;
};

/// The Bell basis in the order (psi-, psi+, phi-, phi+).
inline const std::array<PureState, 4>& bell_basis() {
  static const std::array<PureState, 4> basis = {
      make_pure({Complex(0), Complex(1), Complex(-1), Complex(0)}),
      make_pure({Complex(0), Complex(1), Complex(1), Complex(0)}),
      make_pure({Complex(1), Complex(0), Complex(0), Complex(-1)}),
      make_pure({Complex(1), Complex(0), Complex(0), Complex(1)}),
  };
  return basis;
}

// For an input qubit (a, b) teleported through the singlet, Bob's particle is
// left in a conditional state that depends on Alice's outcome:
//   psi_minus -> (-a, -b)     psi_plus -> (-a,  b)
//   phi_minus -> ( b,  a)     phi_plus -> (-b,  a)
// Each correction is the real unitary mapping that state back to (a, b); the
// psi_minus branch needs none because a global sign is unobservable.

/// Bob's pre-correction conditional state for one Bell outcome.
inline PureState bell_branch_state(BellOutcome outcome, const PureState& f) {
  if (f.num_particles() != 1) {
    fail(ErrorKind::DimensionMismatch, "input must be a single-particle state");
  }
  const Complex a = f.amplitude(0);
  const Complex b = f.amplitude(1);
  switch (outcome) {
    case BellOutcome::PsiMinus:
      return make_pure({-a, -b});
    case BellOutcome::PsiPlus:
      return make_pure({-a, b});
    case BellOutcome::PhiMinus:
      return make_pure({b, a});
    case BellOutcome::PhiPlus:
      return make_pure({-b, a});
  }
  fail(ErrorKind::OutOfRange, "invalid Bell outcome");
}

/// The recovery unitary Bob applies for one Bell outcome.
inline const Unitary2x2& correction_for(BellOutcome outcome) {
  static const std::array<Unitary2x2, 4> corrections = [] {
    Eigen::Matrix2cd psi_plus;
    psi_plus << -1, 0, 0, 1;
    Eigen::Matrix2cd phi_minus;
    phi_minus << 0, 1, 1, 0;
    Eigen::Matrix2cd phi_plus;
    phi_plus << 0, 1, -1, 0;
    return std::array<Unitary2x2, 4>{
        Unitary2x2::identity(),
        Unitary2x2::from_matrix(psi_plus),
        Unitary2x2::from_matrix(phi_minus),
        Unitary2x2::from_matrix(phi_plus),
    };
  }();
  return corrections[static_cast<unsigned>(outcome)];
}

struct TeleportResult {
  BellOutcome outcome;
  PureState bob_state;
  double outcome_probability;
};

namespace detail {

inline constexpr std::array<int, 2> kAliceParticles = {0, 1};

}  // namespace detail

/// One full protocol round with a perfect singlet resource. The outcome is
/// sampled from the Born distribution using `rng_draw` in [0, 1).
inline TeleportResult teleport_ideal(const PureState& f, double rng_draw) {
  if (f.num_particles() != 1) {
    fail(ErrorKind::DimensionMismatch, "input must be a single-particle state");
  }
  const PureState psi = tensor(f, singlet());
  const MeasurementResult meas =
      measure_in_basis(psi, detail::kAliceParticles, bell_basis(), rng_draw);
  const auto outcome = static_cast<BellOutcome>(meas.outcome_index);
  PureState bob = apply_unitary(meas.post_state, 0, correction_for(outcome));
  return TeleportResult{outcome, std::move(bob), meas.probability};
}

/// Deterministic variant for exhaustive branch tests: forces Alice's outcome
/// instead of sampling it, still reporting that branch's Born weight.
inline TeleportResult teleport_forced(const PureState& f, BellOutcome outcome) {
  if (f.num_particles() != 1) {
    fail(ErrorKind::DimensionMismatch, "input must be a single-particle state");
  }
  const PureState psi = tensor(f, singlet());
  const PureState& bell = bell_basis()[static_cast<unsigned>(outcome)];
  const AmpVector residual = project_residual(psi, detail::kAliceParticles, bell);
  const double probability = residual.squaredNorm();
  PureState bob = apply_unitary(make_pure(residual), 0, correction_for(outcome));
  return TeleportResult{outcome, std::move(bob), probability};
}

struct MixedTeleportResult {
  BellOutcome outcome;
  DensityMatrix bob_state;
  double outcome_probability;
};

namespace detail {

// Collapse rho_123 = |f><f| (x) resource onto one Bell vector of particles
// 1-2; returns Bob's unnormalized 2x2 block, whose trace is the Born weight.
inline Eigen::Matrix2cd collapse_onto_bell(const CMatrix& rho_full, const PureState& bell) {
  Eigen::Matrix2cd collapsed = Eigen::Matrix2cd::Zero();
  for (Eigen::Index k = 0; k < 4; ++k) {
    for (Eigen::Index kp = 0; kp < 4; ++kp) {
      const Complex weight = std::conj(bell.amplitude(k)) * bell.amplitude(kp);
      for (Eigen::Index j = 0; j < 2; ++j) {
        for (Eigen::Index jp = 0; jp < 2; ++jp) {
          collapsed(j, jp) += weight * rho_full(k * 2 + j, kp * 2 + jp);
        }
      }
    }
  }
  return collapsed;
}

inline CMatrix payload_times_resource(const PureState& f, const DensityMatrix& resource) {
  if (f.num_particles() != 1 || resource.num_particles() != 2) {
    fail(ErrorKind::DimensionMismatch,
         "mixed teleportation needs a 1-particle input and a 2-particle resource");
  }
  const AmpVector& v = f.amplitudes();
  CMatrix rho_f = v * v.adjoint();
  CMatrix full(8, 8);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index k = 0; k < 2; ++k) {
      full.block(i * 4, k * 4, 4, 4) = rho_f(i, k) * resource.entries();
    }
  }
  return full;
}

inline MixedTeleportResult finish_mixed_branch(const Eigen::Matrix2cd& collapsed,
                                               double probability, BellOutcome outcome) {
  if (probability <= 0.0) {
    fail(ErrorKind::ZeroNorm, "Bell outcome has zero probability for this resource");
  }
  const Eigen::Matrix2cd& u = correction_for(outcome).entries();
  CMatrix bob = u * (collapsed / probability) * u.adjoint();
  // Symmetrize away last-ulp Hermiticity noise before validation.
  bob = (bob + bob.adjoint().eval()) / 2.0;
  return MixedTeleportResult{outcome, DensityMatrix::from_matrix(bob), probability};
}

}  // namespace detail

/// Same Bell measurement run as a quantum operation on an arbitrary (possibly
/// mixed) two-particle resource; returns Bob's post-correction state.
inline MixedTeleportResult teleport_with_resource(const PureState& f,
                                                  const DensityMatrix& resource,
                                                  double rng_draw) {
  const CMatrix rho_full = detail::payload_times_resource(f, resource);
  std::array<Eigen::Matrix2cd, 4> collapsed;
  std::array<double, 4> probabilities{};
  for (unsigned i = 0; i < 4; ++i) {
    collapsed[i] = detail::collapse_onto_bell(rho_full, bell_basis()[i]);
    probabilities[i] = collapsed[i].trace().real();
  }
  unsigned outcome = 3;
  double cumulative = 0.0;
  for (unsigned i = 0; i < 4; ++i) {
    cumulative += probabilities[i];
    if (rng_draw < cumulative) {
      outcome = i;
      break;
    }
  }
  while (outcome > 0 && probabilities[outcome] <= 0.0) --outcome;
  return detail::finish_mixed_branch(collapsed[outcome], probabilities[outcome],
                                     static_cast<BellOutcome>(outcome));
}

/// Forced-outcome variant of the mixed-resource protocol.
inline MixedTeleportResult teleport_with_resource_forced(const PureState& f,
                                                         const DensityMatrix& resource,
                                                         BellOutcome outcome) {
  const CMatrix rho_full = detail::payload_times_resource(f, resource);
  const Eigen::Matrix2cd collapsed =
      detail::collapse_onto_bell(rho_full, bell_basis()[static_cast<unsigned>(outcome)]);
  return detail::finish_mixed_branch(collapsed, collapsed.trace().real(), outcome);
}

}  // namespace eprsim

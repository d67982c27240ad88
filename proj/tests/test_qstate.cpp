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

#include <array>
#include <cmath>
#include <complex>

#include <catch2/catch_amalgamated.hpp>

#include "eprsim/qstate.hpp"
#include "eprsim/rng.hpp"
#include "test_util.hpp"

using namespace eprsim;
using eprsim::testutil::error_kind_of;
using eprsim::testutil::random_qubit;
using eprsim::testutil::random_state;
using eprsim::testutil::random_unitary;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TEST_CASE("make_pure normalizes and validates", "[qstate]") {
  SECTION("already normalized basis state") {
    const PureState up = make_pure({Complex(1), Complex(0)});
    REQUIRE(up.num_particles() == 1);
    REQUIRE(up.amplitude(0) == Complex(1.0));
    REQUIRE(up.amplitude(1) == Complex(0.0));
  }

  SECTION("normalization forces 1/sqrt2") {
    const PureState plus = make_pure({Complex(1), Complex(1)});
    REQUIRE(plus.amplitude(0).real() == Catch::Approx(kInvSqrt2).epsilon(1e-14));
    REQUIRE(plus.amplitude(1).real() == Catch::Approx(kInvSqrt2).epsilon(1e-14));
  }

  SECTION("(0, 1, -1, 0) equals the singlet") {
    const PureState s = make_pure({Complex(0), Complex(1), Complex(-1), Complex(0)});
    REQUIRE(fidelity_pure(s, singlet()) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(s.amplitude(1).real() == Catch::Approx(kInvSqrt2).margin(1e-15));
    REQUIRE(s.amplitude(2).real() == Catch::Approx(-kInvSqrt2).margin(1e-15));
  }

  SECTION("rejections") {
    REQUIRE(error_kind_of([] { return make_pure({Complex(0), Complex(0)}); }) ==
            ErrorKind::ZeroNorm);
    REQUIRE(error_kind_of([] {
              AmpVector bad(3);
              bad.setZero();
              return make_pure(bad);
            }) == ErrorKind::BadLength);
    REQUIRE(error_kind_of([] { return make_pure({Complex(std::nan("")), Complex(1)}); }) ==
            ErrorKind::NonFinite);
  }
}

TEST_CASE("singlet state", "[qstate]") {
  const PureState s = singlet();
  REQUIRE(s.num_particles() == 2);
  REQUIRE(s.amplitude(0) == Complex(0.0));
  REQUIRE(s.amplitude(1).real() == Catch::Approx(0.70710678118654752).margin(1e-15));
  REQUIRE(s.amplitude(2).real() == Catch::Approx(-0.70710678118654752).margin(1e-15));
  REQUIRE(s.amplitude(3) == Complex(0.0));
  REQUIRE(fidelity_pure(s, s) == Catch::Approx(1.0).margin(1e-14));

  SplitMix64 rng(11);
  const PureState f = random_qubit(rng);
  REQUIRE(tensor(f, s).amplitudes().norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("tensor product bookkeeping", "[qstate]") {
  const PureState up = make_pure({Complex(1), Complex(0)});
  const PureState down = make_pure({Complex(0), Complex(1)});

  const PureState uu = tensor(up, up);
  REQUIRE(uu.dim() == 4);
  REQUIRE(uu.amplitude(0) == Complex(1.0));

  // Left factor occupies the most significant bit: |down,up> has index 2.
  const PureState du = tensor(down, up);
  REQUIRE(du.amplitude(2) == Complex(1.0));
  REQUIRE(du.amplitude(0) == Complex(0.0));

  REQUIRE(error_kind_of([] { return tensor(singlet(), singlet()); }) ==
          ErrorKind::TooManyParticles);
}

TEST_CASE("inner product and pure fidelity", "[qstate]") {
  const PureState up = make_pure({Complex(1), Complex(0)});
  const PureState down = make_pure({Complex(0), Complex(1)});
  REQUIRE(inner_product(up, up) == Complex(1.0));
  REQUIRE(inner_product(up, down) == Complex(0.0));
  REQUIRE(std::abs(inner_product(singlet(), singlet()) - Complex(1.0)) < 1e-14);

  REQUIRE(fidelity_pure(up, up) == 1.0);
  REQUIRE(fidelity_pure(up, down) == 0.0);

  // Oracle: <plus|minus> = (1/sqrt2)(1/sqrt2) + (1/sqrt2)(-1/sqrt2) = 0.
  const PureState plus = make_pure({Complex(kInvSqrt2), Complex(kInvSqrt2)});
  const PureState minus = make_pure({Complex(kInvSqrt2), Complex(-kInvSqrt2)});
  const Complex direct = std::conj(plus.amplitude(0)) * minus.amplitude(0) +
                         std::conj(plus.amplitude(1)) * minus.amplitude(1);
  REQUIRE(std::abs(direct) < 1e-15);
  REQUIRE(fidelity_pure(plus, minus) == Catch::Approx(0.0).margin(1e-15));

  REQUIRE(error_kind_of([&] { return inner_product(up, singlet()); }) ==
          ErrorKind::DimensionMismatch);
}

TEST_CASE("mixed fidelity", "[qstate]") {
  const PureState up = make_pure({Complex(1), Complex(0)});

  REQUIRE(fidelity_mixed(pure_density(up), up) == Catch::Approx(1.0).margin(1e-14));

  SECTION("maximally mixed gives 1/2 for any pure state") {
    const DensityMatrix mixed = maximally_mixed(1);
    SplitMix64 rng(5);
    for (int i = 0; i < 100; ++i) {
      const PureState f = random_qubit(rng);
      REQUIRE(fidelity_mixed(mixed, f) == Catch::Approx(0.5).margin(1e-14));
    }
  }

  SECTION("classical mixture contracts directly") {
    CMatrix m(2, 2);
    m.setZero();
    m(0, 0) = Complex(0.75);
    m(1, 1) = Complex(0.25);
    const DensityMatrix rho = DensityMatrix::from_matrix(m);
    // Oracle: <up| rho |up> picks the (0,0) entry.
    REQUIRE(fidelity_mixed(rho, up) == Catch::Approx(0.75).margin(1e-15));
  }

  SECTION("dimension mismatch") {
    REQUIRE(error_kind_of([&] { return fidelity_mixed(maximally_mixed(2), up); }) ==
            ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("density matrix validation", "[qstate]") {
  SECTION("non-Hermitian rejected") {
    CMatrix m(2, 2);
    m.setZero();
    m(0, 0) = Complex(0.5);
    m(1, 1) = Complex(0.5);
    m(0, 1) = Complex(0.2);
    m(1, 0) = Complex(0.3);
    REQUIRE(error_kind_of([&] { return DensityMatrix::from_matrix(m); }) ==
            ErrorKind::NotHermitian);
  }

  SECTION("trace must be 1") {
    REQUIRE(error_kind_of([] { return DensityMatrix::from_matrix(CMatrix::Identity(2, 2)); }) ==
            ErrorKind::BadTrace);
  }

  SECTION("negative eigenvalue rejected") {
    CMatrix m(2, 2);
    m.setZero();
    m(0, 0) = Complex(1.5);
    m(1, 1) = Complex(-0.5);
    REQUIRE(error_kind_of([&] { return DensityMatrix::from_matrix(m); }) ==
            ErrorKind::NotPositive);
  }

  SECTION("pure density caps at two particles") {
    const PureState three = tensor(make_pure({Complex(1), Complex(0)}), singlet());
    REQUIRE(error_kind_of([&] { return pure_density(three); }) == ErrorKind::TooManyParticles);
  }

  SECTION("tensor of mixed states stays valid") {
    const DensityMatrix joint = tensor(maximally_mixed(1), maximally_mixed(1));
    REQUIRE(joint.num_particles() == 2);
    REQUIRE(joint.entries()(0, 0).real() == Catch::Approx(0.25).margin(1e-15));
  }
}

TEST_CASE("measure_in_basis on computational states", "[qstate]") {
  const PureState up = make_pure({Complex(1), Complex(0)});
  const std::array<PureState, 2> z_basis = {make_pure({Complex(1), Complex(0)}),
                                            make_pure({Complex(0), Complex(1)})};

  const PureState uu = tensor(up, up);
  const MeasurementResult result = measure_in_basis(uu, {0}, z_basis, 0.7);
  REQUIRE(result.outcome_index == 0);
  REQUIRE(result.probability == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(fidelity_pure(result.post_state, up) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("measure_in_basis validates the basis", "[qstate]") {
  const PureState up = make_pure({Complex(1), Complex(0)});
  const PureState uu = tensor(up, up);

  SECTION("incomplete basis") {
    const std::array<PureState, 1> incomplete = {make_pure({Complex(1), Complex(0)})};
    REQUIRE(error_kind_of([&] { return measure_in_basis(uu, {0}, incomplete, 0.0); }) ==
            ErrorKind::IncompleteBasis);
  }

  SECTION("non-orthogonal basis") {
    const std::array<PureState, 2> skewed = {
        make_pure({Complex(1), Complex(0)}),
        make_pure({Complex(kInvSqrt2), Complex(kInvSqrt2)})};
    REQUIRE(error_kind_of([&] { return measure_in_basis(uu, {0}, skewed, 0.0); }) ==
            ErrorKind::NonOrthonormalBasis);
  }

  SECTION("bad particle subset") {
    const std::array<PureState, 2> z_basis = {make_pure({Complex(1), Complex(0)}),
                                              make_pure({Complex(0), Complex(1)})};
    REQUIRE(error_kind_of([&] { return measure_in_basis(uu, {3}, z_basis, 0.0); }) ==
            ErrorKind::BadIndex);
  }
}

TEST_CASE("measurement probabilities are complete", "[qstate][property]") {
  SplitMix64 rng(17);
  for (int round = 0; round < 50; ++round) {
    const PureState state = random_state(rng, 2);
    const Unitary2x2 u = random_unitary(rng);
    const std::array<PureState, 2> basis = {
        apply_unitary(make_pure({Complex(1), Complex(0)}), 0, u),
        apply_unitary(make_pure({Complex(0), Complex(1)}), 0, u)};
    double total = 0.0;
    for (const PureState& b : basis) {
      total += project_residual(state, std::array<int, 1>{0}, b).squaredNorm();
    }
    REQUIRE(total == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("apply_unitary matches the recovery algebra", "[qstate]") {
  SplitMix64 rng(23);
  const PureState f = random_qubit(rng);
  const Complex a = f.amplitude(0);
  const Complex b = f.amplitude(1);

  SECTION("identity leaves states alone") {
    const PureState same = apply_unitary(f, 0, Unitary2x2::identity());
    REQUIRE((same.amplitudes() - f.amplitudes()).norm() < 1e-14);
  }

  SECTION("diag(-1, 1) repairs (-a, b)") {
    Eigen::Matrix2cd m;
    m << -1, 0, 0, 1;
    const PureState repaired = apply_unitary(make_pure({-a, b}), 0, Unitary2x2::from_matrix(m));
    REQUIRE((repaired.amplitudes() - f.amplitudes()).norm() < 1e-12);
  }

  SECTION("swap repairs (b, a)") {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    const PureState repaired = apply_unitary(make_pure({b, a}), 0, Unitary2x2::from_matrix(m));
    REQUIRE((repaired.amplitudes() - f.amplitudes()).norm() < 1e-12);
  }

  SECTION("bad particle index") {
    REQUIRE(error_kind_of([&] { return apply_unitary(f, 1, Unitary2x2::identity()); }) ==
            ErrorKind::BadIndex);
  }
}

TEST_CASE("apply_unitary preserves inner products", "[qstate][property]") {
  SplitMix64 rng(31);
  for (int round = 0; round < 100; ++round) {
    const int n = 1 + static_cast<int>(rng.next_unit() * 3.0);
    const PureState x = random_state(rng, n);
    const PureState y = random_state(rng, n);
    const Unitary2x2 u = random_unitary(rng);
    const int particle = static_cast<int>(rng.next_unit() * n);
    const Complex before = inner_product(x, y);
    const Complex after =
        inner_product(apply_unitary(x, particle, u), apply_unitary(y, particle, u));
    REQUIRE(std::abs(before - after) < 1e-12);
  }
}

TEST_CASE("every constructor output is normalized", "[qstate][property]") {
  SplitMix64 rng(37);
  for (int round = 0; round < 100; ++round) {
    const int n = 1 + static_cast<int>(rng.next_unit() * 2.0);
    const PureState s = random_state(rng, n);
    REQUIRE(s.amplitudes().norm() == Catch::Approx(1.0).margin(1e-12));
    const PureState t = tensor(s, random_state(rng, 1));
    REQUIRE(t.amplitudes().norm() == Catch::Approx(1.0).margin(1e-12));
    const PureState u = apply_unitary(t, 0, random_unitary(rng));
    REQUIRE(u.amplitudes().norm() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("unitary construction is validated", "[qstate]") {
  Eigen::Matrix2cd not_unitary;
  not_unitary << 1, 0, 0, 2;
  REQUIRE(error_kind_of([&] { return Unitary2x2::from_matrix(not_unitary); }) ==
          ErrorKind::NotUnitary);
}

TEST_CASE("global phase equality", "[qstate]") {
  SplitMix64 rng(41);
  const PureState f = random_qubit(rng);
  const PureState negated = make_pure({-f.amplitude(0), -f.amplitude(1)});
  REQUIRE(approx_equal(f, negated));
  const PureState rotated =
      make_pure({f.amplitude(0) * std::polar(1.0, 0.7), f.amplitude(1) * std::polar(1.0, 0.7)});
  REQUIRE(approx_equal(f, rotated));
}

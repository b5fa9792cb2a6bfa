#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>

#include "qrel/hilbert.hpp"
#include "qrel/rng.hpp"

using namespace qrel;

namespace {

constexpr double kPi = 3.14159265358979323846;

CognitiveState random_state(RandomStream& rng) {
  const double a = rng.uniform01() * 2.0 - 1.0;
  const double b = rng.uniform01() * 2.0 - 1.0;
  const double c = rng.uniform01() * 2.0 - 1.0;
  const double d = rng.uniform01() * 2.0 - 1.0;
  const double norm = std::sqrt(a * a + b * b + c * c + d * d);
  return CognitiveState(Complex(a / norm, b / norm), Complex(c / norm, d / norm));
}

}  // namespace

TEST_CASE("initial state amplitudes are (t, sqrt(1-t^2))") {
  const CognitiveState s = make_initial_state(0.6);
  CHECK(s.amp_plus.real() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(s.amp_plus.imag() == 0.0);
  CHECK(s.amp_minus.real() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(s.norm() - 1.0) <= 1e-12);

  CHECK_THROWS_AS(make_initial_state(1.2), std::domain_error);
  CHECK_THROWS_AS(make_initial_state(-0.1), std::domain_error);
}

TEST_CASE("states must be normalized within 1e-9") {
  CHECK_THROWS_AS(CognitiveState(Complex(0.9, 0.0), Complex(0.9, 0.0)),
                  NormalizationError);
  CHECK_NOTHROW(CognitiveState(Complex(1.0, 0.0), Complex(0.0, 0.0)));
}

TEST_CASE("basis vectors match their defining amplitudes") {
  const MeasurementBasis u = understandability_basis(0.8);
  CHECK(u.plus_vec().amp_plus == Complex(0.8, 0.0));
  CHECK(u.plus_vec().amp_minus.real() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(u.minus_vec().amp_minus == Complex(-0.8, 0.0));

  const MeasurementBasis r = reliability_basis(0.6, kPi / 2.0);
  CHECK(r.plus_vec().amp_plus == Complex(0.6, 0.0));
  // sqrt(1-r^2) e^{i pi/2} = 0.8i
  CHECK(std::abs(r.plus_vec().amp_minus - Complex(0.0, 0.8)) <= 1e-12);
  CHECK(std::abs(r.minus_vec().amp_plus - Complex(0.0, -0.8)) <= 1e-12);
  CHECK(r.minus_vec().amp_minus == Complex(-0.6, 0.0));

  CHECK_THROWS_AS(understandability_basis(1.5), std::domain_error);
  CHECK_THROWS_AS(reliability_basis(-0.2, 0.0), std::domain_error);
}

TEST_CASE("every basis is orthonormal and complete across the parameter range") {
  for (int iu = 0; iu <= 50; ++iu) {
    const double u = iu / 50.0;
    const MeasurementBasis basis = understandability_basis(u);
    CHECK(std::abs(inner(basis.plus_vec(), basis.minus_vec())) <= 1e-12);
    CHECK(std::abs(basis.plus_vec().norm() - 1.0) <= 1e-12);
    CHECK(std::abs(basis.minus_vec().norm() - 1.0) <= 1e-12);
    const Mat2c sum =
        basis.projector(Sign::Plus).matrix() + basis.projector(Sign::Minus).matrix();
    CHECK(sum.max_abs_diff(Mat2c::identity()) <= 1e-12);
  }
  for (int ir = 0; ir <= 10; ++ir) {
    for (int it = 0; it <= 16; ++it) {
      const double r = ir / 10.0;
      const double theta = -kPi + 2.0 * kPi * it / 16.0;
      const MeasurementBasis basis = reliability_basis(r, theta);
      CHECK(std::abs(inner(basis.plus_vec(), basis.minus_vec())) <= 1e-12);
      CHECK(std::abs(basis.plus_vec().norm() - 1.0) <= 1e-12);
      CHECK(std::abs(basis.minus_vec().norm() - 1.0) <= 1e-12);
      const Mat2c sum =
          basis.projector(Sign::Plus).matrix() + basis.projector(Sign::Minus).matrix();
      CHECK(sum.max_abs_diff(Mat2c::identity()) <= 1e-12);
    }
  }
}

TEST_CASE("projectors of unit vectors are Hermitian, idempotent, rank 1") {
  RandomStream rng(11);
  for (int i = 0; i < 200; ++i) {
    const CognitiveState v = random_state(rng);
    const Projector p = projector_of(v);
    const Mat2c& m = p.matrix();
    CHECK(m.is_hermitian(1e-12));
    CHECK(m.max_abs_diff(m * m) <= 1e-12);
    CHECK(std::abs(m.trace().real() - 1.0) <= 1e-12);
    CHECK(std::abs(m.trace().imag()) <= 1e-12);
    CHECK(p.rank() == 1);
  }
}

TEST_CASE("projector constructor rejects non-projector matrices") {
  Mat2c not_hermitian = {Complex(1.0, 0.0), Complex(0.5, 0.0), Complex(0.0, 0.0),
                         Complex(0.0, 0.0)};
  CHECK_THROWS_AS(Projector{not_hermitian}, std::invalid_argument);
  Mat2c not_idempotent = {Complex(0.5, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0),
                          Complex(0.5, 0.0)};
  CHECK_THROWS_AS(Projector{not_idempotent}, std::invalid_argument);
  CHECK_NOTHROW(Projector{Mat2c::identity()});
  CHECK_NOTHROW(Projector{Mat2c::zero()});
}

TEST_CASE("transition probability is symmetric and within [0, 1]") {
  RandomStream rng(23);
  for (int i = 0; i < 200; ++i) {
    const CognitiveState a = random_state(rng);
    const CognitiveState b = random_state(rng);
    const double ab = transition_prob(a, b);
    const double ba = transition_prob(b, a);
    CHECK(std::abs(ab - ba) <= 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
  const CognitiveState t_plus = topicality_basis().plus_vec();
  CHECK(std::abs(transition_prob(understandability_basis(0.8).plus_vec(), t_plus) -
                 0.64) <= 1e-12);
}

TEST_CASE("expectation of a projector is the transition probability") {
  const CognitiveState t_plus = topicality_basis().plus_vec();
  const Projector pu = understandability_basis(0.8).projector(Sign::Plus);
  const Complex e = expectation(pu.matrix(), t_plus);
  CHECK(std::abs(e.real() - 0.64) <= 1e-12);
  CHECK(std::abs(e.imag()) <= 1e-12);
}

TEST_CASE("matrix inverse round-trips and rejects singular input") {
  const Mat2c m = {Complex(1.0, 0.5), Complex(0.25, 0.0), Complex(0.0, -1.0),
                   Complex(2.0, 0.0)};
  CHECK((m * m.inverse()).max_abs_diff(Mat2c::identity()) <= 1e-12);
  const Mat2c singular = {Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0),
                          Complex(1.0, 0.0)};
  CHECK_THROWS_AS(singular.inverse(), Error);
}

TEST_CASE("angle normalization wraps into (-pi, pi]") {
  CHECK(std::abs(normalize_angle(2.0 * kPi)) <= 1e-12);
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(std::abs(normalize_angle(3.0 * kPi) - kPi) <= 1e-12);
  CHECK(normalize_angle(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(normalize_angle(std::numeric_limits<double>::infinity()),
                  std::domain_error);
}

TEST_CASE("probability clamp distinguishes rounding slack from bugs") {
  CHECK(clamp_probability(0.5) == 0.5);
  CHECK(clamp_probability(1.0 + 1e-13) == 1.0);
  CHECK(clamp_probability(-1e-13) == 0.0);
  CHECK_THROWS_AS(clamp_probability(1.1), InternalConsistencyError);
  CHECK_THROWS_AS(clamp_probability(-1e-6), InternalConsistencyError);
}

TEST_CASE("reliability phase is wrapped on construction") {
  const MeasurementBasis a = reliability_basis(0.6, kPi / 3.0 + 2.0 * kPi);
  const MeasurementBasis b = reliability_basis(0.6, kPi / 3.0);
  CHECK(std::abs(a.phase() - b.phase()) <= 1e-12);
  CHECK(std::abs(a.plus_vec().amp_minus - b.plus_vec().amp_minus) <= 1e-12);
}

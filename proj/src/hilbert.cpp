#include "qrel/hilbert.hpp"

#include <cmath>
#include <stdexcept>

namespace qrel {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_unit(double norm, const char* what) {
  if (std::abs(norm - 1.0) > kInputTol) {
    throw NormalizationError(std::string(what) + " has norm " + std::to_string(norm) +
                             ", expected 1 within 1e-9");
  }
}

void require_in_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0, 1], got " +
                            std::to_string(x));
  }
}

}  // namespace

char dimension_letter(Dimension d) {
  switch (d) {
    case Dimension::Topicality: return 'T';
    case Dimension::Understandability: return 'U';
    case Dimension::Reliability: return 'R';
  }
  throw std::invalid_argument("unknown dimension");
}

char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }

Sign opposite(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }

std::string to_string(Dimension d) {
  switch (d) {
    case Dimension::Topicality: return "Topicality";
    case Dimension::Understandability: return "Understandability";
    case Dimension::Reliability: return "Reliability";
  }
  throw std::invalid_argument("unknown dimension");
}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("angle must be finite");
  }
  double wrapped = std::remainder(theta, 2.0 * kPi);  // (-pi, pi] up to the sign of pi
  if (wrapped <= -kPi) wrapped = kPi;
  return wrapped;
}

double clamp_probability(double p) {
  if (p >= 0.0 && p <= 1.0) return p;
  if (p < 0.0 && p >= -kConstructTol) return 0.0;
  if (p > 1.0 && p <= 1.0 + kConstructTol) return 1.0;
  throw InternalConsistencyError("probability " + std::to_string(p) +
                                 " outside [0, 1] by more than 1e-12");
}

CognitiveState::CognitiveState(Complex plus, Complex minus)
    : amp_plus(plus), amp_minus(minus) {
  require_unit(norm(), "state");
}

double CognitiveState::norm() const {
  return std::sqrt(std::norm(amp_plus) + std::norm(amp_minus));
}

Complex inner(const CognitiveState& a, const CognitiveState& b) {
  return std::conj(a.amp_plus) * b.amp_plus + std::conj(a.amp_minus) * b.amp_minus;
}

double transition_prob(const CognitiveState& a, const CognitiveState& b) {
  require_unit(a.norm(), "state");
  require_unit(b.norm(), "state");
  return clamp_probability(std::norm(inner(a, b)));
}

Mat2c Mat2c::identity() { return {1.0, 0.0, 0.0, 1.0}; }

Mat2c Mat2c::zero() { return {}; }

Mat2c Mat2c::outer(const CognitiveState& v) {
  return {v.amp_plus * std::conj(v.amp_plus), v.amp_plus * std::conj(v.amp_minus),
          v.amp_minus * std::conj(v.amp_plus), v.amp_minus * std::conj(v.amp_minus)};
}

Mat2c Mat2c::operator+(const Mat2c& o) const {
  return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
}

Mat2c Mat2c::operator-(const Mat2c& o) const {
  return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
}

Mat2c Mat2c::operator*(const Mat2c& o) const {
  return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
          m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
}

Mat2c Mat2c::adjoint() const {
  return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
}

Complex Mat2c::trace() const { return m00 + m11; }

Complex Mat2c::det() const { return m00 * m11 - m01 * m10; }

Mat2c Mat2c::inverse() const {
  const Complex d = det();
  if (std::abs(d) < kConstructTol) {
    throw Error("2x2 matrix is singular (|det| = " + std::to_string(std::abs(d)) + ")");
  }
  return {m11 / d, -m01 / d, -m10 / d, m00 / d};
}

double Mat2c::max_abs_diff(const Mat2c& o) const {
  const Mat2c d = *this - o;
  double m = std::abs(d.m00);
  m = std::max(m, std::abs(d.m01));
  m = std::max(m, std::abs(d.m10));
  m = std::max(m, std::abs(d.m11));
  return m;
}

bool Mat2c::is_hermitian(double tol) const { return max_abs_diff(adjoint()) <= tol; }

Mat2c commutator(const Mat2c& a, const Mat2c& b) { return a * b - b * a; }

Complex expectation(const Mat2c& m, const CognitiveState& v) {
  const Complex row0 = m.m00 * v.amp_plus + m.m01 * v.amp_minus;
  const Complex row1 = m.m10 * v.amp_plus + m.m11 * v.amp_minus;
  return std::conj(v.amp_plus) * row0 + std::conj(v.amp_minus) * row1;
}

Projector::Projector(const Mat2c& m) : m_(m) {
  if (!m.is_hermitian(kInputTol)) {
    throw std::invalid_argument("projector matrix is not Hermitian");
  }
  if (m.max_abs_diff(m * m) > kInputTol) {
    throw std::invalid_argument("projector matrix is not idempotent");
  }
  const double tr = m.trace().real();
  if (std::abs(tr - std::round(tr)) > kInputTol) {
    throw std::invalid_argument("projector trace is not an integer");
  }
}

int Projector::rank() const {
  return static_cast<int>(std::lround(m_.trace().real()));
}

Projector projector_of(const CognitiveState& v) {
  require_unit(v.norm(), "state");
  return Projector(Mat2c::outer(v));
}

MeasurementBasis::MeasurementBasis(Dimension d, CognitiveState plus, CognitiveState minus,
                                   double overlap, double phase)
    : dim_(d), plus_(std::move(plus)), minus_(std::move(minus)),
      overlap_(overlap), phase_(phase) {}

const CognitiveState& MeasurementBasis::outcome(Sign s) const {
  return s == Sign::Plus ? plus_ : minus_;
}

Projector MeasurementBasis::projector(Sign s) const {
  return projector_of(outcome(s));
}

CognitiveState make_initial_state(double t) {
  require_in_unit_interval(t, "t");
  return CognitiveState(Complex(t, 0.0), Complex(std::sqrt(1.0 - t * t), 0.0));
}

MeasurementBasis topicality_basis() {
  return MeasurementBasis(Dimension::Topicality,
                          CognitiveState(Complex(1.0, 0.0), Complex(0.0, 0.0)),
                          CognitiveState(Complex(0.0, 0.0), Complex(1.0, 0.0)),
                          1.0, 0.0);
}

MeasurementBasis understandability_basis(double u) {
  require_in_unit_interval(u, "u");
  const double c = std::sqrt(1.0 - u * u);
  return MeasurementBasis(Dimension::Understandability,
                          CognitiveState(Complex(u, 0.0), Complex(c, 0.0)),
                          CognitiveState(Complex(c, 0.0), Complex(-u, 0.0)),
                          u, 0.0);
}

MeasurementBasis reliability_basis(double r, double theta) {
  require_in_unit_interval(r, "r");
  const double wrapped = normalize_angle(theta);
  const double c = std::sqrt(1.0 - r * r);
  const Complex plus_minus_amp = c * std::exp(Complex(0.0, wrapped));
  const Complex minus_plus_amp = c * std::exp(Complex(0.0, -wrapped));
  return MeasurementBasis(Dimension::Reliability,
                          CognitiveState(Complex(r, 0.0), plus_minus_amp),
                          CognitiveState(minus_plus_amp, Complex(-r, 0.0)),
                          r, wrapped);
}

}  // namespace qrel

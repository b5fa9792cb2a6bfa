#pragma once

#include <complex>
#include <string>

#include "qrel/errors.hpp"

namespace qrel {

using Complex = std::complex<double>;

/// Tolerance for caller-supplied vectors and matrices.
inline constexpr double kInputTol = 1e-9;
/// Tolerance for quantities this library constructs itself.
inline constexpr double kConstructTol = 1e-12;

enum class Dimension { Topicality, Understandability, Reliability };
enum class Sign { Plus, Minus };

char dimension_letter(Dimension d);  // 'T', 'U', 'R'
char sign_char(Sign s);              // '+', '-'
Sign opposite(Sign s);
std::string to_string(Dimension d);

/// One yes/no question: a relevance dimension and the outcome asked about.
struct Question {
  Dimension dim;
  Sign sign;

  bool operator==(const Question&) const = default;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

/// Clamps p into [0, 1] when it lies within 1e-12 of the interval.  Anything
/// further out is arithmetic gone wrong, not rounding, and raises
/// InternalConsistencyError.
double clamp_probability(double p);

/// State vector over the topicality basis {|T+>, |T->}: two complex
/// amplitudes with unit norm.
struct CognitiveState {
  Complex amp_plus{1.0, 0.0};
  Complex amp_minus{0.0, 0.0};

  CognitiveState() = default;
  /// Throws NormalizationError when the norm is off unity by more than 1e-9.
  CognitiveState(Complex plus, Complex minus);

  double norm() const;
};

/// <a|b>, conjugate-linear in a.
Complex inner(const CognitiveState& a, const CognitiveState& b);

/// |<a|b>|^2.  Symmetric in its arguments; in [0, 1] for unit vectors.
double transition_prob(const CognitiveState& a, const CognitiveState& b);

/// Dense 2x2 complex matrix with just the operations the model needs.
struct Mat2c {
  Complex m00{}, m01{}, m10{}, m11{};

  static Mat2c identity();
  static Mat2c zero();
  /// |v><v|
  static Mat2c outer(const CognitiveState& v);

  Mat2c operator+(const Mat2c& o) const;
  Mat2c operator-(const Mat2c& o) const;
  Mat2c operator*(const Mat2c& o) const;
  Mat2c adjoint() const;
  Complex trace() const;
  Complex det() const;
  /// Throws qrel::Error when |det| < 1e-12.
  Mat2c inverse() const;

  double max_abs_diff(const Mat2c& o) const;
  bool is_hermitian(double tol) const;
};

/// AB - BA
Mat2c commutator(const Mat2c& a, const Mat2c& b);

/// <v|M|v>
Complex expectation(const Mat2c& m, const CognitiveState& v);

/// Hermitian idempotent matrix representing one outcome event.
class Projector {
 public:
  /// Validates hermiticity, idempotence and integer trace at 1e-9.
  explicit Projector(const Mat2c& m);

  const Mat2c& matrix() const { return m_; }
  /// 0, 1 or 2 (the rounded trace).
  int rank() const;

 private:
  Mat2c m_;
};

/// |v><v| for a unit vector; rank 1.
Projector projector_of(const CognitiveState& v);

/// Orthonormal outcome pair for one relevance dimension, expressed in the
/// topicality basis and parameterised by an overlap in [0, 1] and a phase.
class MeasurementBasis {
 public:
  Dimension dimension() const { return dim_; }
  const CognitiveState& plus_vec() const { return plus_; }
  const CognitiveState& minus_vec() const { return minus_; }
  const CognitiveState& outcome(Sign s) const;
  Projector projector(Sign s) const;
  double overlap() const { return overlap_; }
  double phase() const { return phase_; }

 private:
  friend MeasurementBasis topicality_basis();
  friend MeasurementBasis understandability_basis(double u);
  friend MeasurementBasis reliability_basis(double r, double theta);

  MeasurementBasis(Dimension d, CognitiveState plus, CognitiveState minus,
                   double overlap, double phase);

  Dimension dim_;
  CognitiveState plus_;
  CognitiveState minus_;
  double overlap_;
  double phase_;
};

/// |S> = t|T+> + sqrt(1-t^2)|T->, both amplitudes real.  t must lie in [0, 1].
CognitiveState make_initial_state(double t);

/// The standard basis itself: |T+> = (1, 0), |T-> = (0, 1).
MeasurementBasis topicality_basis();

/// |U+> = (u, sqrt(1-u^2)), |U-> = (sqrt(1-u^2), -u).  u in [0, 1].
MeasurementBasis understandability_basis(double u);

/// |R+> = (r, sqrt(1-r^2) e^{i theta}), |R-> = (sqrt(1-r^2) e^{-i theta}, -r).
/// r in [0, 1]; theta is wrapped into (-pi, pi].
MeasurementBasis reliability_basis(double r, double theta);

}  // namespace qrel

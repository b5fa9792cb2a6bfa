#pragma once

#include <optional>
#include <string>

#include "qrel/data.hpp"
#include "qrel/model.hpp"

namespace qrel {

/// |z| above which a Kolmogorov-additivity violation counts as significant.
inline constexpr double kViolationZ = 1.96;

/// Empirical ingredients of the additivity check for one (query, U sign,
/// R sign): the disjunction and conjunction judgements plus the two matching
/// marginals, each with its sample size.
struct ConjDisjObservation {
  std::string query_id;
  Sign sign_u = Sign::Plus;
  Sign sign_r = Sign::Plus;
  double p_or = 0.0;
  double p_and = 0.0;
  double p_u = 0.0;
  double p_r = 0.0;
  long n_or = 0;
  long n_and = 0;
  long n_u = 0;
  long n_r = 0;
};

struct DeltaReport {
  double delta = 0.0;
  double std_err = 0.0;
  double z_score = 0.0;
  bool violation = false;
  /// Set when delta != 0 but every sample proportion has zero variance.
  bool infinite_z = false;
  /// Model-implied delta, when a model is available to compute it.
  std::optional<double> quantum_predicted_delta;
};

/// delta = p_or + p_and - p_u - p_r.  Zero, identically, for probabilities
/// that come from one joint distribution.
double classical_delta(const ConjDisjObservation& obs);

/// z-tests delta against zero with std_err = sqrt(sum p_i(1-p_i)/n_i) over
/// the four ingredients.  Requires every n_i > 0.
DeltaReport delta_significance(const ConjDisjObservation& obs);

/// D = [P_u, P_r] (P_u - P_r)^{-1}.  For projectors onto non-coincident rays
/// this collapses to the Hermitian form I - P_u - P_r; the constructor path
/// still goes through the commutator and inverse so coincident rays raise
/// SingularDifferenceError.
Mat2c quantum_correction_operator(const Projector& p_u, const Projector& p_r);

/// <T+| D |T+> for the model's (sign_u, sign_r) outcome pair, i.e. the
/// model-implied additivity defect 1 - P(UsU | T+) - P(RsR | T+).
double quantum_predicted_delta(const ModelParams& m, Sign sign_u, Sign sign_r);

/// Conjunction-fallacy flags: does the conjunction judgement exceed either
/// marginal?  A NaN marginal means "not measured" and leaves that comparison
/// unflagged with a NaN margin.
struct ConjunctionFallacyFlags {
  bool exceeds_u = false;
  bool exceeds_r = false;
  double margin_u = 0.0;
  double margin_r = 0.0;
};

ConjunctionFallacyFlags detect_conjunction_fallacy(double p_and, double p_u, double p_r);

/// The four frequency cells behind one additivity check, each possibly
/// missing from the table.
struct DeltaInputs {
  std::optional<FreqCell> or_cell;
  std::optional<FreqCell> and_cell;
  std::optional<FreqCell> u_cell;
  std::optional<FreqCell> r_cell;

  bool complete() const;
  /// Names of the absent or empty ingredients, e.g. "or", "u".
  std::vector<std::string> missing() const;
  /// Requires complete().
  ConjDisjObservation to_observation(const std::string& query, Sign sign_u,
                                     Sign sign_r) const;
};

/// Pulls the disjunction/conjunction judgements for (sign_u, sign_r) and the
/// matching marginals P(UsU|T+), P(RsR|T+) out of the table.  Cells with
/// n = 0 count as missing.
DeltaInputs collect_delta_inputs(const FrequencyTable& freqs, const std::string& query,
                                 Sign sign_u, Sign sign_r);

}  // namespace qrel

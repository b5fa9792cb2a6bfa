#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qrel/data.hpp"

namespace qrel {

/// Joint distribution over the eight sign patterns of (T, U, R).  All cells
/// non-negative and summing to 1; every conditional derived from it obeys the
/// classical axioms by construction.
class JointTable {
 public:
  /// The uniform table (all cells 1/8).
  JointTable();

  /// Cell index for a sign pattern; Plus = 0 bit, ordered T, U, R.
  static int index(Sign t, Sign u, Sign r);

  /// Validates non-negativity and unit total (1e-9 for caller-supplied
  /// tables).
  static JointTable from_cells(const std::array<double, 8>& cells);
  static JointTable uniform();

  double cell(Sign t, Sign u, Sign r) const;
  const std::array<double, 8>& cells() const { return p_; }

  /// Probability of all listed outcomes holding at once.  An empty list has
  /// probability 1.
  double prob(const std::vector<Question>& outcomes) const;

  /// {"T+U+R+": p, ...}; keys always in T, U, R order.
  std::string to_json() const;
  static JointTable from_json(const std::string& text);

 private:
  std::array<double, 8> p_{};
};

/// P(target | given) = P(target, given) / P(given).  Order of `given` is
/// irrelevant.  Throws ConditioningError when P(given) = 0.
double bayes_conditional(const JointTable& joint, const Question& target,
                         const std::vector<Question>& given);

struct JointFit {
  JointTable joint;
  /// Max absolute cell discrepancy between the two order-specific fits; set
  /// only when both sequence groups are present and complete.
  std::optional<double> order_inconsistency;
};

/// Rebuilds the joint from one sequence group's chain of conditionals
/// (P(T), P(first | T), P(second | first, T)).  Conditionals for strata of
/// probability zero are taken as zero-weight and may be absent; any other
/// missing cell raises MissingDataError.  `smoothing` is an additive count
/// alpha applied to every chain proportion as (k + alpha) / (n + 2 alpha);
/// with alpha > 0 an empty stratum yields 1/2 instead of an error.
JointFit fit_joint_from_sequences(const FrequencyTable& freqs, const std::string& query,
                                  Group designated_order = Group::TUR,
                                  double smoothing = 0.0);

/// Chain-rule cross-order prediction: with evidence e and target t measured
/// after topicality,
///   P(t | e, T+) = P(e | t, T+) P(t | T+) / P(e | T+).
/// Throws ConditioningError when the evidence probability is zero.
double bayes_chain_prediction(double p_evidence_given_target, double p_target,
                              double p_evidence);

}  // namespace qrel

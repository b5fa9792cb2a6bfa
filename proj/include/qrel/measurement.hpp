#pragma once

#include <array>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "qrel/model.hpp"

namespace qrel {

/// Ordered list of questions put to one agent.  Between one and three entries,
/// no dimension repeated.  An empty sequence is rejected here; operations that
/// accept "no prior questions" take the conditioning set separately.
class QuestionSequence {
 public:
  QuestionSequence(std::initializer_list<Question> qs);
  explicit QuestionSequence(std::vector<Question> qs);

  std::size_t size() const { return qs_.size(); }
  const Question& operator[](std::size_t i) const { return qs_[i]; }
  auto begin() const { return qs_.begin(); }
  auto end() const { return qs_.end(); }
  bool contains_dimension(Dimension d) const;

 private:
  std::vector<Question> qs_;
};

/// Probability for every joint outcome of a fixed question order, keyed by
/// labels such as "T+U-R+".  Entries sum to 1 within 1e-12.
class OutcomeDistribution {
 public:
  explicit OutcomeDistribution(std::map<std::string, double> probs);

  double at(const std::string& outcome) const;
  const std::map<std::string, double>& probabilities() const { return probs_; }
  double sum() const;

 private:
  std::map<std::string, double> probs_;
};

/// "T+U-R+" for the given questions in order.
std::string outcome_label(const std::vector<Question>& qs);

/// Probability of observing every outcome in the sequence, in that order,
/// starting from the model's initial state: a product of squared transition
/// amplitudes along the collapse chain.
double sequence_prob(const ModelParams& m, const QuestionSequence& seq);

/// Same, but starting from an explicit (already collapsed) state.
double sequence_prob_from(const CognitiveState& start, const ModelParams& m,
                          const QuestionSequence& seq);

/// P(target | given...), where `given` lists the previously observed outcomes
/// in the order they occurred.  Under collapse this depends only on the last
/// outcome in `given`; an empty `given` conditions on the initial state alone.
double luder_conditional(const ModelParams& m, const Question& target,
                         const std::vector<Question>& given);

/// Closed form for P(R+ | U+, T+):
///   (ur)^2 + (1-u^2)(1-r^2) + 2 u r sqrt((1-u^2)(1-r^2)) cos(theta).
double cond_reliability_closed_form(double u, double r, double theta);

/// P(a+, b+) - P(b+, a+) for the two orders of measuring dimensions a then b
/// (both from the state collapsed onto |T+>).  Zero when the bases commute.
double order_effect_gap(const ModelParams& m, Dimension a, Dimension b);

/// Joint distribution over all eight sign patterns of the three dimensions
/// measured in the given order (a permutation of T, U, R).
OutcomeDistribution full_distribution(const ModelParams& m,
                                      const std::array<Dimension, 3>& order);

}  // namespace qrel

#include "qrel/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace qrel {

namespace {

void validate_questions(const std::vector<Question>& qs) {
  if (qs.empty() || qs.size() > 3) {
    throw std::invalid_argument("question sequence must hold 1 to 3 questions");
  }
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t j = i + 1; j < qs.size(); ++j) {
      if (qs[i].dim == qs[j].dim) {
        throw std::invalid_argument("question sequence repeats a dimension");
      }
    }
  }
}

}  // namespace

QuestionSequence::QuestionSequence(std::initializer_list<Question> qs)
    : QuestionSequence(std::vector<Question>(qs)) {}

QuestionSequence::QuestionSequence(std::vector<Question> qs) : qs_(std::move(qs)) {
  validate_questions(qs_);
}

bool QuestionSequence::contains_dimension(Dimension d) const {
  for (const Question& q : qs_) {
    if (q.dim == d) return true;
  }
  return false;
}

OutcomeDistribution::OutcomeDistribution(std::map<std::string, double> probs)
    : probs_(std::move(probs)) {
  double total = 0.0;
  for (auto& [label, p] : probs_) {
    p = clamp_probability(p);
    total += p;
  }
  if (std::abs(total - 1.0) > kConstructTol) {
    throw InternalConsistencyError("outcome probabilities sum to " +
                                   std::to_string(total) + ", expected 1 within 1e-12");
  }
}

double OutcomeDistribution::at(const std::string& outcome) const {
  auto it = probs_.find(outcome);
  if (it == probs_.end()) {
    throw std::invalid_argument("unknown outcome label: " + outcome);
  }
  return it->second;
}

double OutcomeDistribution::sum() const {
  double total = 0.0;
  for (const auto& [label, p] : probs_) total += p;
  return total;
}

std::string outcome_label(const std::vector<Question>& qs) {
  std::string label;
  for (const Question& q : qs) {
    label += dimension_letter(q.dim);
    label += sign_char(q.sign);
  }
  return label;
}

double sequence_prob_from(const CognitiveState& start, const ModelParams& m,
                          const QuestionSequence& seq) {
  CognitiveState state = start;
  double prob = 1.0;
  for (const Question& q : seq) {
    const CognitiveState& target = m.basis(q.dim).outcome(q.sign);
    prob *= transition_prob(target, state);
    state = target;
  }
  return clamp_probability(prob);
}

double sequence_prob(const ModelParams& m, const QuestionSequence& seq) {
  return sequence_prob_from(m.initial_state(), m, seq);
}

double luder_conditional(const ModelParams& m, const Question& target,
                         const std::vector<Question>& given) {
  std::vector<Question> all = given;
  all.push_back(target);
  validate_questions(all);  // distinct dimensions, at most three questions
  // Collapse wipes out everything except the last observed outcome, so the
  // conditional is a single transition probability from that vector (or from
  // the initial state when nothing has been asked yet).
  const CognitiveState from =
      given.empty() ? m.initial_state() : m.basis(given.back().dim).outcome(given.back().sign);
  return transition_prob(m.basis(target.dim).outcome(target.sign), from);
}

double cond_reliability_closed_form(double u, double r, double theta) {
  if (!(u >= 0.0 && u <= 1.0) || !(r >= 0.0 && r <= 1.0)) {
    throw std::domain_error("u and r must lie in [0, 1]");
  }
  if (!std::isfinite(theta)) throw std::domain_error("theta must be finite");
  const double cu = 1.0 - u * u;
  const double cr = 1.0 - r * r;
  const double value =
      u * u * r * r + cu * cr + 2.0 * u * r * std::sqrt(cu * cr) * std::cos(theta);
  return clamp_probability(value);
}

double order_effect_gap(const ModelParams& m, Dimension a, Dimension b) {
  if (a == b) throw std::invalid_argument("order effect needs two distinct dimensions");
  const CognitiveState t_plus = topicality_basis().plus_vec();
  const QuestionSequence ab{{a, Sign::Plus}, {b, Sign::Plus}};
  const QuestionSequence ba{{b, Sign::Plus}, {a, Sign::Plus}};
  return sequence_prob_from(t_plus, m, ab) - sequence_prob_from(t_plus, m, ba);
}

OutcomeDistribution full_distribution(const ModelParams& m,
                                      const std::array<Dimension, 3>& order) {
  const bool is_permutation =
      (order[0] != order[1] && order[0] != order[2] && order[1] != order[2]);
  if (!is_permutation) {
    throw std::invalid_argument("order must be a permutation of the three dimensions");
  }
  std::map<std::string, double> probs;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<Question> qs;
    for (int i = 0; i < 3; ++i) {
      qs.push_back({order[i], (mask >> i) & 1 ? Sign::Minus : Sign::Plus});
    }
    probs[outcome_label(qs)] = sequence_prob(m, QuestionSequence(qs));
  }
  return OutcomeDistribution(std::move(probs));
}

}  // namespace qrel

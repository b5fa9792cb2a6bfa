#include "qrel/classical.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace qrel {

namespace {

using nlohmann::json;

std::string cell_key(int idx) {
  const Sign t = (idx & 4) ? Sign::Minus : Sign::Plus;
  const Sign u = (idx & 2) ? Sign::Minus : Sign::Plus;
  const Sign r = (idx & 1) ? Sign::Minus : Sign::Plus;
  std::string key;
  key += 'T';
  key += sign_char(t);
  key += 'U';
  key += sign_char(u);
  key += 'R';
  key += sign_char(r);
  return key;
}

// One order-specific chain rebuild.  `missing` collects the names of cells
// that were needed (their stratum has positive probability) but absent.
JointTable chain_fit(const FrequencyTable& freqs, const std::string& query, Group g,
                     double alpha, std::vector<std::string>& missing) {
  const Dimension d1 =
      g == Group::TUR ? Dimension::Understandability : Dimension::Reliability;
  const Dimension d2 =
      g == Group::TUR ? Dimension::Reliability : Dimension::Understandability;

  auto proportion = [&](const std::string& event, bool needed) -> double {
    const auto cell = freqs.lookup(query, g, event);
    const bool usable = cell && (cell->n > 0 || alpha > 0.0);
    if (!usable) {
      if (needed) missing.push_back(to_string(g) + ":" + event);
      return 0.0;
    }
    return (static_cast<double>(cell->k) + alpha) /
           (static_cast<double>(cell->n) + 2.0 * alpha);
  };

  std::array<double, 8> cells{};
  const double p_t = proportion("T+", true);
  for (Sign tau : {Sign::Plus, Sign::Minus}) {
    const double prob_tau = tau == Sign::Plus ? p_t : 1.0 - p_t;
    const std::string ev1 =
        sequential_event({d1, Sign::Plus}, {{Dimension::Topicality, tau}});
    const double p1 = proportion(ev1, prob_tau > 0.0);
    for (Sign s1 : {Sign::Plus, Sign::Minus}) {
      const double prob_s1 = s1 == Sign::Plus ? p1 : 1.0 - p1;
      const std::string ev2 = sequential_event(
          {d2, Sign::Plus}, {{d1, s1}, {Dimension::Topicality, tau}});
      const double p2 = proportion(ev2, prob_tau * prob_s1 > 0.0);
      for (Sign s2 : {Sign::Plus, Sign::Minus}) {
        const double prob_s2 = s2 == Sign::Plus ? p2 : 1.0 - p2;
        const Sign sign_u = g == Group::TUR ? s1 : s2;
        const Sign sign_r = g == Group::TUR ? s2 : s1;
        cells[JointTable::index(tau, sign_u, sign_r)] = prob_tau * prob_s1 * prob_s2;
      }
    }
  }
  if (!missing.empty()) return JointTable::uniform();  // caller throws
  return JointTable::from_cells(cells);
}

}  // namespace

JointTable::JointTable() { p_.fill(0.125); }

int JointTable::index(Sign t, Sign u, Sign r) {
  return (t == Sign::Minus ? 4 : 0) + (u == Sign::Minus ? 2 : 0) +
         (r == Sign::Minus ? 1 : 0);
}

JointTable JointTable::from_cells(const std::array<double, 8>& cells) {
  JointTable table;
  double total = 0.0;
  for (int i = 0; i < 8; ++i) {
    double p = cells[i];
    if (p < 0.0) {
      if (p < -kInputTol) {
        throw std::domain_error("joint cell " + cell_key(i) + " is negative: " +
                                std::to_string(p));
      }
      p = 0.0;
    }
    table.p_[i] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > kInputTol) {
    throw NormalizationError("joint cells sum to " + std::to_string(total) +
                             ", expected 1 within 1e-9");
  }
  for (double& p : table.p_) p /= total;
  return table;
}

JointTable JointTable::uniform() { return JointTable(); }

double JointTable::cell(Sign t, Sign u, Sign r) const { return p_[index(t, u, r)]; }

double JointTable::prob(const std::vector<Question>& outcomes) const {
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (std::size_t j = i + 1; j < outcomes.size(); ++j) {
      if (outcomes[i].dim == outcomes[j].dim) {
        throw std::invalid_argument("joint probability query repeats a dimension");
      }
    }
  }
  double total = 0.0;
  for (int idx = 0; idx < 8; ++idx) {
    bool match = true;
    for (const Question& q : outcomes) {
      const int bit = q.dim == Dimension::Topicality ? 4
                      : q.dim == Dimension::Understandability ? 2 : 1;
      const Sign s = (idx & bit) ? Sign::Minus : Sign::Plus;
      if (s != q.sign) {
        match = false;
        break;
      }
    }
    if (match) total += p_[idx];
  }
  return total;
}

std::string JointTable::to_json() const {
  json obj;
  for (int i = 0; i < 8; ++i) obj[cell_key(i)] = p_[i];
  return obj.dump(2) + "\n";
}

JointTable JointTable::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError({std::string("invalid JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw SchemaError({"expected a JSON object of joint cells"});
  std::vector<std::string> issues;
  std::array<double, 8> cells{};
  std::array<bool, 8> seen{};
  for (const auto& [key, value] : doc.items()) {
    int idx = -1;
    for (int i = 0; i < 8; ++i) {
      if (key == cell_key(i)) {
        idx = i;
        break;
      }
    }
    if (idx < 0) {
      issues.push_back("unknown joint cell '" + key + "'");
      continue;
    }
    if (!value.is_number()) {
      issues.push_back("cell '" + key + "' must be a number");
      continue;
    }
    cells[idx] = value.get<double>();
    seen[idx] = true;
  }
  for (int i = 0; i < 8; ++i) {
    if (!seen[i]) issues.push_back("missing joint cell '" + cell_key(i) + "'");
  }
  if (!issues.empty()) throw SchemaError(std::move(issues));
  try {
    return from_cells(cells);
  } catch (const std::exception& e) {
    throw SchemaError({e.what()});
  }
}

double bayes_conditional(const JointTable& joint, const Question& target,
                         const std::vector<Question>& given) {
  const double p_given = joint.prob(given);
  if (p_given == 0.0) {
    throw ConditioningError("conditioning event has probability zero");
  }
  std::vector<Question> all = given;
  all.push_back(target);
  return clamp_probability(joint.prob(all) / p_given);
}

JointFit fit_joint_from_sequences(const FrequencyTable& freqs, const std::string& query,
                                  Group designated_order, double smoothing) {
  if (!is_sequence_group(designated_order)) {
    throw std::invalid_argument("designated order must be TUR or TRU");
  }
  if (!(smoothing >= 0.0)) {
    throw std::domain_error("smoothing must be non-negative");
  }
  std::vector<std::string> missing;
  JointFit fit;
  fit.joint = chain_fit(freqs, query, designated_order, smoothing, missing);
  if (!missing.empty()) throw MissingDataError(std::move(missing));

  const Group other = designated_order == Group::TUR ? Group::TRU : Group::TUR;
  std::vector<std::string> other_missing;
  const JointTable other_joint = chain_fit(freqs, query, other, smoothing, other_missing);
  if (other_missing.empty()) {
    double max_diff = 0.0;
    for (int i = 0; i < 8; ++i) {
      max_diff = std::max(max_diff,
                          std::abs(fit.joint.cells()[i] - other_joint.cells()[i]));
    }
    fit.order_inconsistency = max_diff;
  }
  return fit;
}

double bayes_chain_prediction(double p_evidence_given_target, double p_target,
                              double p_evidence) {
  for (double p : {p_evidence_given_target, p_target, p_evidence}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("chain prediction inputs must lie in [0, 1]");
    }
  }
  if (p_evidence == 0.0) {
    throw ConditioningError("chain prediction conditions on zero-probability evidence");
  }
  // Deliberately unclamped: estimates taken from different groups need not be
  // mutually consistent, and a value above 1 is part of the diagnosis.
  return p_evidence_given_target * p_target / p_evidence;
}

}  // namespace qrel

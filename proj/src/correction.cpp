#include "qrel/correction.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrel {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0, 1], got " +
                            std::to_string(p));
  }
}

void check_observation_probs(const ConjDisjObservation& obs) {
  check_probability(obs.p_or, "p_or");
  check_probability(obs.p_and, "p_and");
  check_probability(obs.p_u, "p_u");
  check_probability(obs.p_r, "p_r");
}

}  // namespace

double classical_delta(const ConjDisjObservation& obs) {
  check_observation_probs(obs);
  return obs.p_or + obs.p_and - obs.p_u - obs.p_r;
}

DeltaReport delta_significance(const ConjDisjObservation& obs) {
  check_observation_probs(obs);
  if (obs.n_or <= 0 || obs.n_and <= 0 || obs.n_u <= 0 || obs.n_r <= 0) {
    throw std::invalid_argument("delta significance needs every sample size > 0");
  }
  DeltaReport report;
  report.delta = classical_delta(obs);
  const double var = obs.p_or * (1.0 - obs.p_or) / static_cast<double>(obs.n_or) +
                     obs.p_and * (1.0 - obs.p_and) / static_cast<double>(obs.n_and) +
                     obs.p_u * (1.0 - obs.p_u) / static_cast<double>(obs.n_u) +
                     obs.p_r * (1.0 - obs.p_r) / static_cast<double>(obs.n_r);
  report.std_err = std::sqrt(var);
  if (report.std_err > 0.0) {
    report.z_score = report.delta / report.std_err;
  } else if (report.delta == 0.0) {
    report.z_score = 0.0;
  } else {
    // All four proportions sit at 0 or 1, yet they fail to add up: the
    // discrepancy cannot be sampling noise.
    report.z_score = std::copysign(std::numeric_limits<double>::infinity(), report.delta);
    report.infinite_z = true;
  }
  report.violation = std::abs(report.z_score) > kViolationZ;
  return report;
}

Mat2c quantum_correction_operator(const Projector& p_u, const Projector& p_r) {
  const Mat2c diff = p_u.matrix() - p_r.matrix();
  if (std::abs(diff.det()) < kConstructTol) {
    throw SingularDifferenceError(
        "projector difference is singular; the two outcome rays coincide");
  }
  const Mat2c d = commutator(p_u.matrix(), p_r.matrix()) * diff.inverse();
  if (!d.is_hermitian(kInputTol)) {
    throw InternalConsistencyError("correction operator is not Hermitian");
  }
  return d;
}

double quantum_predicted_delta(const ModelParams& m, Sign sign_u, Sign sign_r) {
  const Projector pu = m.basis(Dimension::Understandability).projector(sign_u);
  const Projector pr = m.basis(Dimension::Reliability).projector(sign_r);
  const Mat2c d = quantum_correction_operator(pu, pr);
  const Complex value = expectation(d, topicality_basis().plus_vec());
  if (std::abs(value.imag()) > kInputTol) {
    throw InternalConsistencyError("correction expectation has imaginary part " +
                                   std::to_string(value.imag()));
  }
  return value.real();
}

ConjunctionFallacyFlags detect_conjunction_fallacy(double p_and, double p_u, double p_r) {
  check_probability(p_and, "p_and");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ConjunctionFallacyFlags flags;
  flags.margin_u = nan;
  flags.margin_r = nan;
  if (!std::isnan(p_u)) {
    check_probability(p_u, "p_u");
    flags.margin_u = p_and - p_u;
    flags.exceeds_u = flags.margin_u > 0.0;
  }
  if (!std::isnan(p_r)) {
    check_probability(p_r, "p_r");
    flags.margin_r = p_and - p_r;
    flags.exceeds_r = flags.margin_r > 0.0;
  }
  return flags;
}

bool DeltaInputs::complete() const {
  for (const auto* cell : {&or_cell, &and_cell, &u_cell, &r_cell}) {
    if (!cell->has_value() || (*cell)->empty_stratum()) return false;
  }
  return true;
}

std::vector<std::string> DeltaInputs::missing() const {
  std::vector<std::string> out;
  const std::pair<const std::optional<FreqCell>*, const char*> parts[] = {
      {&or_cell, "or"}, {&and_cell, "and"}, {&u_cell, "u"}, {&r_cell, "r"}};
  for (const auto& [cell, name] : parts) {
    if (!cell->has_value() || (*cell)->empty_stratum()) out.push_back(name);
  }
  return out;
}

ConjDisjObservation DeltaInputs::to_observation(const std::string& query, Sign sign_u,
                                                Sign sign_r) const {
  if (!complete()) {
    throw MissingDataError(missing());
  }
  ConjDisjObservation obs;
  obs.query_id = query;
  obs.sign_u = sign_u;
  obs.sign_r = sign_r;
  obs.p_or = or_cell->p_hat;
  obs.n_or = or_cell->n;
  obs.p_and = and_cell->p_hat;
  obs.n_and = and_cell->n;
  obs.p_u = u_cell->p_hat;
  obs.n_u = u_cell->n;
  obs.p_r = r_cell->p_hat;
  obs.n_r = r_cell->n;
  return obs;
}

DeltaInputs collect_delta_inputs(const FrequencyTable& freqs, const std::string& query,
                                 Sign sign_u, Sign sign_r) {
  DeltaInputs inputs;
  const Sign tau = Sign::Plus;
  inputs.or_cell =
      freqs.lookup(query, pair_group(false, sign_u, sign_r), pair_event(false, sign_u, sign_r, tau));
  inputs.and_cell =
      freqs.lookup(query, pair_group(true, sign_u, sign_r), pair_event(true, sign_u, sign_r, tau));
  inputs.u_cell = freqs.lookup(
      query, Group::TUR,
      sequential_event({Dimension::Understandability, sign_u}, {{Dimension::Topicality, tau}}));
  inputs.r_cell = freqs.lookup(
      query, Group::TRU,
      sequential_event({Dimension::Reliability, sign_r}, {{Dimension::Topicality, tau}}));
  return inputs;
}

}  // namespace qrel

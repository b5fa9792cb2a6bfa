#include "qrel/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qrel {

namespace {

void check_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0, 1], got " +
                            std::to_string(x));
  }
}

}  // namespace

void ModelParams::validate() const {
  check_unit_interval(t, "t");
  check_unit_interval(u, "u");
  check_unit_interval(r, "r");
  if (!std::isfinite(theta)) throw std::domain_error("theta must be finite");
}

ModelParams ModelParams::normalized() const {
  validate();
  return {t, u, r, normalize_angle(theta)};
}

CognitiveState ModelParams::initial_state() const {
  validate();
  return make_initial_state(t);
}

MeasurementBasis ModelParams::basis(Dimension d) const {
  validate();
  switch (d) {
    case Dimension::Topicality: return topicality_basis();
    case Dimension::Understandability: return understandability_basis(u);
    case Dimension::Reliability: return reliability_basis(r, theta);
  }
  throw std::invalid_argument("unknown dimension");
}

}  // namespace qrel

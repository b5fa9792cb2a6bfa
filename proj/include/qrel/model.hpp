#pragma once

#include "qrel/hilbert.hpp"

namespace qrel {

/// The four scalars that pin down an agent: initial topicality amplitude t and
/// the basis parameters (u, r, theta) of the other two dimensions.
struct ModelParams {
  double t = 1.0;
  double u = 1.0;
  double r = 1.0;
  double theta = 0.0;

  /// Throws std::domain_error when t, u or r leaves [0, 1] or theta is not
  /// finite.
  void validate() const;

  /// Same parameters with theta wrapped into (-pi, pi].
  ModelParams normalized() const;

  CognitiveState initial_state() const;
  MeasurementBasis basis(Dimension d) const;
};

}  // namespace qrel

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrel/data.hpp"
#include "qrel/model.hpp"

namespace qrel {

struct ParamInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Which fitted parameters had to be clamped to their domain (closed form) or
/// finished on the search box boundary (least squares).
struct ClampFlags {
  bool t = false;
  bool u = false;
  bool r = false;
  bool theta = false;

  bool any() const { return t || u || r || theta; }
};

struct FitResult {
  ModelParams params;
  /// Weighted RMS misfit over the sequence-group cells (weights n / (p(1-p)+1e-6)).
  double residual = 0.0;
  ClampFlags clamped;
  /// Bootstrap percentile intervals in the order t, u, r, theta.
  std::optional<std::array<ParamInterval, 4>> ci;
};

/// Model-implied probability of one marginal or sequential event string
/// (e.g. "T+", "R+|U-,T+") for questions asked in the event's order.
double predicted_event_probability(const ModelParams& m, const std::string& event);

/// Weighted RMS discrepancy between the model and every non-empty
/// marginal/sequential cell of the query's sequence groups.
double weighted_residual(const ModelParams& m, const FrequencyTable& freqs,
                         const std::string& query);

/// Inverts the four canonical proportions directly:
///   t = sqrt(P(T+))  pooled over both sequence groups,
///   u = sqrt(P(U+|T+)) from TUR,  r = sqrt(P(R+|T+)) from TRU,
///   cos(theta) from P(R+|U+,T+), clamped into [-1, 1] with a flag.
/// Throws MissingDataError when a required cell is absent or empty and
/// DegenerateParameterError when u or r lands on 0 or 1 (theta undefined).
FitResult closed_form_fit(const FrequencyTable& freqs, const std::string& query);

struct LeastSquaresOptions {
  std::uint64_t seed = 0;         // drives the jittered restarts
  int restarts = 8;               // jittered restarts after the plain start
  int max_evals_per_restart = 10000;
  double step_tol = 1e-9;         // convergence: step sizes below tol * scale
};

/// Derivative-free weighted least squares over the box t, u, r in [0, 1],
/// theta in [0, pi]: cyclic coordinate search with halving steps, restarted
/// from `init` and from jittered copies of it.  Deterministic for a fixed
/// seed.  Throws NonConvergenceError when no restart converges within its
/// evaluation budget.
FitResult least_squares_fit(const FrequencyTable& freqs, const std::string& query,
                            const ModelParams& init,
                            const LeastSquaresOptions& opts = {});

enum class FitMethod { ClosedForm, LeastSquares };

struct BootstrapOptions {
  int replicates = 1000;          // >= 100
  std::uint64_t seed = 0;
  FitMethod method = FitMethod::ClosedForm;
  /// Starting point and budget when method is LeastSquares.
  ModelParams lsq_init{0.5, 0.5, 0.5, 1.5};
  LeastSquaresOptions lsq{};
};

/// Fits the full data, then refits `replicates` resamples (drawn with
/// replacement within each group) and attaches 2.5/97.5 percentile intervals
/// for (t, u, r, theta).  Replicates whose fit fails are redrawn, at most 100
/// extra attempts each.
FitResult bootstrap_ci(const std::vector<JudgementRecord>& records,
                       const std::string& query, const BootstrapOptions& opts = {});

}  // namespace qrel

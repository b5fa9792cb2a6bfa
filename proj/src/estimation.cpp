#include "qrel/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "qrel/measurement.hpp"
#include "qrel/rng.hpp"

namespace qrel {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kWeightEps = 1e-6;

// One fitted cell, reduced to the single transition probability it predicts:
// from the most recent collapse (or the initial state) to the target vector.
struct PreparedObs {
  bool from_initial = true;
  Question from{Dimension::Topicality, Sign::Plus};
  Question target{Dimension::Topicality, Sign::Plus};
  double p_hat = 0.0;
  double weight = 0.0;
};

std::vector<PreparedObs> collect_observations(const FrequencyTable& freqs,
                                              const std::string& query) {
  std::vector<PreparedObs> obs;
  for (const auto& [key, cell] : freqs.cells()) {
    if (key.query_id != query || !is_sequence_group(key.group)) continue;
    if (cell.empty_stratum()) continue;
    const ParsedEvent ev = parse_event(key.event);
    if (ev.is_pair()) continue;
    PreparedObs o;
    o.target = ev.target;
    if (!ev.conditions.empty()) {
      o.from_initial = false;
      o.from = ev.conditions.front();  // conditions are listed most recent first
    }
    o.p_hat = cell.p_hat;
    o.weight = static_cast<double>(cell.n) /
               (cell.p_hat * (1.0 - cell.p_hat) + kWeightEps);
    obs.push_back(o);
  }
  return obs;
}

// All seven basis vectors of a parameter point, built once per objective
// evaluation.
struct BasisCache {
  CognitiveState initial;
  CognitiveState vec[3][2];

  explicit BasisCache(const ModelParams& m) : initial(m.initial_state()) {
    for (Dimension d : {Dimension::Topicality, Dimension::Understandability,
                        Dimension::Reliability}) {
      const MeasurementBasis basis = m.basis(d);
      at(d, Sign::Plus) = basis.plus_vec();
      at(d, Sign::Minus) = basis.minus_vec();
    }
  }

  CognitiveState& at(Dimension d, Sign s) {
    return vec[static_cast<int>(d)][s == Sign::Plus ? 0 : 1];
  }
  const CognitiveState& at(Dimension d, Sign s) const {
    return vec[static_cast<int>(d)][s == Sign::Plus ? 0 : 1];
  }
};

double objective(const ModelParams& m, const std::vector<PreparedObs>& obs) {
  const BasisCache cache(m);
  double total = 0.0;
  for (const auto& o : obs) {
    const CognitiveState& from = o.from_initial ? cache.initial : cache.at(o.from.dim, o.from.sign);
    const double pred = std::norm(inner(cache.at(o.target.dim, o.target.sign), from));
    const double diff = pred - o.p_hat;
    total += o.weight * diff * diff;
  }
  return total;
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

double predicted_event_probability(const ModelParams& m, const std::string& event) {
  const ParsedEvent ev = parse_event(event);
  if (ev.is_pair()) {
    throw std::invalid_argument("no single-sequence prediction for pair event '" +
                                event + "'");
  }
  if (ev.conditions.empty()) {
    return sequence_prob(m, QuestionSequence{ev.target});
  }
  const std::vector<Question> chronological(ev.conditions.rbegin(), ev.conditions.rend());
  return luder_conditional(m, ev.target, chronological);
}

double weighted_residual(const ModelParams& m, const FrequencyTable& freqs,
                         const std::string& query) {
  double total = 0.0;
  double total_weight = 0.0;
  bool any = false;
  for (const auto& [key, cell] : freqs.cells()) {
    if (key.query_id != query || !is_sequence_group(key.group)) continue;
    if (cell.empty_stratum()) continue;
    const ParsedEvent ev = parse_event(key.event);
    if (ev.is_pair()) continue;
    any = true;
    const double pred = predicted_event_probability(m, key.event);
    const double w = static_cast<double>(cell.n) /
                     (cell.p_hat * (1.0 - cell.p_hat) + kWeightEps);
    const double diff = pred - cell.p_hat;
    total += w * diff * diff;
    total_weight += w;
  }
  if (!any) {
    throw std::invalid_argument("no sequence-group cells for query '" + query + "'");
  }
  return std::sqrt(total / total_weight);
}

FitResult closed_form_fit(const FrequencyTable& freqs, const std::string& query) {
  std::vector<std::string> missing;
  auto need = [&](const std::optional<FreqCell>& cell,
                  const std::string& name) -> double {
    if (!cell || cell->empty_stratum()) {
      missing.push_back(name);
      return 0.0;
    }
    return cell->p_hat;
  };

  const std::string ev_u =
      sequential_event({Dimension::Understandability, Sign::Plus},
                       {{Dimension::Topicality, Sign::Plus}});
  const std::string ev_r =
      sequential_event({Dimension::Reliability, Sign::Plus},
                       {{Dimension::Topicality, Sign::Plus}});
  const std::string ev_ru =
      sequential_event({Dimension::Reliability, Sign::Plus},
                       {{Dimension::Understandability, Sign::Plus},
                        {Dimension::Topicality, Sign::Plus}});

  const double p_t = need(
      freqs.pooled(query, {Group::TUR, Group::TRU}, "T+"), "T+ (TUR or TRU)");
  const double p_u = need(freqs.lookup(query, Group::TUR, ev_u), "TUR:" + ev_u);
  const double p_r = need(freqs.lookup(query, Group::TRU, ev_r), "TRU:" + ev_r);
  const double p_ru = need(freqs.lookup(query, Group::TUR, ev_ru), "TUR:" + ev_ru);
  if (!missing.empty()) throw MissingDataError(std::move(missing));

  FitResult result;
  result.params.t = std::sqrt(p_t);
  result.params.u = std::sqrt(p_u);
  result.params.r = std::sqrt(p_r);
  const double u = result.params.u;
  const double r = result.params.r;
  if (u == 0.0 || u == 1.0 || r == 0.0 || r == 1.0) {
    throw DegenerateParameterError(
        "theta is undefined when u or r sits on 0 or 1 (u = " + std::to_string(u) +
        ", r = " + std::to_string(r) + ")");
  }
  const double cu = 1.0 - u * u;
  const double cr = 1.0 - r * r;
  const double raw_cos =
      (p_ru - u * u * r * r - cu * cr) / (2.0 * u * r * std::sqrt(cu * cr));
  double cos_theta = raw_cos;
  if (cos_theta > 1.0) {
    cos_theta = 1.0;
    result.clamped.theta = true;
  } else if (cos_theta < -1.0) {
    cos_theta = -1.0;
    result.clamped.theta = true;
  }
  result.params.theta = std::acos(cos_theta);
  result.residual = weighted_residual(result.params, freqs, query);
  return result;
}

FitResult least_squares_fit(const FrequencyTable& freqs, const std::string& query,
                            const ModelParams& init, const LeastSquaresOptions& opts) {
  const auto obs = collect_observations(freqs, query);
  if (obs.size() < 4) {
    throw MissingDataError({"need at least 4 non-empty sequence-group cells, have " +
                            std::to_string(obs.size())});
  }
  if (opts.restarts < 0 || opts.max_evals_per_restart < 1) {
    throw std::invalid_argument("bad least-squares options");
  }

  const ModelParams base_params = init.normalized();
  const std::array<double, 4> base{base_params.t, base_params.u, base_params.r,
                                   std::abs(base_params.theta)};
  constexpr std::array<double, 4> lo{0.0, 0.0, 0.0, 0.0};
  constexpr std::array<double, 4> hi{1.0, 1.0, 1.0, kPi};
  constexpr std::array<double, 4> scale{1.0, 1.0, 1.0, kPi};

  auto eval = [&](const std::array<double, 4>& x) {
    return objective({x[0], x[1], x[2], x[3]}, obs);
  };

  bool have_best = false;
  std::array<double, 4> best_x{};
  double best_f = 0.0;

  for (int restart = 0; restart <= opts.restarts; ++restart) {
    std::array<double, 4> x = base;
    if (restart > 0) {
      RandomStream jitter(derive_seed(opts.seed, static_cast<std::uint64_t>(restart)));
      for (int d = 0; d < 4; ++d) {
        x[d] = std::clamp(x[d] + (jitter.uniform01() - 0.5) * 0.5 * scale[d],
                          lo[d], hi[d]);
      }
    }

    // Cyclic coordinate search with halving steps: deterministic, no
    // gradients, respects the box by construction.
    std::array<double, 4> step;
    for (int d = 0; d < 4; ++d) step[d] = 0.25 * scale[d];
    double fx = eval(x);
    int evals = 1;
    bool converged = false;
    while (evals < opts.max_evals_per_restart) {
      bool moved = false;
      for (int d = 0; d < 4 && evals < opts.max_evals_per_restart; ++d) {
        for (double dir : {1.0, -1.0}) {
          std::array<double, 4> cand = x;
          cand[d] = std::clamp(x[d] + dir * step[d], lo[d], hi[d]);
          if (cand[d] == x[d]) continue;
          const double fc = eval(cand);
          ++evals;
          if (fc < fx) {
            x = cand;
            fx = fc;
            moved = true;
            break;
          }
          if (evals >= opts.max_evals_per_restart) break;
        }
      }
      if (!moved) {
        bool done = true;
        for (int d = 0; d < 4; ++d) {
          step[d] *= 0.5;
          if (step[d] >= opts.step_tol * scale[d]) done = false;
        }
        if (done) {
          converged = true;
          break;
        }
      }
    }
    if (converged && (!have_best || fx < best_f)) {
      have_best = true;
      best_x = x;
      best_f = fx;
    }
  }

  if (!have_best) {
    throw NonConvergenceError(
        "no restart converged within " + std::to_string(opts.max_evals_per_restart) +
        " evaluations");
  }

  FitResult result;
  result.params = {best_x[0], best_x[1], best_x[2], best_x[3]};
  result.clamped.t = best_x[0] == lo[0] || best_x[0] == hi[0];
  result.clamped.u = best_x[1] == lo[1] || best_x[1] == hi[1];
  result.clamped.r = best_x[2] == lo[2] || best_x[2] == hi[2];
  result.clamped.theta = best_x[3] == lo[3] || best_x[3] == hi[3];
  result.residual = weighted_residual(result.params, freqs, query);
  return result;
}

FitResult bootstrap_ci(const std::vector<JudgementRecord>& records,
                       const std::string& query, const BootstrapOptions& opts) {
  if (opts.replicates < 100) {
    throw std::invalid_argument("bootstrap needs at least 100 replicates");
  }
  std::vector<JudgementRecord> mine;
  for (const auto& rec : records) {
    if (rec.query_id == query) mine.push_back(rec);
  }
  if (mine.empty()) {
    throw MissingDataError({"no records for query '" + query + "'"});
  }

  // One fitter seed for the point fit and every replicate: the fit is a pure
  // function of the table, so identical resamples refit identically and the
  // intervals reflect sampling variation alone.
  auto fit_table = [&](const FrequencyTable& table) -> FitResult {
    if (opts.method == FitMethod::ClosedForm) return closed_form_fit(table, query);
    LeastSquaresOptions lsq = opts.lsq;
    lsq.seed = opts.seed;
    return least_squares_fit(table, query, opts.lsq_init, lsq);
  };

  FitResult point = fit_table(aggregate(mine));

  std::map<Group, std::vector<const JudgementRecord*>> by_group;
  for (const auto& rec : mine) by_group[rec.group].push_back(&rec);

  std::array<std::vector<double>, 4> samples;
  for (auto& s : samples) s.reserve(static_cast<std::size_t>(opts.replicates));

  for (int b = 1; b <= opts.replicates; ++b) {
    bool done = false;
    for (int attempt = 0; attempt <= 100 && !done; ++attempt) {
      const std::uint64_t seed_b = derive_seed(
          opts.seed, static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(attempt));
      RandomStream draw(seed_b);
      std::vector<JudgementRecord> resampled;
      resampled.reserve(mine.size());
      for (const auto& [group, rows] : by_group) {
        const std::size_t n = rows.size();
        for (std::size_t i = 0; i < n; ++i) {
          const auto idx = std::min(
              n - 1, static_cast<std::size_t>(draw.uniform01() * static_cast<double>(n)));
          resampled.push_back(*rows[idx]);
        }
      }
      try {
        const FitResult fit = fit_table(aggregate(resampled));
        samples[0].push_back(fit.params.t);
        samples[1].push_back(fit.params.u);
        samples[2].push_back(fit.params.r);
        samples[3].push_back(fit.params.theta);
        done = true;
      } catch (const Error&) {
        // Degenerate or incomplete resample: redraw with a fresh sub-seed.
      }
    }
    if (!done) {
      throw NonConvergenceError("bootstrap replicate " + std::to_string(b) +
                                " kept failing after 100 redraws");
    }
  }

  std::array<ParamInterval, 4> ci;
  for (int p = 0; p < 4; ++p) {
    ci[p] = {percentile(samples[p], 0.025), percentile(samples[p], 0.975)};
  }
  point.ci = ci;
  return point;
}

}  // namespace qrel

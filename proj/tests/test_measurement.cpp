#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <complex>

#include "qrel/measurement.hpp"
#include "qrel/rng.hpp"

using namespace qrel;

namespace {

constexpr double kPi = 3.14159265358979323846;

const Question kTplus{Dimension::Topicality, Sign::Plus};
const Question kUplus{Dimension::Understandability, Sign::Plus};
const Question kUminus{Dimension::Understandability, Sign::Minus};
const Question kRplus{Dimension::Reliability, Sign::Plus};

// Oracle that never touches the library's state machinery: raw
// complex arithmetic on the defining amplitudes.
double oracle_chain_tur_ppp(double t, double u, double r, double theta) {
  using C = std::complex<double>;
  const C t_plus[2] = {1.0, 0.0};
  const C u_plus[2] = {u, std::sqrt(1.0 - u * u)};
  const C r_plus[2] = {r, std::sqrt(1.0 - r * r) * std::exp(C(0.0, theta))};
  auto braket = [](const C a[2], const C b[2]) {
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
  };
  const double p_t = t * t;
  const double p_ut = std::norm(braket(u_plus, t_plus));
  const double p_ru = std::norm(braket(r_plus, u_plus));
  return p_t * p_ut * p_ru;
}

}  // namespace

TEST_CASE("question sequences reject repeats, emptiness and overlength") {
  CHECK_THROWS_AS(QuestionSequence({kUplus, kUminus}), std::invalid_argument);
  CHECK_THROWS_AS(QuestionSequence(std::vector<Question>{}), std::invalid_argument);
  CHECK_THROWS_AS(QuestionSequence({kTplus, kUplus, kRplus, kTplus}),
                  std::invalid_argument);
  CHECK_NOTHROW(QuestionSequence({kTplus, kUplus, kRplus}));
}

TEST_CASE("sequence probability is the product of squared transition amplitudes") {
  const ModelParams m{0.6, 0.8, 0.6, kPi / 2.0};
  CHECK(std::abs(sequence_prob(m, {kTplus, kUplus}) - 0.2304) <= 1e-12);
  CHECK(std::abs(sequence_prob({1.0, 0.3, 0.9, 1.0}, {kTplus}) - 1.0) <= 1e-12);

  const double p = sequence_prob(m, {kTplus, kUplus, kRplus});
  CHECK(std::abs(p - 0.10616832) <= 1e-12);
  CHECK(std::abs(p - oracle_chain_tur_ppp(0.6, 0.8, 0.6, kPi / 2.0)) <= 1e-12);
}

TEST_CASE("sequence probability with one question equals the transition probability") {
  RandomStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const ModelParams m{rng.uniform01(), rng.uniform01(), rng.uniform01(),
                        (rng.uniform01() * 2.0 - 1.0) * kPi};
    const Question q{Dimension::Understandability,
                     rng.bernoulli(0.5) ? Sign::Plus : Sign::Minus};
    const double via_seq = sequence_prob(m, QuestionSequence{q});
    const double direct = transition_prob(
        m.basis(q.dim).outcome(q.sign), m.initial_state());
    CHECK(std::abs(via_seq - direct) <= 1e-12);
  }
}

TEST_CASE("conditionals depend only on the last collapsed outcome") {
  const ModelParams m{0.6, 0.8, 0.6, 0.4};
  CHECK(std::abs(luder_conditional(m, kUplus, {kTplus}) - 0.64) <= 1e-12);
  CHECK(std::abs(luder_conditional(m, kRplus, {kTplus}) - 0.36) <= 1e-12);
  // Two histories ending in the same collapse give the same conditional.
  const double direct = luder_conditional(m, kRplus, {kUplus});
  const double with_history = luder_conditional(m, kRplus, {kTplus, kUplus});
  CHECK(std::abs(direct - with_history) <= 1e-12);
  // Empty history conditions on the initial state.
  CHECK(std::abs(luder_conditional(m, kTplus, {}) - 0.36) <= 1e-12);
  CHECK_THROWS_AS(luder_conditional(m, kUplus, {kUminus}), std::invalid_argument);
}

TEST_CASE("conditional outcome pairs sum to one") {
  RandomStream rng(19);
  for (int i = 0; i < 100; ++i) {
    const ModelParams m{rng.uniform01(), rng.uniform01(), rng.uniform01(),
                        (rng.uniform01() * 2.0 - 1.0) * kPi};
    const double plus = luder_conditional(m, kRplus, {kUplus, kTplus});
    const double minus =
        luder_conditional(m, {Dimension::Reliability, Sign::Minus}, {kUplus, kTplus});
    CHECK(std::abs(plus + minus - 1.0) <= 1e-12);
  }
}

TEST_CASE("closed-form conditional reproduces its defining cases") {
  CHECK(std::abs(cond_reliability_closed_form(0.7, 0.7, 0.0) - 1.0) <= 1e-12);
  CHECK(std::abs(cond_reliability_closed_form(0.8, 0.6, kPi)) <= 1e-12);
  CHECK(std::abs(cond_reliability_closed_form(0.8, 0.6, kPi / 2.0) - 0.4608) <= 1e-12);
  CHECK_THROWS_AS(cond_reliability_closed_form(1.2, 0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(cond_reliability_closed_form(0.5, -0.1, 0.0), std::domain_error);
}

TEST_CASE("closed form equals the matrix path on a parameter grid") {
  for (int iu = 0; iu <= 20; ++iu) {
    for (int ir = 0; ir <= 20; ++ir) {
      for (int it = 0; it <= 20; ++it) {
        const double u = iu / 20.0;
        const double r = ir / 20.0;
        const double theta = -kPi + 2.0 * kPi * it / 20.0;
        const double matrix_path = transition_prob(
            reliability_basis(r, theta).plus_vec(),
            understandability_basis(u).plus_vec());
        CHECK(std::abs(cond_reliability_closed_form(u, r, theta) - matrix_path) <=
              1e-12);
      }
    }
  }
}

TEST_CASE("order effect gap matches the overlap formula and vanishes when it should") {
  CHECK(std::abs(order_effect_gap({0.5, 0.7, 0.7, 1.0},
                                  Dimension::Understandability,
                                  Dimension::Reliability)) <= 1e-12);
  CHECK(std::abs(order_effect_gap({0.5, 1.0, 0.6, 0.0},
                                  Dimension::Understandability,
                                  Dimension::Reliability) -
                 0.2304) <= 1e-12);
  CHECK(std::abs(order_effect_gap({0.5, 0.8, 0.6, kPi / 2.0},
                                  Dimension::Understandability,
                                  Dimension::Reliability) -
                 0.129024) <= 1e-12);
  // Orthogonal rays (|R+> = |U-> direction): projectors commute, gap vanishes
  // even though u differs from r.
  CHECK(std::abs(order_effect_gap({0.5, 0.8, 0.6, kPi},
                                  Dimension::Understandability,
                                  Dimension::Reliability)) <= 1e-12);
  // Antisymmetry in the dimension arguments.
  const ModelParams m{0.5, 0.9, 0.4, 0.7};
  CHECK(std::abs(order_effect_gap(m, Dimension::Understandability, Dimension::Reliability) +
                 order_effect_gap(m, Dimension::Reliability, Dimension::Understandability)) <=
        1e-12);
  CHECK_THROWS_AS(order_effect_gap(m, Dimension::Reliability, Dimension::Reliability),
                  std::invalid_argument);
}

TEST_CASE("full distribution enumerates all eight paths and sums to one") {
  const std::array<Dimension, 3> tur{Dimension::Topicality,
                                     Dimension::Understandability,
                                     Dimension::Reliability};
  const OutcomeDistribution deterministic =
      full_distribution({1.0, 1.0, 0.3, 0.2}, tur);
  CHECK(std::abs(deterministic.at("T+U+R+") + deterministic.at("T+U+R-") - 1.0) <=
        1e-12);
  CHECK(deterministic.at("T-U+R+") == 0.0);
  CHECK(deterministic.at("T+U-R-") == 0.0);

  const OutcomeDistribution d = full_distribution({0.6, 0.8, 0.6, kPi / 2.0}, tur);
  CHECK(std::abs(d.at("T+U+R+") - 0.10616832) <= 1e-12);
  CHECK(d.probabilities().size() == 8);

  RandomStream rng(37);
  for (int i = 0; i < 200; ++i) {
    const ModelParams m{rng.uniform01(), rng.uniform01(), rng.uniform01(),
                        (rng.uniform01() * 2.0 - 1.0) * kPi};
    CHECK(std::abs(full_distribution(m, tur).sum() - 1.0) <= 1e-12);
  }

  const std::array<Dimension, 3> bad{Dimension::Topicality, Dimension::Topicality,
                                     Dimension::Reliability};
  CHECK_THROWS_AS(full_distribution({0.5, 0.5, 0.5, 0.0}, bad), std::invalid_argument);
}

TEST_CASE("full distribution respects the requested measurement order") {
  const std::array<Dimension, 3> rut{Dimension::Reliability,
                                     Dimension::Understandability,
                                     Dimension::Topicality};
  const OutcomeDistribution d = full_distribution({0.6, 0.8, 0.6, 0.9}, rut);
  CHECK(d.probabilities().count("R+U+T+") == 1);
  CHECK(d.probabilities().count("T+U+R+") == 0);
}

TEST_CASE("outcome distribution construction enforces normalization") {
  CHECK_THROWS_AS(OutcomeDistribution({{"A", 0.5}, {"B", 0.6}}),
                  InternalConsistencyError);
  CHECK_THROWS_AS(OutcomeDistribution({{"A", -0.2}, {"B", 1.2}}),
                  InternalConsistencyError);
  const OutcomeDistribution ok({{"A", 0.25}, {"B", 0.75}});
  CHECK_THROWS_AS(ok.at("C"), std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "qrel/classical.hpp"
#include "qrel/measurement.hpp"
#include "qrel/simulate.hpp"

using namespace qrel;

namespace {

constexpr double kPi = 3.14159265358979323846;

const Question kTPlus{Dimension::Topicality, Sign::Plus};
const Question kTMinus{Dimension::Topicality, Sign::Minus};
const Question kUPlus{Dimension::Understandability, Sign::Plus};
const Question kRPlus{Dimension::Reliability, Sign::Plus};

// Product joint from independent per-dimension probabilities.
JointTable independent_joint(double p_t, double p_u, double p_r) {
  std::array<double, 8> cells{};
  for (Sign t : {Sign::Plus, Sign::Minus}) {
    for (Sign u : {Sign::Plus, Sign::Minus}) {
      for (Sign r : {Sign::Plus, Sign::Minus}) {
        cells[JointTable::index(t, u, r)] = (t == Sign::Plus ? p_t : 1.0 - p_t) *
                                            (u == Sign::Plus ? p_u : 1.0 - p_u) *
                                            (r == Sign::Plus ? p_r : 1.0 - p_r);
      }
    }
  }
  return JointTable::from_cells(cells);
}

FrequencyTable simulate_sequences(const Protocol& base) {
  Protocol protocol = base;
  return aggregate(run_protocol(protocol));
}

}  // namespace

TEST_CASE("uniform table gives even conditionals") {
  const JointTable joint;  // default-constructed = uniform
  CHECK(joint.cell(Sign::Plus, Sign::Minus, Sign::Plus) == 0.125);
  CHECK(bayes_conditional(joint, kUPlus, {kTPlus}) == 0.5);
  CHECK(bayes_conditional(joint, kRPlus, {kUPlus, kTMinus}) == 0.5);
}

TEST_CASE("joint probabilities factor for an independent table") {
  const JointTable joint = independent_joint(0.5, 0.6, 0.3);
  CHECK(std::abs(joint.prob({kUPlus, kRPlus}) - 0.18) <= 1e-12);
  CHECK(std::abs(bayes_conditional(joint, kUPlus, {kTPlus}) - 0.6) <= 1e-12);
  CHECK(std::abs(bayes_conditional(joint, kRPlus, {kUPlus, kTPlus}) - 0.3) <= 1e-12);
  // Conditioning order is irrelevant.
  CHECK(bayes_conditional(joint, kRPlus, {kUPlus, kTPlus}) ==
        bayes_conditional(joint, kRPlus, {kTPlus, kUPlus}));
  CHECK(joint.prob({}) == 1.0);
  CHECK_THROWS_AS(joint.prob({kUPlus, kUPlus}), std::invalid_argument);
}

TEST_CASE("table construction validates cells") {
  std::array<double, 8> cells{};
  cells[0] = 1.0 + 1e-13;
  cells[1] = -1e-13;  // rounding-sized negative is forgiven
  const JointTable ok = JointTable::from_cells(cells);
  CHECK(ok.cells()[1] == 0.0);
  CHECK(std::abs(ok.cells()[0] - 1.0) <= 1e-12);

  cells[1] = -0.01;
  CHECK_THROWS_AS(JointTable::from_cells(cells), std::domain_error);
  cells[1] = 0.5;  // sum now 1.5
  CHECK_THROWS_AS(JointTable::from_cells(cells), NormalizationError);
}

TEST_CASE("conditioning on a null event fails loudly") {
  std::array<double, 8> cells{};
  cells[JointTable::index(Sign::Plus, Sign::Plus, Sign::Plus)] = 1.0;
  const JointTable joint = JointTable::from_cells(cells);
  CHECK_THROWS_AS(bayes_conditional(joint, kUPlus, {kTMinus}), ConditioningError);
}

TEST_CASE("json round trip and schema errors") {
  const JointTable joint = independent_joint(0.4, 0.7, 0.2);
  const JointTable back = JointTable::from_json(joint.to_json());
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(back.cells()[i] - joint.cells()[i]) <= 1e-12);
  }

  CHECK_THROWS_AS(JointTable::from_json("not json"), SchemaError);
  CHECK_THROWS_AS(JointTable::from_json("[1,2]"), SchemaError);
  try {
    JointTable::from_json(R"({"T+U+R+": 0.5, "bogus": 0.5})");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    bool saw_unknown = false, saw_missing = false;
    for (const std::string& issue : e.issues()) {
      if (issue.find("unknown joint cell 'bogus'") != std::string::npos)
        saw_unknown = true;
      if (issue.find("missing joint cell 'T-U-R-'") != std::string::npos)
        saw_missing = true;
    }
    CHECK(saw_unknown);
    CHECK(saw_missing);
  }
}

TEST_CASE("chain fit reproduces a deterministic all-plus sample") {
  FrequencyTable freqs;
  freqs.set("q1", Group::TUR, "T+", 100, 100);
  freqs.set("q1", Group::TUR, "U+|T+", 100, 100);
  freqs.set("q1", Group::TUR, "R+|U+,T+", 100, 100);
  const JointFit fit = fit_joint_from_sequences(freqs, "q1");
  CHECK(fit.joint.cell(Sign::Plus, Sign::Plus, Sign::Plus) == 1.0);
  CHECK_FALSE(fit.order_inconsistency.has_value());  // no TRU group to compare
}

TEST_CASE("chain fit names every required cell it cannot find") {
  FrequencyTable freqs;
  freqs.set("q1", Group::TUR, "T+", 100, 100);
  try {
    fit_joint_from_sequences(freqs, "q1");
    FAIL("expected MissingDataError");
  } catch (const MissingDataError& e) {
    const std::string what = e.what();
    CHECK(what.find("TUR:U+|T+") != std::string::npos);
    CHECK(what.find("TUR:R+|U-,T+") != std::string::npos);
    // Zero-probability strata are not required.
    CHECK(what.find("U+|T-") == std::string::npos);
  }
}

TEST_CASE("smoothing turns empty strata into half counts") {
  FrequencyTable freqs;
  freqs.set("q1", Group::TUR, "T+", 100, 100);
  freqs.set("q1", Group::TUR, "U+|T+", 80, 100);
  freqs.set("q1", Group::TUR, "R+|U+,T+", 60, 80);
  freqs.set("q1", Group::TUR, "R+|U-,T+", 10, 20);
  freqs.set("q1", Group::TUR, "U+|T-", 0, 0);
  freqs.set("q1", Group::TUR, "R+|U+,T-", 0, 0);
  freqs.set("q1", Group::TUR, "R+|U-,T-", 0, 0);

  const JointFit plain = fit_joint_from_sequences(freqs, "q1");
  CHECK(std::abs(plain.joint.cell(Sign::Plus, Sign::Plus, Sign::Plus) - 0.6) <= 1e-12);
  CHECK(std::abs(plain.joint.cell(Sign::Plus, Sign::Minus, Sign::Plus) - 0.1) <= 1e-12);
  CHECK(plain.joint.cell(Sign::Minus, Sign::Plus, Sign::Plus) == 0.0);

  const JointFit smoothed = fit_joint_from_sequences(freqs, "q1", Group::TUR, 1.0);
  const double p_t = 101.0 / 102.0;
  CHECK(std::abs(smoothed.joint.cell(Sign::Minus, Sign::Plus, Sign::Plus) -
                 (1.0 - p_t) * 0.25) <= 1e-12);

  CHECK_THROWS_AS(fit_joint_from_sequences(freqs, "q1", Group::TUR, -0.5),
                  std::domain_error);
  CHECK_THROWS_AS(fit_joint_from_sequences(freqs, "q1", Group::ConjPP),
                  std::invalid_argument);
}

TEST_CASE("any joint-table conditional set has zero additivity defect") {
  const JointTable joint = independent_joint(0.45, 0.37, 0.82);
  const double p_u = bayes_conditional(joint, kUPlus, {kTPlus});
  const double p_r = bayes_conditional(joint, kRPlus, {kTPlus});
  const double p_and = joint.prob({kUPlus, kRPlus, kTPlus}) / joint.prob({kTPlus});
  const double p_or = p_u + p_r - p_and;
  CHECK(std::abs((p_or + p_and) - (p_u + p_r)) <= 1e-12);
}

TEST_CASE("chain fit recovers the generating joint from classical agents") {
  const JointTable truth = JointTable::from_cells(
      {0.20, 0.05, 0.15, 0.10, 0.08, 0.12, 0.22, 0.08});
  Protocol protocol;
  protocol.classical = ClassicalAgentConfig{truth};
  protocol.seed = 7001;
  protocol.group_sizes[static_cast<int>(Group::TUR)] = 100000;
  protocol.group_sizes[static_cast<int>(Group::TRU)] = 100000;

  const FrequencyTable freqs = simulate_sequences(protocol);
  const JointFit fit = fit_joint_from_sequences(freqs, "q1");
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(fit.joint.cells()[i] - truth.cells()[i]) <= 0.01);
  }
  REQUIRE(fit.order_inconsistency.has_value());
  // Classical data carries no order effect beyond sampling noise.
  CHECK(*fit.order_inconsistency <= 0.02);
}

TEST_CASE("quantum data splits the two order-specific fits apart") {
  Protocol protocol;
  protocol.quantum = QuantumAgentConfig{ModelParams{0.8, 0.98, 0.8, kPi}};
  protocol.seed = 7002;
  protocol.group_sizes[static_cast<int>(Group::TUR)] = 100000;
  protocol.group_sizes[static_cast<int>(Group::TRU)] = 100000;

  const FrequencyTable freqs = simulate_sequences(protocol);
  const JointFit fit = fit_joint_from_sequences(freqs, "q1");
  REQUIRE(fit.order_inconsistency.has_value());
  CHECK(*fit.order_inconsistency > 0.05);

  // Cross-order chain prediction of P(R+|U+,T+) from TRU ingredients misses
  // the collapse value by a wide margin, while the direct measurement hits it.
  const double emp_target = freqs.lookup("q1", Group::TUR, "R+|U+,T+")->p_hat;
  const double truth = cond_reliability_closed_form(0.98, 0.8, kPi);
  CHECK(std::abs(emp_target - truth) <= 0.02);

  const double p_u_given_r = freqs.lookup("q1", Group::TRU, "U+|R+,T+")->p_hat;
  const double p_r = freqs.lookup("q1", Group::TRU, "R+|T+")->p_hat;
  const double p_u = freqs.lookup("q1", Group::TUR, "U+|T+")->p_hat;
  const double bayes = bayes_chain_prediction(p_u_given_r, p_r, p_u);
  CHECK(std::abs(emp_target - bayes) > 0.1);
}

TEST_CASE("chain prediction is the plain Bayes ratio, unclamped") {
  CHECK(std::abs(bayes_chain_prediction(0.5, 0.4, 0.8) - 0.25) <= 1e-12);
  CHECK(std::abs(bayes_chain_prediction(0.9, 0.8, 0.5) - 1.44) <= 1e-12);
  CHECK_THROWS_AS(bayes_chain_prediction(0.9, 0.8, 0.0), ConditioningError);
  CHECK_THROWS_AS(bayes_chain_prediction(1.2, 0.8, 0.5), std::domain_error);
}

#include "qrel/simulate.hpp"

#include <stdexcept>

namespace qrel {

namespace {

// Measure one dimension: draw the outcome and collapse the state onto it.
Sign measure(const ModelParams& m, Dimension dim, CognitiveState& state,
             RandomStream& stream) {
  const MeasurementBasis basis = m.basis(dim);
  const double p_plus = transition_prob(basis.plus_vec(), state);
  const Sign outcome = stream.bernoulli(p_plus) ? Sign::Plus : Sign::Minus;
  state = basis.outcome(outcome);
  return outcome;
}

Sign classical_draw(const JointTable& joint, RandomStream& stream, Sign& u_out,
                    Sign& r_out) {
  const double x = stream.uniform01();
  double cum = 0.0;
  int chosen = 7;
  for (int idx = 0; idx < 8; ++idx) {
    cum += joint.cells()[idx];
    if (x < cum) {
      chosen = idx;
      break;
    }
  }
  u_out = (chosen & 2) ? Sign::Minus : Sign::Plus;
  r_out = (chosen & 1) ? Sign::Minus : Sign::Plus;
  return (chosen & 4) ? Sign::Minus : Sign::Plus;
}

JudgementRecord simulate_quantum_agent(const QuantumAgentConfig& cfg, Group group,
                                       RandomStream& stream) {
  JudgementRecord rec;
  rec.group = group;
  CognitiveState state = cfg.model.initial_state();
  rec.topicality = measure(cfg.model, Dimension::Topicality, state, stream);

  if (is_sequence_group(group)) {
    const Dimension first = group == Group::TUR ? Dimension::Understandability
                                                : Dimension::Reliability;
    const Dimension second = group == Group::TUR ? Dimension::Reliability
                                                 : Dimension::Understandability;
    const Sign s1 = measure(cfg.model, first, state, stream);
    const Sign s2 = measure(cfg.model, second, state, stream);
    const QuestionTag tag1 = group == Group::TUR ? QuestionTag::U : QuestionTag::R;
    const QuestionTag tag2 = group == Group::TUR ? QuestionTag::R : QuestionTag::U;
    rec.answers = {{tag1, s1}, {tag2, s2}};
  } else {
    const bool conj = is_conjunction_group(group);
    const Sign response =
        quantum_conj_disj_response(cfg.model, state, group_sign_u(group),
                                   group_sign_r(group), conj, cfg.paired_order, stream);
    rec.answers = {{conj ? QuestionTag::And : QuestionTag::Or, response}};
  }
  return rec;
}

JudgementRecord simulate_classical_agent(const ClassicalAgentConfig& cfg, Group group,
                                         RandomStream& stream) {
  JudgementRecord rec;
  rec.group = group;
  Sign u = Sign::Plus;
  Sign r = Sign::Plus;
  rec.topicality = classical_draw(cfg.joint, stream, u, r);

  if (group == Group::TUR) {
    rec.answers = {{QuestionTag::U, u}, {QuestionTag::R, r}};
  } else if (group == Group::TRU) {
    rec.answers = {{QuestionTag::R, r}, {QuestionTag::U, u}};
  } else {
    const bool conj = is_conjunction_group(group);
    const bool match_u = u == group_sign_u(group);
    const bool match_r = r == group_sign_r(group);
    const bool yes = conj ? (match_u && match_r) : (match_u || match_r);
    rec.answers = {{conj ? QuestionTag::And : QuestionTag::Or,
                    yes ? Sign::Plus : Sign::Minus}};
  }
  return rec;
}

}  // namespace

void Protocol::validate() const {
  if (query_id.empty()) throw std::invalid_argument("protocol needs a query id");
  if (quantum.has_value() == classical.has_value()) {
    throw std::invalid_argument(
        "protocol needs exactly one of a quantum or a classical agent config");
  }
  if (quantum) quantum->model.validate();
  long total = 0;
  for (int n : group_sizes) {
    if (n < 0) throw std::invalid_argument("group sizes must be non-negative");
    total += n;
  }
  if (total == 0) throw std::invalid_argument("protocol simulates zero agents");
}

std::array<int, kGroupCount> Protocol::uniform_sizes(int per_group) {
  if (per_group < 0) throw std::invalid_argument("group size must be non-negative");
  std::array<int, kGroupCount> sizes;
  sizes.fill(per_group);
  return sizes;
}

Sign quantum_conj_disj_response(const ModelParams& m, const CognitiveState& prepared,
                                Sign sign_u, Sign sign_r, bool conjunction,
                                PairedOrder order, RandomStream& stream) {
  bool u_first = true;
  switch (order) {
    case PairedOrder::UThenR: u_first = true; break;
    case PairedOrder::RThenU: u_first = false; break;
    case PairedOrder::RandomizedPerAgent: u_first = stream.bernoulli(0.5); break;
  }
  CognitiveState state = prepared;
  Sign out_u = Sign::Plus;
  Sign out_r = Sign::Plus;
  if (u_first) {
    out_u = measure(m, Dimension::Understandability, state, stream);
    out_r = measure(m, Dimension::Reliability, state, stream);
  } else {
    out_r = measure(m, Dimension::Reliability, state, stream);
    out_u = measure(m, Dimension::Understandability, state, stream);
  }
  const bool match_u = out_u == sign_u;
  const bool match_r = out_r == sign_r;
  const bool yes = conjunction ? (match_u && match_r) : (match_u || match_r);
  return yes ? Sign::Plus : Sign::Minus;
}

std::vector<JudgementRecord> run_protocol(const Protocol& protocol) {
  protocol.validate();
  std::vector<JudgementRecord> records;
  long total = 0;
  for (int n : protocol.group_sizes) total += n;
  records.reserve(static_cast<std::size_t>(total));

  for (int gi = 0; gi < kGroupCount; ++gi) {
    const Group group = kAllGroups[static_cast<std::size_t>(gi)];
    const std::string group_name = to_string(group);
    for (int i = 0; i < protocol.group_sizes[static_cast<std::size_t>(gi)]; ++i) {
      RandomStream stream(derive_seed(protocol.seed, static_cast<std::uint64_t>(gi),
                                      static_cast<std::uint64_t>(i)));
      JudgementRecord rec =
          protocol.quantum
              ? simulate_quantum_agent(*protocol.quantum, group, stream)
              : simulate_classical_agent(*protocol.classical, group, stream);
      rec.query_id = protocol.query_id;
      rec.participant_id = group_name + "-" + std::to_string(i + 1);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace qrel

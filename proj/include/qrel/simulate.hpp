#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrel/classical.hpp"
#include "qrel/model.hpp"
#include "qrel/rng.hpp"

namespace qrel {

/// How a simulated quantum agent answers a conjunction/disjunction question:
/// it measures U and R sequentially (collapse included) and combines the two
/// outcomes logically.  The order of that internal pair is either randomized
/// per agent (default) or fixed.
enum class PairedOrder { RandomizedPerAgent, UThenR, RThenU };

struct QuantumAgentConfig {
  ModelParams model;
  PairedOrder paired_order = PairedOrder::RandomizedPerAgent;
};

struct ClassicalAgentConfig {
  JointTable joint = JointTable::uniform();
};

/// One simulated experiment: a population per group answering one query,
/// with either quantum (collapse) agents or classical (joint-table) agents.
struct Protocol {
  std::string query_id = "q1";
  /// Agents per group, indexed like kAllGroups.  Groups may be 0 (absent).
  std::array<int, kGroupCount> group_sizes{};
  std::optional<QuantumAgentConfig> quantum;
  std::optional<ClassicalAgentConfig> classical;
  std::uint64_t seed = 0;

  /// Exactly one of quantum/classical must be set, sizes non-negative with a
  /// positive total, non-empty query id.
  void validate() const;

  static std::array<int, kGroupCount> uniform_sizes(int per_group);
};

/// Measures U and R sequentially from `prepared` (the agent's post-topicality
/// state) and combines the outcomes with AND/OR against the asked signs.
/// Consumes one extra draw first when the order is randomized.
Sign quantum_conj_disj_response(const ModelParams& m, const CognitiveState& prepared,
                                Sign sign_u, Sign sign_r, bool conjunction,
                                PairedOrder order, RandomStream& stream);

/// Runs every agent of every group and returns their records in a fixed
/// canonical order (groups in kAllGroups order, agents by index).  Each agent
/// draws from its own stream seeded by (seed, group, agent index), so results
/// are byte-identical across runs and platforms for a fixed protocol.
std::vector<JudgementRecord> run_protocol(const Protocol& protocol);

}  // namespace qrel

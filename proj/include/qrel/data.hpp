#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qrel/hilbert.hpp"

namespace qrel {

/// Between-subjects condition an agent was assigned to.  TUR and TRU answer
/// the three single questions in that order; the other eight answer topicality
/// and then one conjunction ("and") or disjunction ("or") question over a
/// fixed pair of U/R signs.
enum class Group {
  TUR, TRU,
  ConjPP, ConjPM, ConjMP, ConjMM,
  DisjPP, DisjPM, DisjMP, DisjMM,
};

inline constexpr int kGroupCount = 10;
inline constexpr std::array<Group, kGroupCount> kAllGroups = {
    Group::TUR, Group::TRU,
    Group::ConjPP, Group::ConjPM, Group::ConjMP, Group::ConjMM,
    Group::DisjPP, Group::DisjPM, Group::DisjMP, Group::DisjMM,
};

std::string to_string(Group g);
std::optional<Group> group_from_string(const std::string& s);
bool is_sequence_group(Group g);
bool is_conjunction_group(Group g);
bool is_disjunction_group(Group g);
/// For pair groups: the U sign / R sign the question asks about.
Sign group_sign_u(Group g);
Sign group_sign_r(Group g);
Group pair_group(bool conjunction, Sign sign_u, Sign sign_r);

/// What a recorded answer was about.
enum class QuestionTag { U, R, And, Or };

std::string to_string(QuestionTag t);
std::optional<QuestionTag> question_tag_from_string(const std::string& s);

struct RecordedAnswer {
  QuestionTag tag;
  Sign response;
};

/// One agent's full session: the topicality answer plus the group's follow-up
/// answers in the order asked.
struct JudgementRecord {
  std::string participant_id;
  std::string query_id;
  Group group = Group::TUR;
  Sign topicality = Sign::Plus;
  std::vector<RecordedAnswer> answers;
};

/// Problems with a single record ("" ids, answer tags that do not match the
/// group, ...).  Empty when the record is well formed.
std::vector<std::string> record_schema_issues(const JudgementRecord& rec);

/// Throws SchemaError listing every problem across the set, including
/// duplicate (participant, query) pairs.  Rejects an empty set.
void validate_records(const std::vector<JudgementRecord>& records);

enum class FileFormat { Csv, Json };

std::string records_to_csv(const std::vector<JudgementRecord>& records);
std::string records_to_json(const std::vector<JudgementRecord>& records);
/// Parse + validate; throws SchemaError with every collected problem.
std::vector<JudgementRecord> records_from_csv(const std::string& text);
std::vector<JudgementRecord> records_from_json(const std::string& text);

std::vector<JudgementRecord> read_records(const std::string& path, FileFormat fmt);
/// Decides CSV vs JSON from the file content (JSON starts with '[').
std::vector<JudgementRecord> read_records_auto(const std::string& path);
void write_records(const std::vector<JudgementRecord>& records, const std::string& path,
                   FileFormat fmt);

struct WilsonInterval {
  double lo;
  double hi;
};

/// 95% Wilson score interval by default (z = 1.96).  Requires 0 <= k <= n,
/// n > 0.
WilsonInterval wilson_interval(long k, long n, double z = 1.96);

/// Counted frequency of one event: k successes out of n agents.  n = 0 marks
/// an empty stratum; p_hat is NaN there and the interval is the whole of
/// [0, 1].
struct FreqCell {
  long k = 0;
  long n = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;

  bool empty_stratum() const { return n == 0; }
};

FreqCell make_cell(long k, long n);

/// Event strings name one outcome, optionally conditioned on earlier outcomes
/// listed most recent first:
///   "T+"              marginal
///   "U+|T+"           sequential conditional
///   "R+|U-,T+"        two conditions, the U- collapse being the most recent
///   "U-^R+|T+"        conjunction question over the pair (U-, R+)
///   "U+vR-|T+"        disjunction question
struct ParsedEvent {
  enum class Kind { Marginal, Sequential, Conjunction, Disjunction };

  Kind kind = Kind::Marginal;
  Question target{Dimension::Topicality, Sign::Plus};
  std::optional<Question> second;     // the R part of a pair event
  std::vector<Question> conditions;   // most recent first

  bool is_pair() const {
    return kind == Kind::Conjunction || kind == Kind::Disjunction;
  }
};

ParsedEvent parse_event(const std::string& event);
std::string format_event(const ParsedEvent& ev);
std::string sequential_event(const Question& target, const std::vector<Question>& conditions);
std::string pair_event(bool conjunction, Sign sign_u, Sign sign_r, Sign topicality);
/// The same event asked about the opposite target sign ("U+|T+" -> "U-|T+").
/// Defined for marginal and sequential events only.
std::string complement_event(const std::string& event);

struct EventKey {
  std::string query_id;
  Group group;
  std::string event;

  auto operator<=>(const EventKey&) const = default;
};

/// Per-(query, group, event) counts with recomputed point estimates and Wilson
/// intervals.  Lookups resolve complements: asking for "U-|T+" when "U+|T+"
/// is stored returns the mirrored cell.
class FrequencyTable {
 public:
  void set(const std::string& query, Group g, const std::string& event, long k, long n);

  /// Exact lookup, no complement resolution.
  const FreqCell* find(const std::string& query, Group g, const std::string& event) const;
  /// Exact, then complement (marginal/sequential events only).
  std::optional<FreqCell> lookup(const std::string& query, Group g,
                                 const std::string& event) const;
  /// Sums k and n for the event over the given groups (complement-resolved
  /// per group).  Empty when no group has the event.
  std::optional<FreqCell> pooled(const std::string& query, const std::vector<Group>& groups,
                                 const std::string& event) const;

  std::vector<std::string> queries() const;
  const std::map<EventKey, FreqCell>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  std::string to_csv() const;
  static FrequencyTable from_csv(const std::string& text);

 private:
  std::map<EventKey, FreqCell> cells_;
};

void write_frequency_table(const FrequencyTable& table, const std::string& path);
FrequencyTable read_frequency_table(const std::string& path);

/// Counts every canonical event of every (query, group) present in the
/// records: "T+" per group, the first- and second-question conditionals for
/// the sequence groups (both topicality strata, both first-question branches)
/// and the pair question per stratum for the others.  Records are assumed to
/// have passed validation; the set-level duplicate check is not repeated, so
/// resampled record sets aggregate fine.
FrequencyTable aggregate(const std::vector<JudgementRecord>& records);

/// Built-in reference counts for query "q2": the conjunction judgement
/// P(U-^R+|T+) = 0.414 and the marginal P(U-|T+) = 0.198, both stored as k
/// out of n = 500 so the quoted proportions are represented exactly.
FrequencyTable paper_fixture();

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace qrel

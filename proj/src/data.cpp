#include "qrel/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qrel {

namespace {

using nlohmann::json;

constexpr const char* kRecordsHeader =
    "participant_id,query_id,group,topicality,answer1_tag,answer1,answer2_tag,answer2";
constexpr const char* kFreqHeader = "query_id,group,event,k,n,p_hat,ci_lo,ci_hi";

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::optional<Sign> sign_from_string(const std::string& s) {
  if (s == "+") return Sign::Plus;
  if (s == "-") return Sign::Minus;
  return std::nullopt;
}

std::string sign_to_string(Sign s) { return s == Sign::Plus ? "+" : "-"; }

// --- tiny CSV layer -------------------------------------------------------

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// One physical line -> fields; supports quoted fields with doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line, bool& ok) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_quotes) ok = false;
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(std::move(cur));
  }
  return lines;
}

bool parse_long(const std::string& s, long& out) {
  try {
    std::size_t pos = 0;
    out = std::stol(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

// --- group / tag tables ----------------------------------------------------

struct GroupInfo {
  Group group;
  const char* name;
};

constexpr GroupInfo kGroupInfos[] = {
    {Group::TUR, "TUR"},       {Group::TRU, "TRU"},
    {Group::ConjPP, "ConjPP"}, {Group::ConjPM, "ConjPM"},
    {Group::ConjMP, "ConjMP"}, {Group::ConjMM, "ConjMM"},
    {Group::DisjPP, "DisjPP"}, {Group::DisjPM, "DisjPM"},
    {Group::DisjMP, "DisjMP"}, {Group::DisjMM, "DisjMM"},
};

void collect_duplicate_issues(const std::vector<JudgementRecord>& records,
                              std::vector<std::string>& issues) {
  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::pair<std::string, std::string>> reported;
  for (const auto& rec : records) {
    auto key = std::make_pair(rec.participant_id, rec.query_id);
    if (!seen.insert(key).second && reported.insert(key).second) {
      issues.push_back("duplicate record for participant '" + rec.participant_id +
                       "', query '" + rec.query_id + "'");
    }
  }
}

Question parse_atom(const std::string& s, const std::string& event) {
  if (s.size() != 2) {
    throw std::invalid_argument("bad event atom '" + s + "' in '" + event + "'");
  }
  Dimension dim;
  switch (s[0]) {
    case 'T': dim = Dimension::Topicality; break;
    case 'U': dim = Dimension::Understandability; break;
    case 'R': dim = Dimension::Reliability; break;
    default:
      throw std::invalid_argument("bad event atom '" + s + "' in '" + event + "'");
  }
  auto sign = sign_from_string(s.substr(1));
  if (!sign) {
    throw std::invalid_argument("bad event atom '" + s + "' in '" + event + "'");
  }
  return {dim, *sign};
}

std::string atom(const Question& q) {
  return std::string(1, dimension_letter(q.dim)) + sign_char(q.sign);
}

}  // namespace

std::string to_string(Group g) {
  for (const auto& info : kGroupInfos) {
    if (info.group == g) return info.name;
  }
  throw std::invalid_argument("unknown group");
}

std::optional<Group> group_from_string(const std::string& s) {
  for (const auto& info : kGroupInfos) {
    if (s == info.name) return info.group;
  }
  return std::nullopt;
}

bool is_sequence_group(Group g) { return g == Group::TUR || g == Group::TRU; }

bool is_conjunction_group(Group g) {
  return g == Group::ConjPP || g == Group::ConjPM || g == Group::ConjMP ||
         g == Group::ConjMM;
}

bool is_disjunction_group(Group g) {
  return g == Group::DisjPP || g == Group::DisjPM || g == Group::DisjMP ||
         g == Group::DisjMM;
}

Sign group_sign_u(Group g) {
  switch (g) {
    case Group::ConjPP: case Group::ConjPM:
    case Group::DisjPP: case Group::DisjPM:
      return Sign::Plus;
    case Group::ConjMP: case Group::ConjMM:
    case Group::DisjMP: case Group::DisjMM:
      return Sign::Minus;
    default:
      throw std::invalid_argument("group " + to_string(g) + " has no pair signs");
  }
}

Sign group_sign_r(Group g) {
  switch (g) {
    case Group::ConjPP: case Group::ConjMP:
    case Group::DisjPP: case Group::DisjMP:
      return Sign::Plus;
    case Group::ConjPM: case Group::ConjMM:
    case Group::DisjPM: case Group::DisjMM:
      return Sign::Minus;
    default:
      throw std::invalid_argument("group " + to_string(g) + " has no pair signs");
  }
}

Group pair_group(bool conjunction, Sign sign_u, Sign sign_r) {
  const bool up = sign_u == Sign::Plus;
  const bool rp = sign_r == Sign::Plus;
  if (conjunction) {
    return up ? (rp ? Group::ConjPP : Group::ConjPM)
              : (rp ? Group::ConjMP : Group::ConjMM);
  }
  return up ? (rp ? Group::DisjPP : Group::DisjPM)
            : (rp ? Group::DisjMP : Group::DisjMM);
}

std::string to_string(QuestionTag t) {
  switch (t) {
    case QuestionTag::U: return "U";
    case QuestionTag::R: return "R";
    case QuestionTag::And: return "AND";
    case QuestionTag::Or: return "OR";
  }
  throw std::invalid_argument("unknown question tag");
}

std::optional<QuestionTag> question_tag_from_string(const std::string& s) {
  if (s == "U") return QuestionTag::U;
  if (s == "R") return QuestionTag::R;
  if (s == "AND") return QuestionTag::And;
  if (s == "OR") return QuestionTag::Or;
  return std::nullopt;
}

std::vector<std::string> record_schema_issues(const JudgementRecord& rec) {
  std::vector<std::string> issues;
  if (rec.participant_id.empty()) issues.push_back("empty participant_id");
  if (rec.query_id.empty()) issues.push_back("empty query_id");

  std::vector<QuestionTag> expected;
  if (rec.group == Group::TUR) {
    expected = {QuestionTag::U, QuestionTag::R};
  } else if (rec.group == Group::TRU) {
    expected = {QuestionTag::R, QuestionTag::U};
  } else if (is_conjunction_group(rec.group)) {
    expected = {QuestionTag::And};
  } else {
    expected = {QuestionTag::Or};
  }
  if (rec.answers.size() != expected.size()) {
    issues.push_back("group " + to_string(rec.group) + " expects " +
                     std::to_string(expected.size()) + " answers, got " +
                     std::to_string(rec.answers.size()));
  } else {
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (rec.answers[i].tag != expected[i]) {
        issues.push_back("group " + to_string(rec.group) + " expects answer " +
                         std::to_string(i + 1) + " tagged " + to_string(expected[i]) +
                         ", got " + to_string(rec.answers[i].tag));
      }
    }
  }
  return issues;
}

void validate_records(const std::vector<JudgementRecord>& records) {
  std::vector<std::string> issues;
  if (records.empty()) issues.push_back("record set is empty");
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& msg : record_schema_issues(records[i])) {
      issues.push_back("record " + std::to_string(i + 1) + ": " + msg);
    }
  }
  collect_duplicate_issues(records, issues);
  if (!issues.empty()) throw SchemaError(std::move(issues));
}

std::string records_to_csv(const std::vector<JudgementRecord>& records) {
  std::string out = kRecordsHeader;
  out += '\n';
  for (const auto& rec : records) {
    out += csv_quote(rec.participant_id);
    out += ',';
    out += csv_quote(rec.query_id);
    out += ',';
    out += to_string(rec.group);
    out += ',';
    out += sign_to_string(rec.topicality);
    for (std::size_t i = 0; i < 2; ++i) {
      out += ',';
      if (i < rec.answers.size()) {
        out += to_string(rec.answers[i].tag);
        out += ',';
        out += sign_to_string(rec.answers[i].response);
      } else {
        out += ',';
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<JudgementRecord> records_from_csv(const std::string& text) {
  std::vector<std::string> issues;
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kRecordsHeader) {
    throw SchemaError({std::string("expected header '") + kRecordsHeader + "'"});
  }
  std::vector<JudgementRecord> records;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const std::string where = "line " + std::to_string(li + 1);
    bool ok = true;
    auto fields = split_csv_line(lines[li], ok);
    if (!ok) {
      issues.push_back(where + ": unterminated quote");
      continue;
    }
    if (fields.size() != 8) {
      issues.push_back(where + ": expected 8 fields, got " + std::to_string(fields.size()));
      continue;
    }
    JudgementRecord rec;
    rec.participant_id = fields[0];
    rec.query_id = fields[1];
    bool row_ok = true;
    if (auto g = group_from_string(fields[2])) {
      rec.group = *g;
    } else {
      issues.push_back(where + ": unknown group '" + fields[2] + "'");
      row_ok = false;
    }
    if (auto s = sign_from_string(fields[3])) {
      rec.topicality = *s;
    } else {
      issues.push_back(where + ": bad topicality '" + fields[3] + "'");
      row_ok = false;
    }
    for (int a = 0; a < 2; ++a) {
      const std::string& tag_s = fields[4 + 2 * a];
      const std::string& resp_s = fields[5 + 2 * a];
      if (tag_s.empty() && resp_s.empty()) continue;
      auto tag = question_tag_from_string(tag_s);
      auto resp = sign_from_string(resp_s);
      if (!tag) {
        issues.push_back(where + ": bad answer tag '" + tag_s + "'");
        row_ok = false;
      }
      if (!resp) {
        issues.push_back(where + ": bad answer '" + resp_s + "'");
        row_ok = false;
      }
      if (tag && resp) rec.answers.push_back({*tag, *resp});
    }
    if (!row_ok) continue;
    for (const auto& msg : record_schema_issues(rec)) {
      issues.push_back(where + ": " + msg);
      row_ok = false;
    }
    if (row_ok) records.push_back(std::move(rec));
  }
  if (issues.empty() && records.empty()) issues.push_back("record set is empty");
  if (issues.empty()) collect_duplicate_issues(records, issues);
  if (!issues.empty()) throw SchemaError(std::move(issues));
  return records;
}

std::string records_to_json(const std::vector<JudgementRecord>& records) {
  json arr = json::array();
  for (const auto& rec : records) {
    json obj;
    obj["participant_id"] = rec.participant_id;
    obj["query_id"] = rec.query_id;
    obj["group"] = to_string(rec.group);
    obj["topicality"] = sign_to_string(rec.topicality);
    for (std::size_t i = 0; i < rec.answers.size() && i < 2; ++i) {
      const std::string idx = std::to_string(i + 1);
      obj["answer" + idx + "_tag"] = to_string(rec.answers[i].tag);
      obj["answer" + idx] = sign_to_string(rec.answers[i].response);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::vector<JudgementRecord> records_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError({std::string("invalid JSON: ") + e.what()});
  }
  if (!doc.is_array()) throw SchemaError({"expected a top-level JSON array"});

  static const std::set<std::string> known_keys = {
      "participant_id", "query_id", "group", "topicality",
      "answer1_tag", "answer1", "answer2_tag", "answer2"};

  std::vector<std::string> issues;
  std::vector<JudgementRecord> records;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "record " + std::to_string(i + 1);
    const json& obj = doc[i];
    if (!obj.is_object()) {
      issues.push_back(where + ": not an object");
      continue;
    }
    bool row_ok = true;
    for (const auto& [key, value] : obj.items()) {
      if (!known_keys.count(key)) {
        issues.push_back(where + ": unknown key '" + key + "'");
        row_ok = false;
      } else if (!value.is_string()) {
        issues.push_back(where + ": key '" + key + "' must be a string");
        row_ok = false;
      }
    }
    auto field = [&](const char* key) -> std::string {
      auto it = obj.find(key);
      return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string();
    };
    for (const char* key : {"participant_id", "query_id", "group", "topicality",
                            "answer1_tag", "answer1"}) {
      if (!obj.contains(key)) {
        issues.push_back(where + std::string(": missing key '") + key + "'");
        row_ok = false;
      }
    }
    if (!row_ok) continue;

    JudgementRecord rec;
    rec.participant_id = field("participant_id");
    rec.query_id = field("query_id");
    if (auto g = group_from_string(field("group"))) {
      rec.group = *g;
    } else {
      issues.push_back(where + ": unknown group '" + field("group") + "'");
      row_ok = false;
    }
    if (auto s = sign_from_string(field("topicality"))) {
      rec.topicality = *s;
    } else {
      issues.push_back(where + ": bad topicality '" + field("topicality") + "'");
      row_ok = false;
    }
    for (int a = 0; a < 2; ++a) {
      const std::string idx = std::to_string(a + 1);
      const std::string tag_s = field(("answer" + idx + "_tag").c_str());
      const std::string resp_s = field(("answer" + idx).c_str());
      if (tag_s.empty() && resp_s.empty()) continue;
      auto tag = question_tag_from_string(tag_s);
      auto resp = sign_from_string(resp_s);
      if (!tag) {
        issues.push_back(where + ": bad answer tag '" + tag_s + "'");
        row_ok = false;
      }
      if (!resp) {
        issues.push_back(where + ": bad answer '" + resp_s + "'");
        row_ok = false;
      }
      if (tag && resp) rec.answers.push_back({*tag, *resp});
    }
    if (!row_ok) continue;
    for (const auto& msg : record_schema_issues(rec)) {
      issues.push_back(where + ": " + msg);
      row_ok = false;
    }
    if (row_ok) records.push_back(std::move(rec));
  }
  if (issues.empty() && records.empty()) issues.push_back("record set is empty");
  if (issues.empty()) collect_duplicate_issues(records, issues);
  if (!issues.empty()) throw SchemaError(std::move(issues));
  return records;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw Error("failed writing file: " + path);
}

std::vector<JudgementRecord> read_records(const std::string& path, FileFormat fmt) {
  const std::string text = read_text_file(path);
  return fmt == FileFormat::Csv ? records_from_csv(text) : records_from_json(text);
}

std::vector<JudgementRecord> read_records_auto(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool looks_json = first != std::string::npos && text[first] == '[';
  return looks_json ? records_from_json(text) : records_from_csv(text);
}

void write_records(const std::vector<JudgementRecord>& records, const std::string& path,
                   FileFormat fmt) {
  write_text_file(path, fmt == FileFormat::Csv ? records_to_csv(records)
                                               : records_to_json(records));
}

WilsonInterval wilson_interval(long k, long n, double z) {
  if (n <= 0) throw std::invalid_argument("wilson_interval needs n > 0");
  if (k < 0 || k > n) throw std::invalid_argument("wilson_interval needs 0 <= k <= n");
  if (!(z > 0.0)) throw std::invalid_argument("wilson_interval needs z > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

FreqCell make_cell(long k, long n) {
  if (n < 0 || k < 0 || k > n) {
    throw std::invalid_argument("frequency cell needs 0 <= k <= n");
  }
  FreqCell cell;
  cell.k = k;
  cell.n = n;
  if (n == 0) {
    cell.p_hat = std::numeric_limits<double>::quiet_NaN();
    cell.ci_lo = 0.0;
    cell.ci_hi = 1.0;
  } else {
    cell.p_hat = static_cast<double>(k) / static_cast<double>(n);
    const auto ci = wilson_interval(k, n);
    cell.ci_lo = ci.lo;
    cell.ci_hi = ci.hi;
  }
  return cell;
}

ParsedEvent parse_event(const std::string& event) {
  const auto bar = event.find('|');
  if (event.find('|', bar == std::string::npos ? event.size() : bar + 1) !=
      std::string::npos) {
    throw std::invalid_argument("event '" + event + "' has more than one '|'");
  }
  const std::string head = bar == std::string::npos ? event : event.substr(0, bar);
  const std::string tail = bar == std::string::npos ? "" : event.substr(bar + 1);
  if (bar != std::string::npos && tail.empty()) {
    throw std::invalid_argument("event '" + event + "' has an empty condition list");
  }

  ParsedEvent ev;
  if (head.size() == 5 && (head[2] == '^' || head[2] == 'v')) {
    ev.kind = head[2] == '^' ? ParsedEvent::Kind::Conjunction
                             : ParsedEvent::Kind::Disjunction;
    ev.target = parse_atom(head.substr(0, 2), event);
    ev.second = parse_atom(head.substr(3, 2), event);
    if (ev.target.dim != Dimension::Understandability ||
        ev.second->dim != Dimension::Reliability) {
      throw std::invalid_argument("pair event '" + event + "' must pair U with R");
    }
  } else if (head.size() == 2) {
    ev.target = parse_atom(head, event);
  } else {
    throw std::invalid_argument("bad event '" + event + "'");
  }

  if (!tail.empty()) {
    std::string cur;
    std::vector<std::string> parts;
    for (char c : tail) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    for (const auto& part : parts) {
      ev.conditions.push_back(parse_atom(part, event));
    }
  }

  // No dimension may appear twice across target, pair partner and conditions.
  std::vector<Dimension> dims{ev.target.dim};
  if (ev.second) dims.push_back(ev.second->dim);
  for (const auto& q : ev.conditions) dims.push_back(q.dim);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    for (std::size_t j = i + 1; j < dims.size(); ++j) {
      if (dims[i] == dims[j]) {
        throw std::invalid_argument("event '" + event + "' repeats a dimension");
      }
    }
  }
  if (ev.is_pair()) {
    if (ev.conditions.size() != 1 || ev.conditions[0].dim != Dimension::Topicality) {
      throw std::invalid_argument("pair event '" + event +
                                  "' must be conditioned on topicality alone");
    }
  } else if (ev.kind == ParsedEvent::Kind::Marginal && !ev.conditions.empty()) {
    ev.kind = ParsedEvent::Kind::Sequential;
  }
  return ev;
}

std::string format_event(const ParsedEvent& ev) {
  std::string out = atom(ev.target);
  if (ev.is_pair()) {
    out += ev.kind == ParsedEvent::Kind::Conjunction ? '^' : 'v';
    out += atom(*ev.second);
  }
  if (!ev.conditions.empty()) {
    out += '|';
    for (std::size_t i = 0; i < ev.conditions.size(); ++i) {
      if (i) out += ',';
      out += atom(ev.conditions[i]);
    }
  }
  return out;
}

std::string sequential_event(const Question& target,
                             const std::vector<Question>& conditions) {
  ParsedEvent ev;
  ev.kind = conditions.empty() ? ParsedEvent::Kind::Marginal
                               : ParsedEvent::Kind::Sequential;
  ev.target = target;
  ev.conditions = conditions;
  return format_event(ev);
}

std::string pair_event(bool conjunction, Sign sign_u, Sign sign_r, Sign topicality) {
  ParsedEvent ev;
  ev.kind = conjunction ? ParsedEvent::Kind::Conjunction
                        : ParsedEvent::Kind::Disjunction;
  ev.target = {Dimension::Understandability, sign_u};
  ev.second = Question{Dimension::Reliability, sign_r};
  ev.conditions = {{Dimension::Topicality, topicality}};
  return format_event(ev);
}

std::string complement_event(const std::string& event) {
  ParsedEvent ev = parse_event(event);
  if (ev.is_pair()) {
    throw std::invalid_argument("pair event '" + event + "' has no complement event");
  }
  ev.target.sign = opposite(ev.target.sign);
  return format_event(ev);
}

void FrequencyTable::set(const std::string& query, Group g, const std::string& event,
                         long k, long n) {
  if (query.empty()) throw std::invalid_argument("empty query id");
  parse_event(event);  // reject malformed event strings up front
  cells_[EventKey{query, g, event}] = make_cell(k, n);
}

const FreqCell* FrequencyTable::find(const std::string& query, Group g,
                                     const std::string& event) const {
  auto it = cells_.find(EventKey{query, g, event});
  return it == cells_.end() ? nullptr : &it->second;
}

std::optional<FreqCell> FrequencyTable::lookup(const std::string& query, Group g,
                                               const std::string& event) const {
  if (const FreqCell* cell = find(query, g, event)) return *cell;
  const ParsedEvent ev = parse_event(event);
  if (ev.is_pair()) return std::nullopt;
  if (const FreqCell* cell = find(query, g, complement_event(event))) {
    return make_cell(cell->n - cell->k, cell->n);
  }
  return std::nullopt;
}

std::optional<FreqCell> FrequencyTable::pooled(const std::string& query,
                                               const std::vector<Group>& groups,
                                               const std::string& event) const {
  long k = 0;
  long n = 0;
  bool found = false;
  for (Group g : groups) {
    if (auto cell = lookup(query, g, event)) {
      found = true;
      k += cell->k;
      n += cell->n;
    }
  }
  if (!found) return std::nullopt;
  return make_cell(k, n);
}

std::vector<std::string> FrequencyTable::queries() const {
  std::vector<std::string> out;
  for (const auto& [key, cell] : cells_) {
    if (out.empty() || out.back() != key.query_id) out.push_back(key.query_id);
  }
  return out;
}

std::string FrequencyTable::to_csv() const {
  std::string out = kFreqHeader;
  out += '\n';
  for (const auto& [key, cell] : cells_) {
    out += csv_quote(key.query_id);
    out += ',';
    out += to_string(key.group);
    out += ',';
    out += csv_quote(key.event);
    out += ',';
    out += std::to_string(cell.k);
    out += ',';
    out += std::to_string(cell.n);
    out += ',';
    out += cell.empty_stratum() ? "" : fmt_double(cell.p_hat);
    out += ',';
    out += fmt_double(cell.ci_lo);
    out += ',';
    out += fmt_double(cell.ci_hi);
    out += '\n';
  }
  return out;
}

FrequencyTable FrequencyTable::from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kFreqHeader) {
    throw SchemaError({std::string("expected header '") + kFreqHeader + "'"});
  }
  std::vector<std::string> issues;
  FrequencyTable table;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const std::string where = "line " + std::to_string(li + 1);
    bool ok = true;
    auto fields = split_csv_line(lines[li], ok);
    if (!ok) {
      issues.push_back(where + ": unterminated quote");
      continue;
    }
    if (fields.size() != 8) {
      issues.push_back(where + ": expected 8 fields, got " + std::to_string(fields.size()));
      continue;
    }
    auto group = group_from_string(fields[1]);
    if (!group) {
      issues.push_back(where + ": unknown group '" + fields[1] + "'");
      continue;
    }
    long k = 0;
    long n = 0;
    if (!parse_long(fields[3], k) || !parse_long(fields[4], n)) {
      issues.push_back(where + ": k and n must be integers");
      continue;
    }
    // p_hat / ci fields are recomputed from (k, n); stale values are ignored.
    try {
      table.set(fields[0], *group, fields[2], k, n);
    } catch (const std::exception& e) {
      issues.push_back(where + ": " + e.what());
    }
  }
  if (issues.empty() && table.empty()) issues.push_back("frequency table is empty");
  if (!issues.empty()) throw SchemaError(std::move(issues));
  return table;
}

void write_frequency_table(const FrequencyTable& table, const std::string& path) {
  write_text_file(path, table.to_csv());
}

FrequencyTable read_frequency_table(const std::string& path) {
  return FrequencyTable::from_csv(read_text_file(path));
}

FrequencyTable aggregate(const std::vector<JudgementRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records to aggregate");
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& msg : record_schema_issues(records[i])) {
      issues.push_back("record " + std::to_string(i + 1) + ": " + msg);
    }
  }
  if (!issues.empty()) throw SchemaError(std::move(issues));

  std::map<std::pair<std::string, Group>, std::vector<const JudgementRecord*>> buckets;
  for (const auto& rec : records) {
    buckets[{rec.query_id, rec.group}].push_back(&rec);
  }

  FrequencyTable table;
  for (const auto& [key, rows] : buckets) {
    const auto& [query, group] = key;
    long k_tplus = 0;
    for (const auto* r : rows) {
      if (r->topicality == Sign::Plus) ++k_tplus;
    }
    table.set(query, group, "T+", k_tplus, static_cast<long>(rows.size()));

    if (is_sequence_group(group)) {
      const Dimension d1 = group == Group::TUR ? Dimension::Understandability
                                               : Dimension::Reliability;
      const Dimension d2 = group == Group::TUR ? Dimension::Reliability
                                               : Dimension::Understandability;
      for (Sign tau : {Sign::Plus, Sign::Minus}) {
        long n_tau = 0;
        long k1 = 0;
        for (const auto* r : rows) {
          if (r->topicality != tau) continue;
          ++n_tau;
          if (r->answers[0].response == Sign::Plus) ++k1;
        }
        table.set(query, group,
                  sequential_event({d1, Sign::Plus}, {{Dimension::Topicality, tau}}),
                  k1, n_tau);
        for (Sign s1 : {Sign::Plus, Sign::Minus}) {
          long n2 = 0;
          long k2 = 0;
          for (const auto* r : rows) {
            if (r->topicality != tau || r->answers[0].response != s1) continue;
            ++n2;
            if (r->answers[1].response == Sign::Plus) ++k2;
          }
          table.set(query, group,
                    sequential_event({d2, Sign::Plus},
                                     {{d1, s1}, {Dimension::Topicality, tau}}),
                    k2, n2);
        }
      }
    } else {
      const bool conj = is_conjunction_group(group);
      const Sign su = group_sign_u(group);
      const Sign sr = group_sign_r(group);
      for (Sign tau : {Sign::Plus, Sign::Minus}) {
        long n_tau = 0;
        long k_yes = 0;
        for (const auto* r : rows) {
          if (r->topicality != tau) continue;
          ++n_tau;
          if (r->answers[0].response == Sign::Plus) ++k_yes;
        }
        table.set(query, group, pair_event(conj, su, sr, tau), k_yes, n_tau);
      }
    }
  }
  return table;
}

FrequencyTable paper_fixture() {
  FrequencyTable table;
  table.set("q2", Group::ConjMP, "U-^R+|T+", 207, 500);  // 0.414
  table.set("q2", Group::TUR, "U-|T+", 99, 500);         // 0.198
  return table;
}

}  // namespace qrel

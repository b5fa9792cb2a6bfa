// qrel: command-line front end for the relevance-judgement model.
//
// Subcommands cover the whole workflow: simulate agent populations, aggregate
// raw records into frequency tables, fit model parameters, test Kolmogorov
// additivity, and compare quantum vs. Bayesian cross-order predictions.
// `pipeline` chains all of it into one output directory.
//
// Exit codes: 0 success, 1 runtime failure (missing file, bad data, estimator
// errors), 2 usage/config errors (unknown flags, bad values, missing required
// flags).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qrel/classical.hpp"
#include "qrel/correction.hpp"
#include "qrel/data.hpp"
#include "qrel/errors.hpp"
#include "qrel/estimation.hpp"
#include "qrel/measurement.hpp"
#include "qrel/model.hpp"
#include "qrel/simulate.hpp"

namespace {

using nlohmann::json;

// Flag-level mistakes discovered after CLI11 parsing (bad --model values,
// contradictory flag combinations).  Mapped to exit code 2 like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Missing values render as "n/a" in tables and empty fields in CSV.
std::string cell_or(const std::optional<double>& v, const std::string& absent) {
  return v && !std::isnan(*v) ? fmt(*v) : absent;
}

json json_or_null(const std::optional<double>& v) {
  if (!v || std::isnan(*v)) return nullptr;
  return *v;
}

// Renders rows as aligned columns; `header` first, two spaces between
// columns.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string col = row[i];
      if (i + 1 < row.size()) col.resize(widths[i], ' ');
      line += col;
      if (i + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

// Every subcommand funnels its rendered text through here: stdout by default,
// a file when --output was given (with a one-line confirmation on stdout).
void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
  } else {
    qrel::write_text_file(output_path, text);
    std::cout << "wrote " << output_path << "\n";
  }
}

// ---- flag value parsers ----

// "t=0.8,u=0.6,theta=1.57": unknown keys, repeats and malformed numbers are
// usage errors; omitted keys keep the defaults (t=u=r=1, theta=0).
qrel::ModelParams parse_model_spec(const std::string& spec) {
  qrel::ModelParams m;
  std::map<std::string, bool> seen;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--model: expected key=value, got '" + item + "'");
    }
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (seen[key]) throw UsageError("--model: duplicate key '" + key + "'");
    seen[key] = true;
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw UsageError("--model: bad number '" + value + "' for key '" + key + "'");
    }
    if (key == "t") m.t = v;
    else if (key == "u") m.u = v;
    else if (key == "r") m.r = v;
    else if (key == "theta") m.theta = v;
    else throw UsageError("--model: unknown key '" + key + "' (want t,u,r,theta)");
  }
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw UsageError(std::string("--model: ") + e.what());
  }
  return m;
}

// "TUR=200,ConjPP=50" overrides on top of the per-group default.
std::array<int, qrel::kGroupCount> parse_group_sizes(const std::string& spec,
                                                     int default_n) {
  auto sizes = qrel::Protocol::uniform_sizes(default_n);
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--groups: expected NAME=COUNT, got '" + item + "'");
    }
    std::string name = item.substr(0, eq);
    auto group = qrel::group_from_string(name);
    if (!group) throw UsageError("--groups: unknown group '" + name + "'");
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--groups: bad count in '" + item + "'");
    }
    if (count < 0) throw UsageError("--groups: negative count in '" + item + "'");
    for (int i = 0; i < qrel::kGroupCount; ++i) {
      if (qrel::kAllGroups[i] == *group) sizes[i] = count;
    }
  }
  return sizes;
}

qrel::PairedOrder parse_paired_order(const std::string& s) {
  if (s == "randomized") return qrel::PairedOrder::RandomizedPerAgent;
  if (s == "u-then-r") return qrel::PairedOrder::UThenR;
  return qrel::PairedOrder::RThenU;
}

qrel::FitMethod parse_method(const std::string& s) {
  return s == "lsq" ? qrel::FitMethod::LeastSquares : qrel::FitMethod::ClosedForm;
}

// ---- input loading ----

// Either raw judgement records (CSV or JSON) or an already-aggregated
// frequency CSV; the header/first byte decides which.
struct LoadedInput {
  std::optional<std::vector<qrel::JudgementRecord>> records;
  qrel::FrequencyTable freqs;
};

LoadedInput load_input(const std::string& path) {
  if (path.empty()) throw UsageError("--input is required");
  std::string text = qrel::read_text_file(path);
  LoadedInput in;
  auto start = text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && text[start] == '[') {
    in.records = qrel::records_from_json(text);
  } else if (text.rfind("participant_id", start == std::string::npos ? 0 : start) ==
             start) {
    in.records = qrel::records_from_csv(text);
  } else {
    in.freqs = qrel::FrequencyTable::from_csv(text);
    return in;
  }
  in.freqs = qrel::aggregate(*in.records);
  return in;
}

// The single query of a table, or the explicitly requested one.
std::string resolve_query(const qrel::FrequencyTable& freqs, const std::string& requested) {
  if (!requested.empty()) return requested;
  auto qs = freqs.queries();
  if (qs.empty()) throw qrel::Error("input has no frequency cells");
  if (qs.size() > 1) {
    std::string msg = "input covers several queries, pick one with --query:";
    for (const auto& q : qs) msg += " " + q;
    throw qrel::Error(msg);
  }
  return qs.front();
}

// ---- shared option bundle ----

struct Options {
  std::string input;
  std::string output;
  std::string config;
  std::string format = "table";
  std::vector<std::string> format_choices;
  std::string query;
  std::string model_spec;
  std::string classical_path;
  std::string groups_spec;
  std::string method = "closed-form";
  std::string paired_order = "randomized";
  std::optional<std::uint64_t> seed;
  int n = -1;
  int bootstrap = 0;
};

qrel::Protocol build_protocol(const Options& opt) {
  if (opt.model_spec.empty() == opt.classical_path.empty()) {
    throw UsageError("exactly one of --model and --classical is required");
  }
  if (!opt.seed) throw UsageError("--seed is required");
  qrel::Protocol proto;
  proto.query_id = opt.query.empty() ? "q1" : opt.query;
  proto.seed = *opt.seed;
  if (!opt.model_spec.empty()) {
    qrel::QuantumAgentConfig cfg;
    cfg.model = parse_model_spec(opt.model_spec);
    cfg.paired_order = parse_paired_order(opt.paired_order);
    proto.quantum = cfg;
  } else {
    qrel::ClassicalAgentConfig cfg;
    cfg.joint = qrel::JointTable::from_json(qrel::read_text_file(opt.classical_path));
    proto.classical = cfg;
  }
  if (opt.n < 0 && opt.groups_spec.empty()) {
    throw UsageError("one of --n and --groups is required");
  }
  proto.group_sizes = opt.groups_spec.empty()
                          ? qrel::Protocol::uniform_sizes(opt.n)
                          : parse_group_sizes(opt.groups_spec, std::max(opt.n, 0));
  try {
    proto.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return proto;
}

// ---- simulate ----

int cmd_simulate(const Options& opt) {
  qrel::Protocol proto = build_protocol(opt);
  std::vector<qrel::JudgementRecord> records = qrel::run_protocol(proto);
  std::string text = opt.format == "json" ? qrel::records_to_json(records)
                                          : qrel::records_to_csv(records);
  if (opt.output.empty()) {
    std::cout << text;
  } else {
    qrel::write_text_file(opt.output, text);
    int groups = 0;
    for (int size : proto.group_sizes) groups += size > 0 ? 1 : 0;
    std::cout << "wrote " << records.size() << " records across " << groups
              << " groups to " << opt.output << "\n";
  }
  return 0;
}

// ---- aggregate / fixture ----

std::string render_frequencies(const qrel::FrequencyTable& freqs, const std::string& format) {
  if (format == "csv") return freqs.to_csv();
  if (format == "json") {
    json arr = json::array();
    for (const auto& [key, cell] : freqs.cells()) {
      arr.push_back({{"query", key.query_id},
                     {"group", qrel::to_string(key.group)},
                     {"event", key.event},
                     {"k", cell.k},
                     {"n", cell.n},
                     {"p_hat", cell.n > 0 ? json(cell.p_hat) : json()},
                     {"ci_lo", cell.ci_lo},
                     {"ci_hi", cell.ci_hi}});
    }
    return arr.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"query", "group", "event", "k", "n", "p_hat", "ci_lo", "ci_hi"});
  for (const auto& [key, cell] : freqs.cells()) {
    rows.push_back({key.query_id, qrel::to_string(key.group), key.event,
                    std::to_string(cell.k), std::to_string(cell.n),
                    cell.n > 0 ? fmt(cell.p_hat) : "n/a", fmt(cell.ci_lo),
                    fmt(cell.ci_hi)});
  }
  return render_table(rows);
}

int cmd_aggregate(const Options& opt) {
  LoadedInput in = load_input(opt.input);
  if (!in.records) throw qrel::Error("input is already a frequency table");
  emit(render_frequencies(in.freqs, opt.format), opt.output);
  return 0;
}

int cmd_fixture(const Options& opt) {
  emit(render_frequencies(qrel::paper_fixture(), opt.format), opt.output);
  return 0;
}

// ---- fit ----

json fit_to_json(const std::string& query, const std::string& method,
                 const qrel::FitResult& fit) {
  json doc = {{"query", query},
              {"method", method},
              {"params",
               {{"t", fit.params.t},
                {"u", fit.params.u},
                {"r", fit.params.r},
                {"theta", fit.params.theta}}},
              {"residual", fit.residual},
              {"clamped",
               {{"t", fit.clamped.t},
                {"u", fit.clamped.u},
                {"r", fit.clamped.r},
                {"theta", fit.clamped.theta}}}};
  if (fit.ci) {
    const char* names[4] = {"t", "u", "r", "theta"};
    json ci;
    for (int i = 0; i < 4; ++i) {
      ci[names[i]] = {{"lo", (*fit.ci)[i].lo}, {"hi", (*fit.ci)[i].hi}};
    }
    doc["ci"] = ci;
  }
  return doc;
}

std::string render_fit(const std::string& query, const std::string& method,
                       const qrel::FitResult& fit, const std::string& format) {
  if (format == "json") return fit_to_json(query, method, fit).dump(2) + "\n";
  std::string clamped;
  if (fit.clamped.t) clamped += "t,";
  if (fit.clamped.u) clamped += "u,";
  if (fit.clamped.r) clamped += "r,";
  if (fit.clamped.theta) clamped += "theta,";
  if (clamped.empty()) clamped = "none";
  else clamped.pop_back();
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"query", "method", "t",        "u",
                                       "r",     "theta",  "residual", "clamped"};
    std::vector<std::string> row = {query,
                                    method,
                                    fmt(fit.params.t),
                                    fmt(fit.params.u),
                                    fmt(fit.params.r),
                                    fmt(fit.params.theta),
                                    fmt(fit.residual),
                                    clamped};
    if (fit.ci) {
      const char* names[4] = {"t", "u", "r", "theta"};
      for (int i = 0; i < 4; ++i) {
        header.push_back(std::string(names[i]) + "_lo");
        header.push_back(std::string(names[i]) + "_hi");
        row.push_back(fmt((*fit.ci)[i].lo));
        row.push_back(fmt((*fit.ci)[i].hi));
      }
    }
    return render_csv({header, row});
  }
  std::vector<std::vector<std::string>> rows = {
      {"query", query},
      {"method", method},
      {"t", fmt(fit.params.t)},
      {"u", fmt(fit.params.u)},
      {"r", fmt(fit.params.r)},
      {"theta", fmt(fit.params.theta)},
      {"residual", fmt(fit.residual)},
      {"clamped", clamped},
  };
  if (fit.ci) {
    const char* names[4] = {"t", "u", "r", "theta"};
    for (int i = 0; i < 4; ++i) {
      rows.push_back({std::string(names[i]) + " 95% CI",
                      "[" + fmt((*fit.ci)[i].lo) + ", " + fmt((*fit.ci)[i].hi) + "]"});
    }
  }
  return render_table(rows);
}

qrel::FitResult run_fit(const LoadedInput& in, const std::string& query,
                        const Options& opt) {
  if (opt.bootstrap > 0) {
    if (!in.records) {
      throw UsageError("--bootstrap needs raw records, not an aggregated table");
    }
    qrel::BootstrapOptions bopt;
    bopt.replicates = opt.bootstrap;
    bopt.seed = opt.seed.value_or(0);
    bopt.method = parse_method(opt.method);
    bopt.lsq.seed = bopt.seed;
    return qrel::bootstrap_ci(*in.records, query, bopt);
  }
  if (parse_method(opt.method) == qrel::FitMethod::ClosedForm) {
    return qrel::closed_form_fit(in.freqs, query);
  }
  qrel::LeastSquaresOptions lsq;
  lsq.seed = opt.seed.value_or(0);
  return qrel::least_squares_fit(in.freqs, query, qrel::ModelParams{0.5, 0.5, 0.5, 1.5},
                                 lsq);
}

int cmd_fit(const Options& opt) {
  LoadedInput in = load_input(opt.input);
  std::string query = resolve_query(in.freqs, opt.query);
  qrel::FitResult fit = run_fit(in, query, opt);
  std::string text = render_fit(query, opt.method, fit, opt.format);
  std::cout << text;
  // A file copy is always machine-readable JSON, whatever stdout showed.
  if (!opt.output.empty()) {
    qrel::write_text_file(opt.output, fit_to_json(query, opt.method, fit).dump(2) + "\n");
    std::cout << "wrote " << opt.output << "\n";
  }
  return 0;
}

// ---- delta ----

struct DeltaRow {
  std::string query;
  qrel::Sign sign_u;
  qrel::Sign sign_r;
  qrel::DeltaInputs inputs;
  std::optional<qrel::DeltaReport> report;           // complete rows only
  std::optional<qrel::ConjunctionFallacyFlags> fallacy;  // needs the and-cell
  std::optional<double> quantum_delta;
};

std::vector<DeltaRow> collect_delta_rows(const qrel::FrequencyTable& freqs,
                                         const std::string& query_filter,
                                         const std::optional<qrel::ModelParams>& model) {
  std::vector<DeltaRow> rows;
  for (const auto& query : freqs.queries()) {
    if (!query_filter.empty() && query != query_filter) continue;
    for (qrel::Sign su : {qrel::Sign::Plus, qrel::Sign::Minus}) {
      for (qrel::Sign sr : {qrel::Sign::Plus, qrel::Sign::Minus}) {
        DeltaRow row{query, su, sr, qrel::collect_delta_inputs(freqs, query, su, sr),
                     {}, {}, {}};
        if (!row.inputs.or_cell && !row.inputs.and_cell) continue;
        if (row.inputs.complete()) {
          row.report =
              qrel::delta_significance(row.inputs.to_observation(query, su, sr));
        }
        if (row.inputs.and_cell) {
          double p_u = row.inputs.u_cell ? row.inputs.u_cell->p_hat
                                         : std::numeric_limits<double>::quiet_NaN();
          double p_r = row.inputs.r_cell ? row.inputs.r_cell->p_hat
                                         : std::numeric_limits<double>::quiet_NaN();
          row.fallacy =
              qrel::detect_conjunction_fallacy(row.inputs.and_cell->p_hat, p_u, p_r);
        }
        if (model) {
          try {
            row.quantum_delta = qrel::quantum_predicted_delta(*model, su, sr);
          } catch (const qrel::SingularDifferenceError&) {
            // Coincident U/R rays have no correction operator; leave it n/a.
          }
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string render_delta(const std::vector<DeltaRow>& rows, const std::string& format) {
  const bool csv = format == "csv";
  const std::string absent = csv ? "" : "n/a";
  std::vector<std::vector<std::string>> table;
  table.push_back({"query", "sign_u", "sign_r", "delta", "std_err", "z_score",
                   "violation", "infinite_z", "quantum_delta", "fallacy_exceeds_u",
                   "fallacy_margin_u", "fallacy_exceeds_r", "fallacy_margin_r",
                   "missing"});
  json arr = json::array();
  for (const auto& row : rows) {
    std::string su(1, qrel::sign_char(row.sign_u));
    std::string sr(1, qrel::sign_char(row.sign_r));
    auto missing = row.inputs.missing();
    std::string missing_list;
    for (const auto& name : missing) {
      if (!missing_list.empty()) missing_list += ';';
      missing_list += name;
    }
    std::optional<double> delta, std_err, z;
    std::string violation = absent, infinite = absent;
    if (row.report) {
      delta = row.report->delta;
      std_err = row.report->std_err;
      z = row.report->z_score;
      violation = row.report->violation ? "true" : "false";
      infinite = row.report->infinite_z ? "true" : "false";
    }
    std::string ex_u = absent, ex_r = absent;
    std::optional<double> margin_u, margin_r;
    if (row.fallacy) {
      ex_u = row.fallacy->exceeds_u ? "true" : "false";
      ex_r = row.fallacy->exceeds_r ? "true" : "false";
      if (!std::isnan(row.fallacy->margin_u)) margin_u = row.fallacy->margin_u;
      if (!std::isnan(row.fallacy->margin_r)) margin_r = row.fallacy->margin_r;
    }
    if (format == "json") {
      json obj = {{"query", row.query},
                  {"sign_u", su},
                  {"sign_r", sr},
                  {"delta", json_or_null(delta)},
                  {"std_err", json_or_null(std_err)},
                  {"z_score", json_or_null(z)},
                  {"violation", row.report ? json(row.report->violation) : json()},
                  {"infinite_z", row.report ? json(row.report->infinite_z) : json()},
                  {"quantum_delta", json_or_null(row.quantum_delta)},
                  {"missing", missing}};
      if (row.fallacy) {
        obj["fallacy"] = {{"exceeds_u", row.fallacy->exceeds_u},
                          {"exceeds_r", row.fallacy->exceeds_r},
                          {"margin_u", json_or_null(margin_u)},
                          {"margin_r", json_or_null(margin_r)}};
      } else {
        obj["fallacy"] = nullptr;
      }
      arr.push_back(obj);
      continue;
    }
    table.push_back({row.query, su, sr, cell_or(delta, absent), cell_or(std_err, absent),
                     cell_or(z, absent), violation, infinite,
                     cell_or(row.quantum_delta, absent), ex_u, cell_or(margin_u, absent),
                     ex_r, cell_or(margin_r, absent), missing_list});
  }
  if (format == "json") return arr.dump(2) + "\n";
  return csv ? render_csv(table) : render_table(table);
}

int cmd_delta(const Options& opt) {
  LoadedInput in = load_input(opt.input);
  std::optional<qrel::ModelParams> model;
  if (!opt.model_spec.empty()) model = parse_model_spec(opt.model_spec);
  auto rows = collect_delta_rows(in.freqs, opt.query, model);
  if (rows.empty()) throw qrel::Error("no conjunction/disjunction groups found");
  emit(render_delta(rows, opt.format), opt.output);
  return 0;
}

// ---- compare ----

struct CompareRow {
  std::string query;
  qrel::Group group;
  std::string event;
  std::optional<qrel::FreqCell> empirical;
  std::optional<double> quantum;
  std::optional<double> bayes;
};

// The Bayesian chain-rule prediction for a second-position conditional uses
// the opposite order's chain: for P(R|U,T+) the evidence is U, so
// P(U|R,T+) and P(R|T+) come from TRU and the evidence marginal from TUR.
std::optional<double> bayes_cross_order(const qrel::FrequencyTable& freqs,
                                        const std::string& query, qrel::Group order,
                                        qrel::Sign target_sign, qrel::Sign evidence_sign) {
  using qrel::Group;
  const bool tur = order == Group::TUR;
  const Group other = tur ? Group::TRU : Group::TUR;
  char target = tur ? 'R' : 'U';
  char evidence = tur ? 'U' : 'R';
  auto ev = [&](char dim, qrel::Sign s, const std::string& conds) {
    return std::string(1, dim) + qrel::sign_char(s) + (conds.empty() ? "" : "|" + conds);
  };
  auto p_ev_given_target = freqs.lookup(
      query, other,
      ev(evidence, evidence_sign,
         std::string(1, target) + qrel::sign_char(target_sign) + ",T+"));
  auto p_target = freqs.lookup(query, other, ev(target, target_sign, "T+"));
  auto p_ev = freqs.lookup(query, order, ev(evidence, evidence_sign, "T+"));
  if (!p_ev_given_target || !p_target || !p_ev) return std::nullopt;
  if (p_ev_given_target->empty_stratum() || p_target->empty_stratum() ||
      p_ev->empty_stratum()) {
    return std::nullopt;
  }
  try {
    return qrel::bayes_chain_prediction(p_ev_given_target->p_hat, p_target->p_hat,
                                        p_ev->p_hat);
  } catch (const qrel::ConditioningError&) {
    return std::nullopt;
  }
}

std::vector<CompareRow> collect_compare_rows(const qrel::FrequencyTable& freqs,
                                             const std::string& query,
                                             const std::optional<qrel::ModelParams>& model) {
  std::vector<CompareRow> rows;
  for (qrel::Group order : {qrel::Group::TUR, qrel::Group::TRU}) {
    const bool tur = order == qrel::Group::TUR;
    for (qrel::Sign evidence_sign : {qrel::Sign::Plus, qrel::Sign::Minus}) {
      for (qrel::Sign target_sign : {qrel::Sign::Plus, qrel::Sign::Minus}) {
        std::string event = std::string(1, tur ? 'R' : 'U') +
                            qrel::sign_char(target_sign) + "|" + (tur ? 'U' : 'R') +
                            qrel::sign_char(evidence_sign) + ",T+";
        CompareRow row{query, order, event, freqs.lookup(query, order, event), {}, {}};
        if (row.empirical && row.empirical->empty_stratum()) row.empirical.reset();
        if (model) row.quantum = qrel::predicted_event_probability(*model, event);
        row.bayes = bayes_cross_order(freqs, query, order, target_sign, evidence_sign);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string render_compare(const std::vector<CompareRow>& rows, const std::string& format) {
  const bool csv = format == "csv";
  const std::string absent = csv ? "" : "n/a";
  std::vector<std::vector<std::string>> table;
  table.push_back({"query", "group", "event", "n", "empirical", "ci_lo", "ci_hi",
                   "quantum", "bayes_chain", "quantum_abs_err", "bayes_abs_err"});
  json arr = json::array();
  for (const auto& row : rows) {
    std::optional<double> emp, lo, hi, err_q, err_b;
    long n = row.empirical ? row.empirical->n : 0;
    if (row.empirical) {
      emp = row.empirical->p_hat;
      lo = row.empirical->ci_lo;
      hi = row.empirical->ci_hi;
      if (row.quantum) err_q = std::abs(*emp - *row.quantum);
      if (row.bayes) err_b = std::abs(*emp - *row.bayes);
    }
    if (format == "json") {
      arr.push_back({{"query", row.query},
                     {"group", qrel::to_string(row.group)},
                     {"event", row.event},
                     {"n", n},
                     {"empirical", json_or_null(emp)},
                     {"ci_lo", json_or_null(lo)},
                     {"ci_hi", json_or_null(hi)},
                     {"quantum", json_or_null(row.quantum)},
                     {"bayes_chain", json_or_null(row.bayes)},
                     {"quantum_abs_err", json_or_null(err_q)},
                     {"bayes_abs_err", json_or_null(err_b)}});
      continue;
    }
    table.push_back({row.query, qrel::to_string(row.group), row.event,
                     std::to_string(n), cell_or(emp, absent), cell_or(lo, absent),
                     cell_or(hi, absent), cell_or(row.quantum, absent),
                     cell_or(row.bayes, absent), cell_or(err_q, absent),
                     cell_or(err_b, absent)});
  }
  if (format == "json") return arr.dump(2) + "\n";
  return csv ? render_csv(table) : render_table(table);
}

int cmd_compare(const Options& opt) {
  LoadedInput in = load_input(opt.input);
  std::string query = resolve_query(in.freqs, opt.query);
  std::optional<qrel::ModelParams> model;
  if (!opt.model_spec.empty()) {
    model = parse_model_spec(opt.model_spec);
  } else {
    // No explicit model: fit one from the same table so the quantum column
    // shows what the fitted model implies.
    Options fit_opt = opt;
    fit_opt.bootstrap = 0;
    model = run_fit(in, query, fit_opt).params;
  }
  auto rows = collect_compare_rows(in.freqs, query, model);
  emit(render_compare(rows, opt.format), opt.output);
  return 0;
}

// ---- pipeline ----

int cmd_pipeline(const Options& opt) {
  if (opt.output.empty()) throw UsageError("--output DIR is required");
  std::filesystem::create_directories(opt.output);
  auto path = [&](const char* name) {
    return (std::filesystem::path(opt.output) / name).string();
  };

  qrel::Protocol proto = build_protocol(opt);
  std::vector<qrel::JudgementRecord> records = qrel::run_protocol(proto);
  qrel::write_text_file(path("records.csv"), qrel::records_to_csv(records));

  qrel::FrequencyTable freqs = qrel::aggregate(records);
  qrel::write_text_file(path("freqs.csv"), freqs.to_csv());

  LoadedInput in;
  in.records = records;
  in.freqs = freqs;
  std::string query = resolve_query(freqs, opt.query);
  std::optional<qrel::ModelParams> fitted;
  std::string fit_json;
  try {
    qrel::FitResult fit = run_fit(in, query, opt);
    fitted = fit.params;
    fit_json = fit_to_json(query, opt.method, fit).dump(2) + "\n";
  } catch (const qrel::Error& e) {
    // Keep going: delta/compare still run, with the flag model if quantum.
    fit_json = json{{"query", query}, {"error", e.what()}}.dump(2) + "\n";
  }
  qrel::write_text_file(path("fit.json"), fit_json);

  std::optional<qrel::ModelParams> model = fitted;
  if (!model && !opt.model_spec.empty()) model = parse_model_spec(opt.model_spec);

  auto delta_rows = collect_delta_rows(freqs, "", model);
  if (delta_rows.empty()) throw qrel::Error("no conjunction/disjunction groups found");
  qrel::write_text_file(path("delta.csv"), render_delta(delta_rows, "csv"));

  auto compare_rows = collect_compare_rows(freqs, query, model);
  qrel::write_text_file(path("compare.csv"), render_compare(compare_rows, "csv"));

  for (const char* name : {"records.csv", "freqs.csv", "fit.json", "delta.csv",
                           "compare.csv"}) {
    std::cout << path(name) << "\n";
  }
  return 0;
}

// ---- config files ----

// A config file is a flat JSON object of flag values, keyed by the long flag
// name without dashes: {"seed": 7, "model": "t=0.8", "n": 500}.  It only
// fills flags the command line left unset, so explicit flags always win.
// Every problem (unreadable file, bad JSON, keys this subcommand does not
// have, bad values) is a usage error.
void apply_config(const CLI::App* sub, Options& opt) {
  if (opt.config.empty()) return;
  json doc;
  try {
    doc = json::parse(qrel::read_text_file(opt.config));
  } catch (const qrel::Error& e) {
    throw UsageError(std::string("--config: ") + e.what());
  } catch (const json::exception& e) {
    throw UsageError("--config: file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw UsageError("--config: expected a JSON object of flag values");

  auto str = [](const std::string& key, const json& v) -> std::string {
    if (!v.is_string()) throw UsageError("--config: key '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto integer = [](const std::string& key, const json& v) -> long long {
    if (v.is_number_integer()) return v.get<long long>();
    throw UsageError("--config: key '" + key + "' must be an integer");
  };
  auto member = [](const std::string& key, const std::string& v,
                   const std::vector<std::string>& allowed) -> std::string {
    for (const auto& a : allowed) {
      if (v == a) return v;
    }
    std::string msg = "--config: key '" + key + "' must be one of";
    for (const auto& a : allowed) msg += " " + a;
    throw UsageError(msg);
  };

  for (const auto& [key, value] : doc.items()) {
    const CLI::Option* op = sub->get_option_no_throw("--" + key);
    if (op == nullptr || key == "config") {
      throw UsageError("--config: '" + key + "' is not a flag of this subcommand");
    }
    if (op->count() > 0) continue;
    if (key == "input") opt.input = str(key, value);
    else if (key == "output") opt.output = str(key, value);
    else if (key == "format") opt.format = member(key, str(key, value), opt.format_choices);
    else if (key == "query") opt.query = str(key, value);
    else if (key == "model") opt.model_spec = str(key, value);
    else if (key == "classical") opt.classical_path = str(key, value);
    else if (key == "groups") opt.groups_spec = str(key, value);
    else if (key == "method") opt.method = member(key, str(key, value), {"closed-form", "lsq"});
    else if (key == "paired-order")
      opt.paired_order = member(key, str(key, value), {"randomized", "u-then-r", "r-then-u"});
    else if (key == "seed") {
      long long v = integer(key, value);
      if (v < 0) throw UsageError("--config: key 'seed' must be non-negative");
      opt.seed = static_cast<std::uint64_t>(v);
    } else if (key == "n") {
      opt.n = static_cast<int>(integer(key, value));
    } else if (key == "bootstrap") {
      opt.bootstrap = static_cast<int>(integer(key, value));
    }
  }
}

void add_common_flags(CLI::App* sub, Options& opt, bool with_input) {
  if (with_input) sub->add_option("--input", opt.input, "Records (CSV/JSON) or frequency CSV");
  sub->add_option("--output", opt.output, "Write result here instead of stdout");
  sub->add_option("--config", opt.config, "JSON file with flag defaults (explicit flags win)");
}

void add_format_flag(CLI::App* sub, Options& opt, const std::string& def,
                     const std::vector<std::string>& allowed) {
  opt.format = def;
  opt.format_choices = allowed;
  sub->add_option("--format", opt.format, "Output format")
      ->check(CLI::IsMember(allowed))
      ->capture_default_str();
}

void add_protocol_flags(CLI::App* sub, Options& opt) {
  sub->add_option("--model", opt.model_spec, "Quantum agents: t=..,u=..,r=..,theta=..");
  sub->add_option("--classical", opt.classical_path, "Classical agents: joint-table JSON file");
  sub->add_option("--n", opt.n, "Agents per group");
  sub->add_option("--groups", opt.groups_spec, "Per-group sizes, e.g. TUR=200,ConjPP=50");
  sub->add_option("--seed", opt.seed, "Simulation seed");
  sub->add_option("--query", opt.query, "Query id for the simulated records");
  sub->add_option("--paired-order", opt.paired_order,
                  "Order of the internal U/R pair measurement")
      ->check(CLI::IsMember({"randomized", "u-then-r", "r-then-u"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential-measurement model of relevance judgements"};
  app.require_subcommand(1);

  Options sim_opt, agg_opt, fix_opt, fit_opt, delta_opt, cmp_opt, pipe_opt;

  CLI::App* sim = app.add_subcommand("simulate", "Generate agent records");
  add_protocol_flags(sim, sim_opt);
  add_common_flags(sim, sim_opt, false);
  add_format_flag(sim, sim_opt, "csv", {"csv", "json"});

  CLI::App* agg = app.add_subcommand("aggregate", "Count records into a frequency table");
  add_common_flags(agg, agg_opt, true);
  add_format_flag(agg, agg_opt, "csv", {"table", "csv", "json"});

  CLI::App* fix = app.add_subcommand("fixture", "Emit the built-in reference counts");
  add_common_flags(fix, fix_opt, false);
  add_format_flag(fix, fix_opt, "csv", {"table", "csv", "json"});

  CLI::App* fit = app.add_subcommand("fit", "Estimate model parameters");
  add_common_flags(fit, fit_opt, true);
  add_format_flag(fit, fit_opt, "table", {"table", "csv", "json"});
  fit->add_option("--query", fit_opt.query, "Query to fit (default: the only one)");
  fit->add_option("--method", fit_opt.method, "Fit method")
      ->check(CLI::IsMember({"closed-form", "lsq"}))
      ->capture_default_str();
  fit->add_option("--bootstrap", fit_opt.bootstrap,
                  "Bootstrap replicates for parameter CIs (needs records)");
  fit->add_option("--seed", fit_opt.seed, "Seed for lsq restarts and the bootstrap");

  CLI::App* del = app.add_subcommand("delta", "Kolmogorov additivity check");
  add_common_flags(del, delta_opt, true);
  add_format_flag(del, delta_opt, "table", {"table", "csv", "json"});
  del->add_option("--query", delta_opt.query, "Restrict to one query");
  del->add_option("--model", delta_opt.model_spec,
                  "Add the model-implied delta column: t=..,u=..,r=..,theta=..");

  CLI::App* cmp = app.add_subcommand("compare", "Quantum vs. Bayesian cross-order predictions");
  add_common_flags(cmp, cmp_opt, true);
  add_format_flag(cmp, cmp_opt, "table", {"table", "csv", "json"});
  cmp->add_option("--query", cmp_opt.query, "Query to compare (default: the only one)");
  cmp->add_option("--model", cmp_opt.model_spec,
                  "Model for the quantum column (default: fit from the input)");
  cmp->add_option("--method", cmp_opt.method, "Fit method when no --model")
      ->check(CLI::IsMember({"closed-form", "lsq"}))
      ->capture_default_str();
  cmp->add_option("--seed", cmp_opt.seed, "Seed for the lsq fit");

  CLI::App* pipe = app.add_subcommand("pipeline", "simulate + aggregate + fit + delta + compare");
  add_protocol_flags(pipe, pipe_opt);
  pipe->add_option("--output", pipe_opt.output, "Directory for the five result files");
  pipe->add_option("--config", pipe_opt.config, "JSON file with flag defaults (explicit flags win)");
  pipe->add_option("--method", pipe_opt.method, "Fit method")
      ->check(CLI::IsMember({"closed-form", "lsq"}))
      ->capture_default_str();
  pipe->add_option("--bootstrap", pipe_opt.bootstrap, "Bootstrap replicates for the fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) { apply_config(sim, sim_opt); return cmd_simulate(sim_opt); }
    if (agg->parsed()) { apply_config(agg, agg_opt); return cmd_aggregate(agg_opt); }
    if (fix->parsed()) { apply_config(fix, fix_opt); return cmd_fixture(fix_opt); }
    if (fit->parsed()) { apply_config(fit, fit_opt); return cmd_fit(fit_opt); }
    if (del->parsed()) { apply_config(del, delta_opt); return cmd_delta(delta_opt); }
    if (cmp->parsed()) { apply_config(cmp, cmp_opt); return cmd_compare(cmp_opt); }
    if (pipe->parsed()) { apply_config(pipe, pipe_opt); return cmd_pipeline(pipe_opt); }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Copyright 2026 The ToxiShield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON and JSON-lines encodings of the public types, plus plain-text report
// tables.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxishield/core.hpp"
#include "toxishield/curation.hpp"
#include "toxishield/metrics.hpp"
#include "toxishield/parse.hpp"
#include "toxishield/pipeline.hpp"

namespace toxishield::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON lines
// ---------------------------------------------------------------------------

/// Calls `fn(record, line_number)` for every non-blank line.
inline void read_jsonl(std::istream& in, const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw InvalidArgument("line " + std::to_string(lineno) + ": not a JSON object");
    fn(j, lineno);
  }
}

inline void read_jsonl_file(const std::string& path, const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  read_jsonl(in, fn);
}

inline void write_jsonl(std::ostream& out, const std::vector<json>& records) {
  for (const auto& r : records) out << r.dump() << '\n';
}

inline void write_jsonl_file(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_jsonl(out, records);
}

// ---------------------------------------------------------------------------
// Dataset records {id, body, p?, label?}
// ---------------------------------------------------------------------------

struct DatasetRecord {
  TextSample sample;
  std::optional<double> p;
  std::optional<std::string> label;
};

inline DatasetRecord dataset_record(const json& j, std::size_t lineno = 0) {
  auto where = [&] { return lineno ? "line " + std::to_string(lineno) + ": " : std::string(); };
  if (!j.contains("body") || !j["body"].is_string()) throw InvalidArgument(where() + "record needs a string 'body'");
  DatasetRecord r;
  r.sample.body = j["body"].get<std::string>();
  if (j.contains("id")) r.sample.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
  else r.sample.id = std::to_string(lineno);
  if (j.contains("source") && j["source"].is_string()) r.sample.source = source_from_string(j["source"].get<std::string>());
  if (j.contains("metadata") && j["metadata"].is_object())
    for (const auto& [k, v] : j["metadata"].items()) r.sample.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
  if (j.contains("p") && !j["p"].is_null()) r.p = j["p"].get<double>();
  if (j.contains("label") && !j["label"].is_null())
    r.label = j["label"].is_string() ? j["label"].get<std::string>() : j["label"].dump();
  return r;
}

inline json to_json(const DatasetRecord& r) {
  json j{{"id", r.sample.id}, {"body", r.sample.body}};
  if (r.p) j["p"] = *r.p;
  if (r.label) j["label"] = *r.label;
  if (!r.sample.metadata.empty()) j["metadata"] = r.sample.metadata;
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline types
// ---------------------------------------------------------------------------

inline json labels_json(const LabelSet& s) {
  json arr = json::array();
  for (Category c : s.labels()) arr.push_back(std::string(canonical_name(c)));
  return arr;
}

inline json to_json(const ClassificationResult& r) {
  json j{{"labels", labels_json(r.labels)}, {"rationale", r.rationale}, {"retry_count", r.retry_count}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

inline json to_json(const DetoxResult& r) {
  return {{"detoxified", r.detoxified}, {"rationale", r.rationale}, {"retry_count", r.retry_count}};
}

inline json to_json(const StageFailure& f) { return {{"type", f.kind}, {"message", f.message}}; }

inline json to_json(const AnalysisVerdict& v) {
  json j{
      {"id", v.id},
      {"score", v.score.value()},
      {"label", std::string(to_string(v.label))},
      {"degraded", {{"coach", v.coach_degraded()}, {"reframer", v.reframer_degraded()}}},
      {"timings_ms",
       {{"filter", v.timings.filter_ms},
        {"downstream", v.timings.downstream_ms},
        {"total", v.timings.total_ms},
        {"coach", v.timings.coach_ms},
        {"reframer", v.timings.reframer_ms}}},
  };
  if (v.classification) j["classification"] = to_json(*v.classification);
  if (v.detox) j["detox"] = to_json(*v.detox);
  json errors = json::object();
  if (v.coach_error) errors["coach"] = to_json(*v.coach_error);
  if (v.reframer_error) errors["reframer"] = to_json(*v.reframer_error);
  if (!errors.empty()) j["errors"] = errors;
  return j;
}

inline json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"type", kind}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// Curation records
// ---------------------------------------------------------------------------

inline json to_json(const curation::Candidate& c, const curation::BinSpec& spec = {}) {
  return {{"id", c.sample.id}, {"body", c.sample.body}, {"p", c.score.value()}, {"bin", c.bin},
          {"bin_range", spec.describe(c.bin)}};
}

inline json to_json(const curation::ParallelPair& p) {
  return {{"id", p.id},
          {"toxic_text", p.toxic_text},
          {"detoxified_text", p.detoxified_text},
          {"rationale", p.rationale},
          {"teacher_model", p.teacher_model},
          {"created_at", p.created_at}};
}

inline json to_json(const curation::CorpusFailure& f) {
  return {{"id", f.id}, {"index", f.index}, {"type", f.kind}, {"message", f.message}};
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline json to_json(const metrics::ClassMetrics& c) {
  return {{"label", c.label},   {"precision", c.precision}, {"recall", c.recall},
          {"f1", c.f1},         {"mcc", c.mcc},             {"support", c.support},
          {"tp", c.counts.tp},  {"fp", c.counts.fp},        {"fn", c.counts.fn},
          {"tn", c.counts.tn},  {"zero_division", c.zero_division}};
}

inline json to_json(const metrics::Aggregate& a) {
  return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}, {"mcc", a.mcc}};
}

inline json to_json(const metrics::MetricsReport& r) {
  json classes = json::array();
  for (const auto& c : r.per_class) classes.push_back(to_json(c));
  return {{"instances", r.instances},   {"accuracy", r.accuracy},          {"exact_match", r.exact_match},
          {"avg", to_json(r.avg)},      {"macro", to_json(r.macro)},       {"avg_mcc_pooled", r.avg_mcc_pooled},
          {"per_class", classes},       {"zero_division", r.zero_division}};
}

inline metrics::TstPair tst_pair(const json& j, std::size_t lineno = 0) {
  try {
    metrics::TstPair p;
    p.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump()) : std::to_string(lineno);
    p.orig_text = j.value("orig_text", "");
    p.detox_text = j.value("detox_text", "");
    p.orig_p = j.at("orig_p").get<double>();
    p.detox_p = j.at("detox_p").get<double>();
    p.fluent = j.at("fluent").is_boolean() ? (j["fluent"].get<bool>() ? 1.0 : 0.0) : j["fluent"].get<double>();
    p.sim = j.at("sim").get<double>();
    return p;
  } catch (const json::exception& e) {
    throw InvalidArgument("line " + std::to_string(lineno) + ": " + e.what());
  }
}

inline json to_json(const metrics::TstReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"id", p.id}, {"orig_p", p.orig_p}, {"detox_p", p.detox_p}, {"fluent", p.fluent}, {"sim", p.sim}});
  return {{"detox", r.detox},
          {"fluency", r.fluency},
          {"preserve", r.preserve},
          {"j_score", r.j_score},
          {"detox_mode", r.mode == metrics::DetoxMode::net_reduction ? "net_reduction" : "style_accuracy"},
          {"pairs", pairs}};
}

inline json to_json(const metrics::AgreementReport& r) {
  return {{"kappa", r.kappa},
          {"weighting", r.weighting == metrics::Weighting::quadratic ? "quadratic" : "unweighted"},
          {"scale", r.scale},
          {"observed_disagreement", r.observed_disagreement},
          {"expected_disagreement", r.expected_disagreement}};
}

// ---------------------------------------------------------------------------
// Text tables
// ---------------------------------------------------------------------------

inline std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      if (c == 0) out << std::left << std::setw(static_cast<int>(width[c])) << cell;
      else out << "  " << std::right << std::setw(static_cast<int>(width[c])) << cell;
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

/// Binary layout: P0 R0 F1_0 | P1 R1 F1_1 | Accuracy.
inline std::string binary_table(const std::string& name, const metrics::MetricsReport& r) {
  const auto& n = r.per_class.at(0);
  const auto& t = r.per_class.at(1);
  return table({"Model", "P0", "R0", "F1_0", "P1", "R1", "F1_1", "Accuracy"},
               {{name, fixed(n.precision), fixed(n.recall), fixed(n.f1), fixed(t.precision), fixed(t.recall),
                 fixed(t.f1), fixed(r.accuracy)}});
}

/// Multi-label layout: EM then Avg/Macro for P, R, F1, MCC; per-class rows below.
inline std::string multilabel_table(const std::string& name, const metrics::MetricsReport& r) {
  std::string out = table({"Model", "EM", "P avg", "P macro", "R avg", "R macro", "F1 avg", "F1 macro", "MCC avg",
                           "MCC macro"},
                          {{name, fixed(r.exact_match), fixed(r.avg.precision), fixed(r.macro.precision),
                            fixed(r.avg.recall), fixed(r.macro.recall), fixed(r.avg.f1), fixed(r.macro.f1),
                            fixed(r.avg.mcc), fixed(r.macro.mcc)}});
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : r.per_class)
    rows.push_back({c.label, std::to_string(c.support), fixed(c.precision), fixed(c.recall), fixed(c.f1), fixed(c.mcc)});
  return out + "\n" + table({"Class", "Support", "P", "R", "F1", "MCC"}, rows);
}

/// DETOX / FL / PRESERVE / J-Score in percent.
inline std::string tst_table(const std::string& name, const metrics::TstReport& r) {
  return table({"Model", "DETOX (%)", "FL (%)", "PRESERVE (%)", "J-Score (%)"},
               {{name, fixed(r.detox), fixed(r.fluency), fixed(r.preserve), fixed(r.j_score)}});
}

}  // namespace toxishield::io

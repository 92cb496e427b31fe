// Copyright 2026 The speechcaps-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "speechcaps/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "speechcaps/error.hpp"

namespace speechcaps {

namespace {

std::optional<Ratio> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return Ratio(num, den);
}

Counts tally(const JudgeVerdict& v) { return {1, v.relevant ? 1 : 0, v.aligned ? 1 : 0}; }

}  // namespace

std::optional<Ratio> Counts::if_rate() const { return ratio(n_relevant, n_total); }
std::optional<Ratio> Counts::overall_acc() const { return ratio(n_aligned, n_total); }
std::optional<Ratio> Counts::cond_acc() const { return ratio(n_aligned, n_relevant); }

double to_double(const Ratio& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::vector<EvalReport> compute_report(std::span<const JudgeVerdict> verdicts,
                                       std::span<const QAItem> qa) {
  std::map<std::pair<std::string, std::string>, const QAItem*> index;
  for (const auto& item : qa) index.emplace(std::pair(item.clip_id, item.question), &item);

  std::map<std::string, EvalReport> by_model;
  for (const auto& v : verdicts) {
    auto it = index.find({v.clip_id, v.question});
    if (it == index.end()) {
      throw Error(ErrorCode::kKeyMismatch,
                  fmt::format("verdict ({}, {}) has no QA entry", v.clip_id, v.question));
    }
    if (v.aligned && !v.relevant) {
      throw Error(ErrorCode::kInvariantViolation,
                  fmt::format("verdict ({}, {}, {}) is aligned but not relevant", v.clip_id,
                              v.question, v.model_tag));
    }
    auto& report = by_model[v.model_tag];
    report.model_tag = v.model_tag;
    if (v.failed) {
      ++report.n_failed;
      continue;
    }
    const Counts c = tally(v);
    report.counts += c;
    report.breakdowns["attribute:" + std::string(to_string(it->second->attribute))] += c;
    report.breakdowns["kind:" + std::string(to_string(it->second->kind))] += c;
  }
  std::vector<EvalReport> out;
  out.reserve(by_model.size());
  for (auto& [tag, r] : by_model) out.push_back(std::move(r));
  return out;
}

IdentityCheck verify_identity(const EvalReport& report) {
  const auto& c = report.counts;
  auto ifr = c.if_rate();
  auto overall = c.overall_acc();
  auto cond = c.cond_acc();
  if (!ifr || !overall || !cond) return {false, 0.0};
  const Ratio residual = boost::abs(*overall - *ifr * *cond);
  return {residual == Ratio(0), to_double(residual)};
}

IdentityCheck verify_identity(double if_rate, double overall_acc, double cond_acc,
                              double tolerance) {
  const double residual = std::abs(overall_acc - if_rate * cond_acc);
  return {residual <= tolerance, residual};
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "markdown" || s == "md" || s == "markdown-table") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  return std::nullopt;
}

namespace {

Json ratio_json(const std::optional<Ratio>& r) {
  if (!r) return nullptr;
  return to_double(*r);
}

Json counts_json(const Counts& c) {
  Json j;
  j["n_total"] = c.n_total;
  j["n_relevant"] = c.n_relevant;
  j["n_aligned"] = c.n_aligned;
  j["if_rate"] = ratio_json(c.if_rate());
  j["overall_acc"] = ratio_json(c.overall_acc());
  j["cond_acc"] = ratio_json(c.cond_acc());
  return j;
}

Counts counts_from_json(const Json& j) {
  return {j.at("n_total").get<std::int64_t>(), j.at("n_relevant").get<std::int64_t>(),
          j.at("n_aligned").get<std::int64_t>()};
}

std::string fixed3(const std::optional<Ratio>& r) {
  return r ? fmt::format("{:.3f}", to_double(*r)) : std::string("—");
}

std::string full(const std::optional<Ratio>& r) {
  return r ? fmt::format("{:.17g}", to_double(*r)) : std::string();
}

}  // namespace

Json to_json(const EvalReport& r) {
  Json j;
  j["model_tag"] = r.model_tag;
  const Json counts = counts_json(r.counts);
  for (const auto& [k, v] : counts.items()) j[k] = v;
  j["n_failed"] = r.n_failed;
  Json b = Json::object();
  for (const auto& [key, c] : r.breakdowns) b[key] = counts_json(c);
  j["breakdowns"] = std::move(b);
  return j;
}

EvalReport report_from_json(const Json& j) {
  try {
    EvalReport r;
    r.model_tag = j.at("model_tag").get<std::string>();
    r.counts = counts_from_json(j);
    r.n_failed = j.value("n_failed", std::int64_t{0});
    if (j.contains("breakdowns")) {
      for (const auto& [key, c] : j.at("breakdowns").items()) r.breakdowns[key] = counts_from_json(c);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("report: ") + e.what());
  }
}

std::string render_report(std::span<const EvalReport> reports, ReportFormat format) {
  std::vector<const EvalReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](auto* a, auto* b) { return a->model_tag < b->model_tag; });

  std::string out;
  switch (format) {
    case ReportFormat::kJson: {
      Json arr = Json::array();
      for (auto* r : sorted) arr.push_back(to_json(*r));
      Json doc;
      doc["reports"] = std::move(arr);
      out = doc.dump(2) + "\n";
      break;
    }
    case ReportFormat::kMarkdown: {
      out += "| Metric |";
      for (auto* r : sorted) out += " " + r->model_tag + " |";
      out += "\n|---|";
      for (std::size_t i = 0; i < sorted.size(); ++i) out += "---|";
      out += "\n";
      const std::pair<const char*, std::optional<Ratio> (Counts::*)() const> rows[] = {
          {"(a) IF Rate", &Counts::if_rate},
          {"(b) Overall Acc.", &Counts::overall_acc},
          {"(c) Cond. Acc.", &Counts::cond_acc}};
      for (const auto& [label, fn] : rows) {
        out += fmt::format("| {} |", label);
        for (auto* r : sorted) out += " " + fixed3((r->counts.*fn)()) + " |";
        out += "\n";
      }
      out += "\n| Model | Group | N | IF Rate | Overall Acc. | Cond. Acc. |\n";
      out += "|---|---|---|---|---|---|\n";
      for (auto* r : sorted) {
        for (const auto& [key, c] : r->breakdowns) {
          out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", r->model_tag, key, c.n_total,
                             fixed3(c.if_rate()), fixed3(c.overall_acc()), fixed3(c.cond_acc()));
        }
      }
      break;
    }
    case ReportFormat::kCsv: {
      out = "model_tag,group,n_total,n_relevant,n_aligned,n_failed,if_rate,overall_acc,cond_acc\n";
      auto line = [&](const EvalReport& r, const std::string& group, const Counts& c,
                      std::int64_t failed) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.model_tag, group, c.n_total,
                           c.n_relevant, c.n_aligned, failed, full(c.if_rate()),
                           full(c.overall_acc()), full(c.cond_acc()));
      };
      for (auto* r : sorted) {
        line(*r, "all", r->counts, r->n_failed);
        for (const auto& [key, c] : r->breakdowns) line(*r, key, c, 0);
      }
      break;
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  for (auto& cell : cells) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
  }
  return cells;
}

std::vector<std::vector<std::string>> csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

template <typename T>
T parse_number(const std::string& s, std::size_t row) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::kSchema, fmt::format("row {}: '{}' is not a number", row, s));
  }
  return v;
}

std::size_t column(const std::vector<std::string>& header, std::string_view name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::kSchema, fmt::format("missing column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<EvalReport> parse_report_csv(std::string_view text) {
  const auto rows = csv_rows(text);
  if (rows.empty()) throw Error(ErrorCode::kSchema, "empty report csv");
  const auto& h = rows.front();
  const std::size_t c_model = column(h, "model_tag"), c_group = column(h, "group"),
                    c_total = column(h, "n_total"), c_rel = column(h, "n_relevant"),
                    c_ali = column(h, "n_aligned"), c_fail = column(h, "n_failed");
  std::vector<EvalReport> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != h.size()) throw Error(ErrorCode::kSchema, fmt::format("row {}: wrong cell count", i));
    const Counts c{parse_number<std::int64_t>(r[c_total], i), parse_number<std::int64_t>(r[c_rel], i),
                   parse_number<std::int64_t>(r[c_ali], i)};
    if (r[c_group] == "all") {
      EvalReport rep;
      rep.model_tag = r[c_model];
      rep.counts = c;
      rep.n_failed = parse_number<std::int64_t>(r[c_fail], i);
      out.push_back(std::move(rep));
    } else {
      if (out.empty() || out.back().model_tag != r[c_model]) {
        throw Error(ErrorCode::kSchema, fmt::format("row {}: breakdown before its summary row", i));
      }
      out.back().breakdowns[r[c_group]] = c;
    }
  }
  return out;
}

std::vector<TableRow> parse_result_table(std::string_view csv_text) {
  const auto rows = csv_rows(csv_text);
  if (rows.empty()) throw Error(ErrorCode::kSchema, "empty table");
  const auto& h = rows.front();
  const std::size_t c_model = column(h, "model"), c_if = column(h, "if_rate"),
                    c_overall = column(h, "overall_acc"), c_cond = column(h, "cond_acc");
  std::vector<TableRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != h.size()) throw Error(ErrorCode::kSchema, fmt::format("row {}: wrong cell count", i));
    out.push_back({r[c_model], parse_number<double>(r[c_if], i), parse_number<double>(r[c_overall], i),
                   parse_number<double>(r[c_cond], i)});
  }
  return out;
}

}  // namespace speechcaps

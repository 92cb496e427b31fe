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

#ifndef SPEECHCAPS_METRICS_HPP_
#define SPEECHCAPS_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "speechcaps/judge.hpp"
#include "speechcaps/promptgen.hpp"

namespace speechcaps {

using Ratio = boost::rational<std::int64_t>;

// Integer tallies; every ratio is derived from these on demand.
struct Counts {
  std::int64_t n_total = 0;
  std::int64_t n_relevant = 0;
  std::int64_t n_aligned = 0;

  Counts& operator+=(const Counts& o) {
    n_total += o.n_total;
    n_relevant += o.n_relevant;
    n_aligned += o.n_aligned;
    return *this;
  }
  bool operator==(const Counts&) const = default;

  std::optional<Ratio> if_rate() const;
  std::optional<Ratio> overall_acc() const;
  /// Undefined when nothing was relevant.
  std::optional<Ratio> cond_acc() const;
};

struct EvalReport {
  std::string model_tag;
  Counts counts;
  std::int64_t n_failed = 0;  // verdicts excluded because judging failed
  // Keys are "attribute:<name>" and "kind:<name>".
  std::map<std::string, Counts> breakdowns;

  bool operator==(const EvalReport&) const = default;
};

/// One report per model_tag, sorted by tag. Raises kKeyMismatch for a
/// verdict without a QA entry and kInvariantViolation for aligned without
/// relevant.
std::vector<EvalReport> compute_report(std::span<const JudgeVerdict> verdicts,
                                       std::span<const QAItem> qa);

double to_double(const Ratio& r);

struct IdentityCheck {
  bool holds = false;
  double residual = 0.0;
};

/// Exact check on counted reports: overall == if * cond with zero residual.
IdentityCheck verify_identity(const EvalReport& report);

/// Check for externally rounded figures: |overall - if * cond| <= tolerance.
IdentityCheck verify_identity(double if_rate, double overall_acc, double cond_acc,
                              double tolerance = 0.0015);

enum class ReportFormat { kJson, kMarkdown, kCsv };
std::optional<ReportFormat> parse_report_format(std::string_view s);

Json to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);

std::string render_report(std::span<const EvalReport> reports, ReportFormat format);

/// Reads the csv rendering back into counts (ratios are recomputed).
std::vector<EvalReport> parse_report_csv(std::string_view text);

struct TableRow {
  std::string model;
  double if_rate = 0.0;
  double overall_acc = 0.0;
  double cond_acc = 0.0;
};

/// Columns: model,if_rate,overall_acc,cond_acc (header required).
std::vector<TableRow> parse_result_table(std::string_view csv_text);

}  // namespace speechcaps

#endif  // SPEECHCAPS_METRICS_HPP_

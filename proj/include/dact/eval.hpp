// Copyright 2026 The dact Authors.
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

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dact/common.hpp"

namespace dact {

// Rows are gold classes, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

  void add(std::size_t gold, std::size_t predicted, std::size_t n = 1);
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * classes_ + predicted]; }
  std::size_t classes() const { return classes_; }
  std::size_t total() const;
  std::size_t gold_count(std::size_t c) const;
  std::size_t predicted_count(std::size_t c) const;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

enum class MacroAverage {
  kGoldPresent,  // classes that occur in the gold sequence
  kAllClasses,   // every class of the tag set
};

struct ClassScore {
  std::string tag;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

double accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& predicted);
double accuracy(const std::vector<int>& gold, const std::vector<int>& predicted);

/// Per-class F1 = 2PR / (P + R); P or R is 0 when its denominator is 0 and F1 is 0
/// when P + R = 0. Predictions outside `tag_set` count as errors of the gold class.
double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                const std::vector<std::string>& tag_set, MacroAverage mode = MacroAverage::kGoldPresent);
double macro_f1(const std::vector<int>& gold, const std::vector<int>& predicted, std::size_t classes,
                MacroAverage mode = MacroAverage::kGoldPresent);

ConfusionMatrix confusion_matrix(const std::vector<int>& gold, const std::vector<int>& predicted, std::size_t classes);
std::vector<ClassScore> class_scores(const ConfusionMatrix& cm, const std::vector<std::string>& tag_set);

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// One line of a results table: a train/test configuration with an (Acc, F1)
// pair per architecture and history setting. Cells follow kReportColumns.
struct ReportRow {
  std::string train;
  std::string test;
  std::array<std::optional<Metrics>, 6> cells;
};

// Column order of the results tables: (architecture, with history) pairs.
inline constexpr std::array<std::pair<const char*, bool>, 6> kReportColumns{{
    {"cnn1", true}, {"cnn1", false}, {"cnn2", true}, {"cnn2", false}, {"bilstm", true}, {"bilstm", false}}};

std::size_t report_column(const std::string& architecture, bool with_history);

/// Writes the percentage table (1 decimal) to `path` and a full-precision
/// sidecar next to it (`<stem>_full.csv`).
void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::string format_report(const std::vector<ReportRow>& rows, bool full_precision);

void write_class_scores(const std::vector<ClassScore>& scores, const std::filesystem::path& path);

}  // namespace dact

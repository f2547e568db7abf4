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

#include "dact/eval.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace dact {

namespace {

void check_lengths(std::size_t gold, std::size_t predicted) {
  if (gold != predicted) {
    throw DataError("gold and predicted sequences differ in length (" + std::to_string(gold) + " vs " +
                    std::to_string(predicted) + ")");
  }
}

// Maps tags onto class indices; tags outside the set map to `classes` (an overflow column).
std::vector<int> to_indices(const std::vector<std::string>& tags, const std::map<std::string, int>& index, int overflow) {
  std::vector<int> out;
  out.reserve(tags.size());
  for (const auto& t : tags) {
    const auto it = index.find(t);
    out.push_back(it == index.end() ? overflow : it->second);
  }
  return out;
}

double f1_of(std::size_t tp, std::size_t gold, std::size_t predicted) {
  const double p = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
  const double r = gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::size_t n) {
  if (gold >= classes_ || predicted >= classes_) throw DataError("class index outside the confusion matrix");
  counts_[gold * classes_ + predicted] += n;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::size_t ConfusionMatrix::gold_count(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < classes_; ++p) n += at(c, p);
  return n;
}

std::size_t ConfusionMatrix::predicted_count(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t g = 0; g < classes_; ++g) n += at(g, c);
  return n;
}

double accuracy(const std::vector<int>& gold, const std::vector<int>& predicted) {
  check_lengths(gold.size(), predicted.size());
  if (gold.empty()) throw DataError("accuracy of an empty sequence");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& predicted) {
  check_lengths(gold.size(), predicted.size());
  if (gold.empty()) throw DataError("accuracy of an empty sequence");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

ConfusionMatrix confusion_matrix(const std::vector<int>& gold, const std::vector<int>& predicted, std::size_t classes) {
  check_lengths(gold.size(), predicted.size());
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < gold.size(); ++i)
    cm.add(static_cast<std::size_t>(gold[i]), static_cast<std::size_t>(predicted[i]));
  return cm;
}

double macro_f1(const std::vector<int>& gold, const std::vector<int>& predicted, std::size_t classes,
                MacroAverage mode) {
  // One extra column absorbs predictions outside the class range.
  check_lengths(gold.size(), predicted.size());
  ConfusionMatrix cm(classes + 1);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || static_cast<std::size_t>(gold[i]) >= classes) throw DataError("gold class outside the tag set");
    const auto p = predicted[i] < 0 || static_cast<std::size_t>(predicted[i]) >= classes
                       ? classes
                       : static_cast<std::size_t>(predicted[i]);
    cm.add(static_cast<std::size_t>(gold[i]), p);
  }
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto g = cm.gold_count(c);
    if (mode == MacroAverage::kGoldPresent && g == 0) continue;
    sum += f1_of(cm.at(c, c), g, cm.predicted_count(c));
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                const std::vector<std::string>& tag_set, MacroAverage mode) {
  check_lengths(gold.size(), predicted.size());
  std::map<std::string, int> index;
  for (const auto& t : tag_set) index.emplace(t, static_cast<int>(index.size()));
  for (const auto& t : gold) {
    if (!index.count(t)) throw DataError("gold tag '" + t + "' is not in the tag set");
  }
  const int overflow = static_cast<int>(tag_set.size());
  return macro_f1(to_indices(gold, index, overflow), to_indices(predicted, index, overflow), tag_set.size(), mode);
}

std::vector<ClassScore> class_scores(const ConfusionMatrix& cm, const std::vector<std::string>& tag_set) {
  std::vector<ClassScore> out;
  for (std::size_t c = 0; c < tag_set.size() && c < cm.classes(); ++c) {
    ClassScore s;
    s.tag = tag_set[c];
    s.support = cm.gold_count(c);
    const auto tp = cm.at(c, c);
    const auto pred = cm.predicted_count(c);
    s.precision = pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred);
    s.recall = s.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(s.support);
    s.f1 = f1_of(tp, s.support, pred);
    out.push_back(s);
  }
  return out;
}

std::size_t report_column(const std::string& architecture, bool with_history) {
  for (std::size_t i = 0; i < kReportColumns.size(); ++i)
    if (architecture == kReportColumns[i].first && with_history == kReportColumns[i].second) return i;
  throw DataError("no report column for architecture '" + architecture + "'");
}

std::string format_report(const std::vector<ReportRow>& rows, bool full_precision) {
  std::ostringstream out;
  out << "Train,Test";
  for (const auto& [arch, hist] : kReportColumns) {
    const std::string prefix = std::string(arch) + (hist ? "_with_history" : "_no_history");
    out << ',' << prefix << "_acc," << prefix << "_f1";
  }
  out << '\n';
  for (const auto& row : rows) {
    out << row.train << ',' << row.test;
    for (const auto& cell : row.cells) {
      if (!cell) {
        out << ",,";
        continue;
      }
      if (full_precision) {
        out << ',' << full(cell->accuracy) << ',' << full(cell->macro_f1);
      } else {
        out << ',' << fixed(100.0 * cell->accuracy, 1) << ',' << fixed(100.0 * cell->macro_f1, 1);
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report " + path.string());
    out << format_report(rows, false);
  }
  auto sidecar = path;
  sidecar.replace_filename(path.stem().string() + "_full.csv");
  std::ofstream out(sidecar);
  if (!out) throw DataError("cannot write report " + sidecar.string());
  out << format_report(rows, true);
}

void write_class_scores(const std::vector<ClassScore>& scores, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "tag,support,precision,recall,f1\n";
  for (const auto& s : scores) {
    out << s.tag << ',' << s.support << ',' << full(s.precision) << ',' << full(s.recall) << ',' << full(s.f1) << '\n';
  }
}

}  // namespace dact

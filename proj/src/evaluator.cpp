#include "boscids/evaluator.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "boscids/ingest.hpp"

namespace boscids {

std::string_view to_string(Label label) {
  return label == Label::malicious ? "malicious" : "normal";
}

std::string_view to_string(Granularity granularity) {
  return granularity == Granularity::window ? "window" : "epoch";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
  if (text == "epoch") return Granularity::epoch;
  if (text == "window") return Granularity::window;
  return std::nullopt;
}

Metrics compute_metrics(const std::vector<ReportForTrace>& reports, const LabeledCorpus& corpus,
                        Granularity granularity) {
  std::unordered_map<std::string, const LabeledTrace*> by_id;
  for (const auto& item : corpus) {
    if (!by_id.emplace(item.trace_id, &item).second) {
      throw EvaluationError("duplicate trace id in corpus: " + item.trace_id);
    }
  }

  Metrics m;
  m.granularity = granularity;
  std::unordered_map<std::string, bool> seen;
  for (const auto& r : reports) {
    auto it = by_id.find(r.trace_id);
    if (it == by_id.end()) throw EvaluationError("no labels for trace " + r.trace_id);
    if (!seen.emplace(r.trace_id, true).second) {
      throw EvaluationError("trace reported twice: " + r.trace_id);
    }
    const auto& labels = it->second->epoch_labels;
    const auto& verdicts = r.report.verdicts;
    if (labels.size() != verdicts.size()) {
      throw EvaluationError("trace " + r.trace_id + ": " + std::to_string(labels.size()) +
                            " labels vs " + std::to_string(verdicts.size()) + " epochs");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto& v = verdicts[i];
      const bool malicious = labels[i] == Label::malicious;
      if (granularity == Granularity::epoch) {
        (malicious ? m.n_malicious : m.n_normal) += 1;
        if (v.anomalous) (malicious ? m.n_tp : m.n_fp) += 1;
      } else {
        (malicious ? m.n_malicious : m.n_normal) += v.windows_scanned;
        (malicious ? m.n_tp : m.n_fp) += v.mismatches;
      }
    }
  }
  if (m.n_malicious > 0) m.tpr = static_cast<double>(m.n_tp) / static_cast<double>(m.n_malicious);
  if (m.n_normal > 0) m.fpr = static_cast<double>(m.n_fp) / static_cast<double>(m.n_normal);
  return m;
}

void write_labels(std::ostream& out, const std::vector<Label>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << '\t' << to_string(labels[i]) << '\n';
}

std::vector<Label> read_labels(std::istream& in, std::string_view source) {
  std::vector<Label> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(lineno) + ": ";
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw EvaluationError(where + "expected epoch_index<TAB>label");
    std::size_t index = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, index);
    if (ec != std::errc{} || ptr != line.data() + tab || index != labels.size()) {
      throw EvaluationError(where + "epoch indices must run 0, 1, 2, ...");
    }
    std::string_view label = std::string_view(line).substr(tab + 1);
    if (label == "normal") {
      labels.push_back(Label::normal);
    } else if (label == "malicious") {
      labels.push_back(Label::malicious);
    } else {
      throw EvaluationError(where + "unknown label '" + std::string(label) + "'");
    }
  }
  if (in.bad()) throw IoError("read failure on " + std::string(source));
  return labels;
}

std::vector<Label> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file: " + path);
  return read_labels(in, path);
}

namespace {

std::string rate(const std::optional<double>& r) {
  if (!r) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *r);
  return buf;
}

}  // namespace

std::string metrics_row(const Metrics& m) {
  return std::string(to_string(m.granularity)) + ' ' + std::to_string(m.n_tp) + ' ' +
         std::to_string(m.n_fp) + ' ' + std::to_string(m.n_malicious) + ' ' +
         std::to_string(m.n_normal) + ' ' + rate(m.tpr) + ' ' + rate(m.fpr);
}

std::string metrics_summary(const Metrics& m) {
  auto pct = [](const std::optional<double>& r) {
    if (!r) return std::string("undefined");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *r * 100.0);
    return std::string(buf);
  };
  return "granularity=" + std::string(to_string(m.granularity)) + ": TPR " + pct(m.tpr) + " (" +
         std::to_string(m.n_tp) + "/" + std::to_string(m.n_malicious) + "), FPR " + pct(m.fpr) +
         " (" + std::to_string(m.n_fp) + "/" + std::to_string(m.n_normal) + ")";
}

}  // namespace boscids

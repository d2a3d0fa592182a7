#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "boscids/detector.hpp"

namespace boscids {

enum class Label { normal, malicious };
enum class Granularity { epoch, window };

std::string_view to_string(Label label);
std::string_view to_string(Granularity granularity);
std::optional<Granularity> parse_granularity(std::string_view text);

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledTrace {
  std::string trace_id;
  std::vector<Label> epoch_labels;
};

using LabeledCorpus = std::vector<LabeledTrace>;

struct Metrics {
  Granularity granularity = Granularity::epoch;
  std::size_t n_tp = 0;
  std::size_t n_fp = 0;
  std::size_t n_malicious = 0;
  std::size_t n_normal = 0;
  std::optional<double> tpr;  // empty when n_malicious == 0
  std::optional<double> fpr;  // empty when n_normal == 0
};

struct ReportForTrace {
  std::string trace_id;
  DetectionReport report;
};

/// Matches reports to corpus entries by trace id. Throws EvaluationError for
/// unknown/duplicate ids or when label and verdict counts differ.
Metrics compute_metrics(const std::vector<ReportForTrace>& reports, const LabeledCorpus& corpus,
                        Granularity granularity);

// Label file: `epoch_index<TAB>label` per line, label in {normal, malicious}.
void write_labels(std::ostream& out, const std::vector<Label>& labels);
std::vector<Label> read_labels(std::istream& in, std::string_view source = "<labels>");
std::vector<Label> read_labels_file(const std::string& path);

// `granularity n_tp n_fp n_malicious n_normal tpr fpr`; undefined rates print
// as "undefined".
std::string metrics_row(const Metrics& m);
std::string metrics_summary(const Metrics& m);

}  // namespace boscids

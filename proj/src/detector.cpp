#include "boscids/detector.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace boscids {
namespace {

DetectionReport assemble(std::vector<EpochVerdict> verdicts) {
  DetectionReport report;
  for (const auto& v : verdicts) {
    report.total_windows += v.windows_scanned;
    report.total_mismatches += v.mismatches;
    if (v.anomalous) ++report.anomalous_epochs;
  }
  report.trace_anomalous = report.anomalous_epochs > 0;
  report.verdicts = std::move(verdicts);
  return report;
}

EpochVerdict make_verdict(const TrainedModel& model, std::size_t epoch_index,
                          std::size_t length, std::size_t windows, std::size_t mismatches) {
  EpochVerdict v;
  v.epoch_index = epoch_index;
  v.length = length;
  v.windows_scanned = windows;
  v.mismatches = mismatches;
  v.too_short = length < model.config.window;
  v.threshold_used = model.config.detect_threshold(length);
  v.anomalous = !v.too_short && static_cast<double>(mismatches) > v.threshold_used;
  return v;
}

}  // namespace

std::vector<EpochSpan> epoch_partition(std::size_t total_calls, const Config& config) {
  std::vector<EpochSpan> spans;
  const std::size_t S = config.epoch_size;
  for (std::size_t first = 0; first < total_calls; first += S) {
    const std::size_t len = std::min(S, total_calls - first);
    if (len < S && len < config.window) break;
    spans.push_back({first, len});
  }
  return spans;
}

EpochVerdict scan_epoch(const TrainedModel& model, std::span<const Slot> epoch,
                        std::size_t epoch_index) {
  std::size_t windows = 0, mismatches = 0;
  for_each_bag(epoch, model.config.window, model.index.ns(), [&](const Bosc& bag) {
    ++windows;
    if (!model.db.contains(bag)) ++mismatches;
  });
  return make_verdict(model, epoch_index, epoch.size(), windows, mismatches);
}

DetectionReport detect(const TrainedModel& model, const RawTrace& trace) {
  const std::vector<Slot> slots = model.index.resolve_trace(trace);
  return detect_slots(model, slots);
}

DetectionReport detect_slots(const TrainedModel& model, std::span<const Slot> slots) {
  // Exceptions cannot leave the parallel region; reject bad slots up front.
  if (std::any_of(slots.begin(), slots.end(), [&](Slot s) { return s >= model.index.ns(); })) {
    throw std::invalid_argument("slot stream does not match the model's index");
  }
  const auto spans = epoch_partition(slots.size(), model.config);
  std::vector<EpochVerdict> verdicts(spans.size());
  const auto n = static_cast<std::ptrdiff_t>(spans.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = spans[static_cast<std::size_t>(i)];
    verdicts[static_cast<std::size_t>(i)] =
        scan_epoch(model, slots.subspan(s.first, s.length), static_cast<std::size_t>(i));
  }
  return assemble(std::move(verdicts));
}

DetectionReport detect_slots_serial(const TrainedModel& model, std::span<const Slot> slots) {
  std::vector<EpochVerdict> verdicts;
  const auto spans = epoch_partition(slots.size(), model.config);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto epoch = slots.subspan(spans[i].first, spans[i].length);
    const Windows ws = epoch_windows(epoch, model.config.window);
    std::size_t mismatches = 0;
    for (const auto& w : ws.windows) {
      if (!model.db.contains(bag_of(w, model.index.ns()))) ++mismatches;
    }
    verdicts.push_back(make_verdict(model, i, epoch.size(), ws.windows.size(), mismatches));
  }
  return assemble(std::move(verdicts));
}

void write_report(std::ostream& out, const DetectionReport& report) {
  out << "# epoch_index windows mismatches threshold anomalous\n";
  for (const auto& v : report.verdicts) {
    out << v.epoch_index << ' ' << v.windows_scanned << ' ' << v.mismatches << ' '
        << format_decimal(v.threshold_used) << ' ' << (v.anomalous ? 1 : 0) << '\n';
  }
  out << "# summary epochs=" << report.verdicts.size() << " anomalous_epochs=" << report.anomalous_epochs
      << " windows=" << report.total_windows << " mismatches=" << report.total_mismatches
      << " trace_anomalous=" << (report.trace_anomalous ? 1 : 0) << '\n';
}

}  // namespace boscids

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "boscids/trainer.hpp"

namespace boscids {

struct EpochVerdict {
  std::size_t epoch_index = 0;
  std::size_t length = 0;  // calls in the epoch
  std::size_t windows_scanned = 0;
  std::size_t mismatches = 0;
  double threshold_used = 0.0;
  bool anomalous = false;
  bool too_short = false;  // epoch shorter than the window

  bool operator==(const EpochVerdict&) const = default;
};

struct DetectionReport {
  std::vector<EpochVerdict> verdicts;
  bool trace_anomalous = false;  // OR over verdicts
  std::size_t total_windows = 0;
  std::size_t total_mismatches = 0;
  std::size_t anomalous_epochs = 0;

  bool operator==(const DetectionReport&) const = default;
};

struct EpochSpan {
  std::size_t first = 0;
  std::size_t length = 0;
};

/// Full epochs of S calls, plus the trailing partial epoch when it holds at
/// least w calls.
std::vector<EpochSpan> epoch_partition(std::size_t total_calls, const Config& config);

/// Counts windows whose bag is absent from the model database. Never mutates
/// the model. The threshold scales with the epoch's actual length.
EpochVerdict scan_epoch(const TrainedModel& model, std::span<const Slot> epoch,
                        std::size_t epoch_index = 0);

/// Scans every epoch of `trace`. Epochs are scanned in parallel (OpenMP);
/// verdicts stay in epoch order.
DetectionReport detect(const TrainedModel& model, const RawTrace& trace);
DetectionReport detect_slots(const TrainedModel& model, std::span<const Slot> slots);

/// Single-threaded reference for detect_slots: materializes every window and
/// recounts its bag from scratch.
DetectionReport detect_slots_serial(const TrainedModel& model, std::span<const Slot> slots);

// Rows: `epoch_index windows mismatches threshold anomalous`, then a summary
// line starting with '#'.
void write_report(std::ostream& out, const DetectionReport& report);

}  // namespace boscids

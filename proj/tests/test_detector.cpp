#include <random>
#include <set>
#include <sstream>

#include "boscids/detector.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace boscids;

namespace {

TrainedModel tiny_model() {
  TrainedModel m;
  m.index = SyscallIndex::from_slots({"a", "b"});
  m.config.window = 2;
  m.config.epoch_size = 4;
  m.db = BehaviorDb(3);
  m.db.insert(Bosc(std::vector<Count>{1, 1, 0}));
  return m;
}

TrainedModel random_model(std::mt19937_64& rng, std::size_t ns, std::size_t w, std::size_t S) {
  TrainedModel m;
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < ns; ++i) names.push_back("s" + std::to_string(i));
  m.index = SyscallIndex::from_slots(names);
  m.config.window = w;
  m.config.epoch_size = S;
  m.db = BehaviorDb(ns);
  std::vector<Slot> training(S * 3);
  for (auto& s : training) s = static_cast<Slot>(rng() % (ns > 2 ? 2 : ns));
  for (auto& s : training) if (rng() % 8 == 0) s = static_cast<Slot>(rng() % ns);
  for_each_bag(training, w, ns, [&](const Bosc& bag) { m.db.insert(bag); });
  return m;
}

std::vector<EpochVerdict> oracle_verdicts(const TrainedModel& m, const std::vector<Slot>& slots) {
  std::set<oracle::BagKey> known;
  for (std::size_t i = 0; i < m.db.size(); ++i) known.insert(m.db.key_at(i).counts);
  std::vector<EpochVerdict> out;
  const std::size_t S = m.config.epoch_size, w = m.config.window, ns = m.index.ns();
  for (std::size_t first = 0, e = 0; first < slots.size(); first += S, ++e) {
    const std::size_t len = std::min(S, slots.size() - first);
    if (len < w) break;
    EpochVerdict v;
    v.epoch_index = e;
    v.length = len;
    for (std::size_t i = first; i + w <= first + len; ++i) {
      ++v.windows_scanned;
      if (!known.count(oracle::bag_at(slots, i, w, ns))) ++v.mismatches;
    }
    v.threshold_used = m.config.detect_fraction * static_cast<double>(len);
    v.anomalous = static_cast<double>(v.mismatches) > v.threshold_used;
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("scan_epoch on a a b b against db {[1,1]}") {
  auto model = tiny_model();
  auto trace = RawTrace::from_names({"a", "a", "b", "b"});
  auto slots = model.index.resolve_trace(trace);
  auto v = scan_epoch(model, slots);
  CHECK(v.windows_scanned == 3);
  CHECK(v.mismatches == 2);
  CHECK(v.threshold_used == doctest::Approx(0.4));
  CHECK(v.anomalous);
}

TEST_CASE("threshold comparison is strict") {
  auto model = tiny_model();
  model.config.detect_fraction = 0.5;  // T_d = 2 for a 4-call epoch
  auto slots = model.index.resolve_trace(RawTrace::from_names({"a", "a", "b", "b"}));
  auto v = scan_epoch(model, slots);
  CHECK(v.mismatches == 2);
  CHECK_FALSE(v.anomalous);
}

TEST_CASE("short epoch yields an empty, flagged verdict") {
  auto model = tiny_model();
  std::vector<Slot> one{0};
  auto v = scan_epoch(model, one);
  CHECK(v.windows_scanned == 0);
  CHECK(v.too_short);
  CHECK_FALSE(v.anomalous);
}

TEST_CASE("training data replays clean and the model is never mutated") {
  RawTrace t;
  for (int i = 0; i < 40; ++i) t.push_back(i % 3 == 0 ? "read" : (i % 3 == 1 ? "write" : "futex"));
  Config cfg;
  cfg.window = 3;
  cfg.epoch_size = 10;
  auto model = train(t, count_table(t), cfg);
  const BehaviorDb before = model.db;
  // Replay only the epochs training consumed.
  auto seen = t.slice(0, model.epochs_trained * cfg.epoch_size);
  auto report = detect(model, seen);
  CHECK(report.total_mismatches == 0);
  CHECK_FALSE(report.trace_anomalous);
  CHECK(model.db == before);
}

TEST_CASE("partition: trailing epoch kept only when it holds a full window") {
  Config cfg;
  cfg.window = 10;
  cfg.epoch_size = 100;
  CHECK(epoch_partition(100 + 9, cfg).size() == 1);
  CHECK(epoch_partition(100 + 10, cfg).size() == 2);
  CHECK(epoch_partition(0, cfg).empty());
  CHECK(epoch_partition(5, cfg).empty());

  auto model = tiny_model();
  auto report = detect_slots(model, std::vector<Slot>(4 + 1, 0));
  CHECK(report.verdicts.size() == 1);
  report = detect_slots(model, std::vector<Slot>(4 + 2, 0));
  REQUIRE(report.verdicts.size() == 2);
  CHECK(report.verdicts[1].threshold_used == doctest::Approx(0.2));
}

TEST_CASE("bags ignore order inside a window but windows do not") {
  auto model = tiny_model();
  model.config.window = 4;
  model.config.epoch_size = 8;
  model.db = BehaviorDb(3);
  std::vector<Slot> epoch{0, 0, 1, 1, 2, 2, 0, 1};
  for_each_bag(epoch, 4, 3, [&](const Bosc& bag) { model.db.insert(bag); });

  // Swap the calls at positions 3 and 4. Window 1 (positions 1..4) holds both
  // and keeps its bag; window 0 holds only position 3 and changes.
  auto swapped = epoch;
  std::swap(swapped[3], swapped[4]);
  CHECK(bag_of(std::span<const Slot>(swapped).subspan(1, 4), 3) ==
        bag_of(std::span<const Slot>(epoch).subspan(1, 4), 3));
  CHECK(bag_of(std::span<const Slot>(swapped).subspan(0, 4), 3) !=
        bag_of(std::span<const Slot>(epoch).subspan(0, 4), 3));
  CHECK(scan_epoch(model, epoch).mismatches == 0);
  CHECK(scan_epoch(model, swapped).mismatches > 0);
}

TEST_CASE("property: parallel detect == serial reference == brute-force oracle") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 30; ++round) {
    const std::size_t ns = 2 + rng() % 6;
    const std::size_t w = 2 + rng() % 5;
    const std::size_t S = w + rng() % 60;
    auto model = random_model(rng, ns, w, S);
    std::vector<Slot> slots(rng() % (S * 6));
    for (auto& s : slots) s = static_cast<Slot>(rng() % ns);

    auto parallel = detect_slots(model, slots);
    auto serial = detect_slots_serial(model, slots);
    CHECK(parallel == serial);
    auto expected = oracle_verdicts(model, slots);
    REQUIRE(parallel.verdicts.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(parallel.verdicts[i].windows_scanned == expected[i].windows_scanned);
      CHECK(parallel.verdicts[i].mismatches == expected[i].mismatches);
      CHECK(parallel.verdicts[i].anomalous == expected[i].anomalous);
      CHECK(parallel.verdicts[i].mismatches <= parallel.verdicts[i].windows_scanned);
    }
    bool any = false;
    for (const auto& v : parallel.verdicts) any = any || v.anomalous;
    CHECK(parallel.trace_anomalous == any);

    // Monotone: more known bags never means more mismatches.
    auto grown = model;
    for_each_bag(std::span<const Slot>(slots).subspan(0, std::min(slots.size(), S)), w, ns,
                 [&](const Bosc& bag) { grown.db.insert(bag); });
    auto after = detect_slots(grown, slots);
    for (std::size_t i = 0; i < after.verdicts.size(); ++i) {
      CHECK(after.verdicts[i].mismatches <= parallel.verdicts[i].mismatches);
    }
  }
}

TEST_CASE("unknown names resolve to OTHER at detection time") {
  auto model = tiny_model();
  auto slots = model.index.resolve_trace(RawTrace::from_names({"a", "ptrace", "b", "ptrace"}));
  CHECK(slots == std::vector<Slot>{0, 2, 1, 2});
  CHECK(scan_epoch(model, slots).mismatches == 3);
}

TEST_CASE("report rows") {
  auto model = tiny_model();
  auto report = detect(model, RawTrace::from_names({"a", "a", "b", "b", "a", "b", "a", "b"}));
  std::ostringstream out;
  write_report(out, report);
  CHECK(out.str() ==
        "# epoch_index windows mismatches threshold anomalous\n"
        "0 3 2 0.4 1\n"
        "1 3 0 0.4 0\n"
        "# summary epochs=2 anomalous_epochs=1 windows=6 mismatches=2 trace_anomalous=1\n");
  CHECK(detect(model, RawTrace{}).verdicts.empty());
}

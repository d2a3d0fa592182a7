#pragma once

// Bags of system calls over sliding windows, and the normal-behavior
// frequency database they are counted into.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "boscids/catalog.hpp"

namespace boscids {

using Count = std::uint32_t;

/// Per-slot occurrence counts of one window. Length is n_s of the index the
/// window was resolved through; the counts sum to the window size.
struct Bosc {
  std::vector<Count> counts;

  Bosc() = default;
  explicit Bosc(std::size_t ns) : counts(ns, 0) {}
  explicit Bosc(std::vector<Count> c) : counts(std::move(c)) {}

  std::size_t size() const { return counts.size(); }
  std::uint64_t total() const;
  std::string to_string() const;  // "[0,1,0,2]"

  bool operator==(const Bosc&) const = default;
};

struct BoscHash {
  std::size_t operator()(const Bosc& bag) const noexcept;
};

struct Windows {
  std::vector<std::span<const Slot>> windows;
  std::string diagnostic;  // set when the epoch is shorter than the window
};

/// Number of stride-1 windows of size w that fit in `length` calls.
constexpr std::size_t window_count(std::size_t length, std::size_t w) {
  return (w == 0 || length < w) ? 0 : length - w + 1;
}

Windows epoch_windows(std::span<const Slot> epoch, std::size_t w);

/// Throws std::invalid_argument if a slot is >= ns.
Bosc bag_of(std::span<const Slot> window, std::size_t ns);

/// Calls fn(const Bosc&) once per window of `epoch`, in order. The bag is
/// maintained incrementally (one add, one remove per step); the reference
/// passed to fn is only valid for the duration of the call.
template <typename Fn>
void for_each_bag(std::span<const Slot> epoch, std::size_t w, std::size_t ns, Fn&& fn);

/// Frequency-change vector C_k: deltas indexed by the later database's
/// insertion order.
struct ChangeVector {
  std::vector<std::int64_t> deltas;

  std::size_t size() const { return deltas.size(); }
  std::int64_t sum() const;
  bool operator==(const ChangeVector&) const = default;
};

class BehaviorDb;

/// Immutable copy of a database's frequencies, plus a fingerprint of its
/// insertion order used to check that a later state descends from it.
class DbSnapshot {
 public:
  std::size_t size() const { return freqs_.size(); }
  std::uint64_t frequency_at(std::size_t i) const { return freqs_[i]; }

 private:
  friend class BehaviorDb;
  std::vector<std::uint64_t> freqs_;
  std::uint64_t fingerprint_ = 0;
};

class LineageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class BehaviorDb {
 public:
  explicit BehaviorDb(std::size_t ns = 0) : ns_(ns) {}
  BehaviorDb(const BehaviorDb& other);
  BehaviorDb& operator=(const BehaviorDb& other);
  BehaviorDb(BehaviorDb&&) noexcept = default;
  BehaviorDb& operator=(BehaviorDb&&) noexcept = default;

  std::size_t ns() const { return ns_; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  /// Returns the new frequency of `bag`.
  std::uint64_t insert(const Bosc& bag);
  /// Appends an entry with a given frequency; used when loading a model.
  /// Throws std::invalid_argument if the key exists or freq == 0.
  void append(const Bosc& bag, std::uint64_t frequency);

  bool contains(const Bosc& bag) const { return index_.find(bag) != index_.end(); }
  std::uint64_t frequency(const Bosc& bag) const;

  /// Entries in first-insertion order.
  const Bosc& key_at(std::size_t i) const { return *order_[i]; }
  std::uint64_t frequency_at(std::size_t i) const { return freqs_[i]; }
  std::uint64_t total_frequency() const;

  DbSnapshot snapshot() const;

  /// Throws LineageError if `before` is not a prefix state of this db.
  ChangeVector diff_since(const DbSnapshot& before) const;

  /// Same entries, frequencies and insertion order.
  bool operator==(const BehaviorDb& other) const;

 private:
  void check_shape(const Bosc& bag) const;
  void push_entry(const Bosc& bag, std::uint64_t frequency);

  std::size_t ns_;
  std::unordered_map<Bosc, std::uint32_t, BoscHash> index_;
  std::vector<const Bosc*> order_;  // points at index_ keys
  std::vector<std::uint64_t> freqs_;
  std::vector<std::uint64_t> prefix_fingerprint_;
};

inline ChangeVector db_diff(const DbSnapshot& before, const BehaviorDb& after) {
  return after.diff_since(before);
}

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_bag(std::span<const Slot> epoch, std::size_t w, std::size_t ns, Fn&& fn) {
  if (w == 0 || epoch.size() < w) return;
  Bosc bag(ns);
  for (std::size_t i = 0; i < w; ++i) {
    if (epoch[i] >= ns) throw std::invalid_argument("slot out of range for n_s");
    ++bag.counts[epoch[i]];
  }
  fn(static_cast<const Bosc&>(bag));
  for (std::size_t i = w; i < epoch.size(); ++i) {
    if (epoch[i] >= ns) throw std::invalid_argument("slot out of range for n_s");
    --bag.counts[epoch[i - w]];
    ++bag.counts[epoch[i]];
    fn(static_cast<const Bosc&>(bag));
  }
}

}  // namespace boscids

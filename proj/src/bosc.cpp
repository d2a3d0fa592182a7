#include "boscids/bosc.hpp"

#include <numeric>
#include <stdexcept>

namespace boscids {
namespace {

constexpr std::uint64_t kFingerprintSeed = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

std::uint64_t Bosc::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::string Bosc::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(counts[i]);
  }
  out += ']';
  return out;
}

std::size_t BoscHash::operator()(const Bosc& bag) const noexcept {
  std::uint64_t h = bag.counts.size();
  for (Count c : bag.counts) h = (h ^ c) * 0x100000001b3ULL + 0x9e37;
  return static_cast<std::size_t>(mix(h));
}

Windows epoch_windows(std::span<const Slot> epoch, std::size_t w) {
  Windows out;
  if (w == 0 || epoch.size() < w) {
    out.diagnostic = "epoch of " + std::to_string(epoch.size()) +
                     " calls is shorter than window " + std::to_string(w);
    return out;
  }
  out.windows.reserve(window_count(epoch.size(), w));
  for (std::size_t i = 0; i + w <= epoch.size(); ++i) out.windows.push_back(epoch.subspan(i, w));
  return out;
}

Bosc bag_of(std::span<const Slot> window, std::size_t ns) {
  Bosc bag(ns);
  for (Slot s : window) {
    if (s >= ns) throw std::invalid_argument("slot " + std::to_string(s) + " out of range for n_s");
    ++bag.counts[s];
  }
  return bag;
}

std::int64_t ChangeVector::sum() const {
  return std::accumulate(deltas.begin(), deltas.end(), std::int64_t{0});
}

BehaviorDb::BehaviorDb(const BehaviorDb& other)
    : ns_(other.ns_),
      index_(other.index_),
      freqs_(other.freqs_),
      prefix_fingerprint_(other.prefix_fingerprint_) {
  order_.resize(index_.size());
  for (const auto& [key, pos] : index_) order_[pos] = &key;
}

BehaviorDb& BehaviorDb::operator=(const BehaviorDb& other) {
  if (this != &other) {
    BehaviorDb copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void BehaviorDb::check_shape(const Bosc& bag) const {
  if (bag.size() != ns_) {
    throw std::invalid_argument("bag length " + std::to_string(bag.size()) +
                                " does not match database n_s " + std::to_string(ns_));
  }
}

void BehaviorDb::push_entry(const Bosc& bag, std::uint64_t frequency) {
  auto [it, inserted] = index_.emplace(bag, static_cast<std::uint32_t>(order_.size()));
  (void)inserted;
  order_.push_back(&it->first);
  freqs_.push_back(frequency);
  const std::uint64_t prev = prefix_fingerprint_.empty() ? kFingerprintSeed : prefix_fingerprint_.back();
  prefix_fingerprint_.push_back(mix(prev ^ BoscHash{}(bag)));
}

std::uint64_t BehaviorDb::insert(const Bosc& bag) {
  auto it = index_.find(bag);
  if (it != index_.end()) return ++freqs_[it->second];
  check_shape(bag);
  push_entry(bag, 1);
  return 1;
}

void BehaviorDb::append(const Bosc& bag, std::uint64_t frequency) {
  check_shape(bag);
  if (frequency == 0) throw std::invalid_argument("database frequency must be >= 1");
  if (contains(bag)) throw std::invalid_argument("duplicate database key " + bag.to_string());
  push_entry(bag, frequency);
}

std::uint64_t BehaviorDb::frequency(const Bosc& bag) const {
  auto it = index_.find(bag);
  return it == index_.end() ? 0 : freqs_[it->second];
}

std::uint64_t BehaviorDb::total_frequency() const {
  return std::accumulate(freqs_.begin(), freqs_.end(), std::uint64_t{0});
}

DbSnapshot BehaviorDb::snapshot() const {
  DbSnapshot snap;
  snap.freqs_ = freqs_;
  snap.fingerprint_ = prefix_fingerprint_.empty() ? kFingerprintSeed : prefix_fingerprint_.back();
  return snap;
}

ChangeVector BehaviorDb::diff_since(const DbSnapshot& before) const {
  const std::size_t n_before = before.size();
  if (n_before > size() ||
      (n_before > 0 && prefix_fingerprint_[n_before - 1] != before.fingerprint_)) {
    throw LineageError("snapshot is not a prefix of this database's insertion order");
  }
  ChangeVector change;
  change.deltas.resize(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const std::uint64_t old = i < n_before ? before.freqs_[i] : 0;
    change.deltas[i] = static_cast<std::int64_t>(freqs_[i]) - static_cast<std::int64_t>(old);
  }
  return change;
}

bool BehaviorDb::operator==(const BehaviorDb& other) const {
  if (ns_ != other.ns_ || freqs_ != other.freqs_) return false;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (*order_[i] != *other.order_[i]) return false;
  }
  return true;
}

}  // namespace boscids

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "boscids/ingest.hpp"

namespace boscids {

using Slot = std::uint32_t;

inline constexpr std::string_view kOtherName = "other";

// Syscall -> BoSC slot lookup. Frequent names get their own slot in
// count-table order; everything else, including names never seen during
// training, lands in the trailing OTHER slot. Immutable once built.
class SyscallIndex {
 public:
  SyscallIndex() = default;

  // t_o is the number of distinct names in `counts`; names with
  // count >= t_o are retained.
  static SyscallIndex build(const CountTable& counts);

  // Rehydrates an index from its slot list (model loading). Throws
  // std::invalid_argument on duplicate or reserved names.
  static SyscallIndex from_slots(std::vector<std::string> slots,
                                 std::optional<std::uint64_t> t_o = std::nullopt);

  Slot resolve(std::string_view name) const;
  std::vector<Slot> resolve_trace(const RawTrace& trace) const;

  std::span<const std::string> slots() const { return slots_; }
  std::size_t retained() const { return slots_.size(); }
  std::size_t ns() const { return slots_.size() + 1; }
  Slot other_slot() const { return static_cast<Slot>(slots_.size()); }
  // Absent when the index was rehydrated from a model file.
  std::optional<std::uint64_t> t_o() const { return t_o_; }

  bool operator==(const SyscallIndex& o) const { return slots_ == o.slots_; }

 private:
  std::vector<std::string> slots_;
  std::unordered_map<std::string, Slot> by_name_;
  std::optional<std::uint64_t> t_o_;
};

}  // namespace boscids

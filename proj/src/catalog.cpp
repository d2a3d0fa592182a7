#include "boscids/catalog.hpp"

#include <algorithm>
#include <stdexcept>

namespace boscids {

SyscallIndex SyscallIndex::build(const CountTable& counts) {
  CountTable ordered = counts;
  std::sort(ordered.begin(), ordered.end(), [](const CountEntry& a, const CountEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.name < b.name;
  });
  const std::uint64_t t_o = ordered.size();
  std::vector<std::string> slots;
  for (const auto& e : ordered) {
    if (e.count >= t_o && e.name != kOtherName) slots.push_back(e.name);
  }
  return from_slots(std::move(slots), t_o);
}

SyscallIndex SyscallIndex::from_slots(std::vector<std::string> slots,
                                      std::optional<std::uint64_t> t_o) {
  SyscallIndex index;
  index.by_name_.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] == kOtherName || !is_syscall_name(slots[i])) {
      throw std::invalid_argument("invalid slot name: '" + slots[i] + "'");
    }
    if (!index.by_name_.emplace(slots[i], static_cast<Slot>(i)).second) {
      throw std::invalid_argument("duplicate slot name: '" + slots[i] + "'");
    }
  }
  index.slots_ = std::move(slots);
  index.t_o_ = t_o;
  return index;
}

Slot SyscallIndex::resolve(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? other_slot() : it->second;
}

std::vector<Slot> SyscallIndex::resolve_trace(const RawTrace& trace) const {
  std::vector<Slot> per_symbol;
  per_symbol.reserve(trace.symbols().size());
  for (const auto& name : trace.symbols()) per_symbol.push_back(resolve(name));
  std::vector<Slot> out;
  out.reserve(trace.size());
  for (auto id : trace.ids()) out.push_back(per_symbol[id]);
  return out;
}

}  // namespace boscids

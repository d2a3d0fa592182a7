#pragma once

// Tracer-output ingestion: strace text -> ordered syscall names + count table.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace boscids {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LineKind { call, unfinished, resumed, signal, exit, garbage };

std::string_view to_string(LineKind kind);

struct RawTraceLine {
  LineKind kind = LineKind::garbage;
  std::optional<std::uint64_t> pid;
  std::optional<std::string> name;

  bool operator==(const RawTraceLine&) const = default;
};

/// True when `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
bool is_syscall_name(std::string_view name);

/// Classifies one line of strace output. Never throws; anything that does not
/// fit the line grammar comes back as LineKind::garbage.
RawTraceLine parse_line(std::string_view line);

/// Ordered syscall stream. Names are interned: `calls` holds ids into
/// `symbols`, with symbols numbered in first-occurrence order.
class RawTrace {
 public:
  RawTrace() = default;
  static RawTrace from_names(const std::vector<std::string>& names);

  void push_back(std::string_view name);

  std::size_t size() const { return calls_.size(); }
  bool empty() const { return calls_.empty(); }
  const std::string& name_at(std::size_t i) const { return symbols_[calls_[i]]; }
  const std::vector<std::uint32_t>& ids() const { return calls_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::vector<std::string> names() const;

  /// Contiguous sub-trace [first, first+count).
  RawTrace slice(std::size_t first, std::size_t count) const;

  std::string source_meta;
  std::size_t garbage_lines = 0;

 private:
  std::vector<std::string> symbols_;
  std::vector<std::uint32_t> calls_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

/// Keeps call and unfinished lines; everything else contributes nothing.
/// Throws IoError if the stream goes bad before EOF.
RawTrace ingest(std::istream& in, std::string_view source_name = "<stream>");
RawTrace ingest_lines(const std::vector<std::string>& lines);

struct CountEntry {
  std::string name;
  std::uint64_t count = 0;

  bool operator==(const CountEntry&) const = default;
};

/// Count descending, ties by name ascending.
using CountTable = std::vector<CountEntry>;

CountTable count_table(const RawTrace& trace);

// Trace file: one name per line. Count file: name<TAB>count per line.
void write_trace(std::ostream& out, const RawTrace& trace);
RawTrace read_trace(std::istream& in, std::string_view source_name = "<stream>");
void write_counts(std::ostream& out, const CountTable& counts);
CountTable read_counts(std::istream& in);

RawTrace read_trace_file(const std::string& path);
CountTable read_counts_file(const std::string& path);

}  // namespace boscids

#include "boscids/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace boscids {
namespace {

constexpr std::string_view kUnfinished = "<unfinished ...>";
constexpr std::string_view kResumedOpen = "<... ";
constexpr std::string_view kResumedClose = " resumed>";

bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_blank(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_blank(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void skip_blanks(std::string_view& s) {
  while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
}

std::optional<std::uint64_t> parse_uint(std::string_view digits) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

// Consumes `[pid N]` or a bare leading `N ` (strace -f -o file). Returns
// false on a malformed bracket prefix.
bool take_pid(std::string_view& s, std::optional<std::uint64_t>& pid) {
  if (s.starts_with("[pid")) {
    std::string_view rest = s.substr(4);
    skip_blanks(rest);
    std::size_t n = 0;
    while (n < rest.size() && is_digit(rest[n])) ++n;
    if (n == 0 || n >= rest.size() || rest[n] != ']') return false;
    pid = parse_uint(rest.substr(0, n));
    if (!pid) return false;
    s = rest.substr(n + 1);
    skip_blanks(s);
    return true;
  }
  std::size_t n = 0;
  while (n < s.size() && is_digit(s[n])) ++n;
  if (n > 0 && n < s.size() && is_blank(s[n])) {
    pid = parse_uint(s.substr(0, n));
    s.remove_prefix(n);
    skip_blanks(s);
  }
  return true;
}

// Drops one -t/-tt/-ttt/-r style timestamp token if present.
void take_timestamp(std::string_view& s) {
  std::size_t n = 0;
  bool digit = false;
  while (n < s.size() && (is_digit(s[n]) || s[n] == ':' || s[n] == '.')) {
    digit = digit || is_digit(s[n]);
    ++n;
  }
  if (digit && n < s.size() && is_blank(s[n])) {
    s.remove_prefix(n);
    skip_blanks(s);
  }
}

// True if some '=' is preceded, blanks aside, by ')'.
bool has_result(std::string_view s) {
  for (auto eq = s.find('='); eq != std::string_view::npos; eq = s.find('=', eq + 1)) {
    std::size_t i = eq;
    while (i > 0 && is_blank(s[i - 1])) --i;
    if (i > 0 && s[i - 1] == ')') return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(LineKind kind) {
  switch (kind) {
    case LineKind::call: return "call";
    case LineKind::unfinished: return "unfinished";
    case LineKind::resumed: return "resumed";
    case LineKind::signal: return "signal";
    case LineKind::exit: return "exit";
    case LineKind::garbage: return "garbage";
  }
  return "garbage";
}

bool is_syscall_name(std::string_view name) {
  if (name.empty() || !is_ident_start(name.front())) return false;
  return std::all_of(name.begin() + 1, name.end(), is_ident_char);
}

RawTraceLine parse_line(std::string_view line) {
  RawTraceLine out;
  std::string_view s = trim(line);

  std::optional<std::uint64_t> pid;
  if (!take_pid(s, pid)) return out;
  take_timestamp(s);
  if (s.empty()) return out;

  if (s.starts_with("--- ")) {
    if (s.size() >= 7 && s.ends_with(" ---")) {
      out.kind = LineKind::signal;
      out.pid = pid;
    }
    return out;
  }
  if (s.starts_with("+++ ")) {
    if (s.size() >= 7 && s.ends_with(" +++")) {
      out.kind = LineKind::exit;
      out.pid = pid;
    }
    return out;
  }
  if (s.starts_with(kResumedOpen)) {
    std::string_view rest = s.substr(kResumedOpen.size());
    auto close = rest.find(kResumedClose);
    if (close == std::string_view::npos) return out;
    std::string_view name = rest.substr(0, close);
    if (!is_syscall_name(name)) return out;
    out.kind = LineKind::resumed;
    out.pid = pid;
    out.name = std::string(name);
    return out;
  }

  std::size_t n = 0;
  while (n < s.size() && is_ident_char(s[n])) ++n;
  if (n == 0 || n >= s.size() || s[n] != '(' || !is_ident_start(s.front())) return out;
  std::string_view name = s.substr(0, n);

  if (s.ends_with(kUnfinished)) {
    out.kind = LineKind::unfinished;
  } else {
    // A completed call carries `) = result`; a missing one means the line was
    // cut off.
    if (!has_result(s)) return out;
    out.kind = LineKind::call;
  }
  out.pid = pid;
  out.name = std::string(name);
  return out;
}

RawTrace RawTrace::from_names(const std::vector<std::string>& names) {
  RawTrace t;
  for (const auto& n : names) t.push_back(n);
  return t;
}

void RawTrace::push_back(std::string_view name) {
  auto [it, inserted] =
      lookup_.try_emplace(std::string(name), static_cast<std::uint32_t>(symbols_.size()));
  if (inserted) symbols_.emplace_back(name);
  calls_.push_back(it->second);
}

std::vector<std::string> RawTrace::names() const {
  std::vector<std::string> out;
  out.reserve(calls_.size());
  for (auto id : calls_) out.push_back(symbols_[id]);
  return out;
}

RawTrace RawTrace::slice(std::size_t first, std::size_t count) const {
  RawTrace t;
  const std::size_t last = std::min(calls_.size(), first + count);
  for (std::size_t i = first; i < last; ++i) t.push_back(symbols_[calls_[i]]);
  return t;
}

namespace {

void summarize(RawTrace& trace, std::string_view source, std::size_t lines) {
  trace.source_meta = "source=" + std::string(source) + " lines=" + std::to_string(lines) +
                      " calls=" + std::to_string(trace.size()) +
                      " garbage=" + std::to_string(trace.garbage_lines);
}

void absorb(RawTrace& trace, std::string_view line) {
  RawTraceLine parsed = parse_line(line);
  switch (parsed.kind) {
    case LineKind::call:
    case LineKind::unfinished:
      trace.push_back(*parsed.name);
      break;
    case LineKind::garbage:
      // Blank lines are not tracer output at all.
      if (!trim(line).empty()) ++trace.garbage_lines;
      break;
    default:
      break;
  }
}

}  // namespace

RawTrace ingest(std::istream& in, std::string_view source_name) {
  RawTrace trace;
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    absorb(trace, line);
  }
  if (in.bad()) throw IoError("read failure on " + std::string(source_name));
  summarize(trace, source_name, lines);
  return trace;
}

RawTrace ingest_lines(const std::vector<std::string>& lines) {
  RawTrace trace;
  for (const auto& l : lines) absorb(trace, l);
  summarize(trace, "<lines>", lines.size());
  return trace;
}

CountTable count_table(const RawTrace& trace) {
  std::vector<std::uint64_t> per_symbol(trace.symbols().size(), 0);
  for (auto id : trace.ids()) ++per_symbol[id];
  CountTable table;
  table.reserve(per_symbol.size());
  for (std::size_t i = 0; i < per_symbol.size(); ++i) {
    if (per_symbol[i] > 0) table.push_back({trace.symbols()[i], per_symbol[i]});
  }
  std::sort(table.begin(), table.end(), [](const CountEntry& a, const CountEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.name < b.name;
  });
  return table;
}

void write_trace(std::ostream& out, const RawTrace& trace) {
  const auto& symbols = trace.symbols();
  for (auto id : trace.ids()) {
    out << symbols[id] << '\n';
  }
}

RawTrace read_trace(std::istream& in, std::string_view source_name) {
  RawTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view name = trim(line);
    if (name.empty()) continue;
    if (!is_syscall_name(name)) {
      throw IoError(std::string(source_name) + ":" + std::to_string(lineno) +
                    ": not a syscall name: '" + std::string(name) + "'");
    }
    trace.push_back(name);
  }
  if (in.bad()) throw IoError("read failure on " + std::string(source_name));
  trace.source_meta = "source=" + std::string(source_name) + " calls=" + std::to_string(trace.size());
  return trace;
}

void write_counts(std::ostream& out, const CountTable& counts) {
  for (const auto& e : counts) out << e.name << '\t' << e.count << '\n';
}

CountTable read_counts(std::istream& in) {
  CountTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    auto tab = s.find('\t');
    std::optional<std::uint64_t> count;
    if (tab != std::string_view::npos) count = parse_uint(s.substr(tab + 1));
    if (!count || *count == 0 || !is_syscall_name(s.substr(0, tab))) {
      throw IoError("count file line " + std::to_string(lineno) + ": expected name<TAB>count");
    }
    table.push_back({std::string(s.substr(0, tab)), *count});
  }
  if (in.bad()) throw IoError("read failure on count file");
  return table;
}

RawTrace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  return read_trace(in, path);
}

CountTable read_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open count file: " + path);
  return read_counts(in);
}

}  // namespace boscids

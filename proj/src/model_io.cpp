#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "boscids/trainer.hpp"

namespace boscids {
namespace {

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for multi-GB models.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

// Shortest round-trip form: a reloaded model must see the same cosines, or
// its converged flag could flip.
std::string format_cos(double value) { return format_decimal(value); }

class LineReader {
 public:
  explicit LineReader(std::string_view body) : rest_(body) {}

  bool next(std::string_view& line) {
    if (rest_.empty()) return false;
    auto nl = rest_.find('\n');
    if (nl == std::string_view::npos) {
      line = rest_;
      rest_ = {};
    } else {
      line = rest_.substr(0, nl);
      rest_.remove_prefix(nl + 1);
    }
    ++lineno_;
    return true;
  }

  std::string_view expect(const std::string& section) {
    std::string_view line;
    if (!next(line)) throw ModelFormatError(section, "unexpected end of file");
    return line;
  }

  std::size_t lineno() const { return lineno_; }

 private:
  std::string_view rest_;
  std::size_t lineno_ = 0;
};

template <typename T>
T parse_field(const std::string& section, std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ModelFormatError(section, "bad " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

// Splits "a=1 b=2" and checks the keys appear in order.
std::vector<std::string_view> keyed_values(const std::string& section, std::string_view line,
                                           std::initializer_list<std::string_view> keys) {
  std::vector<std::string_view> values;
  for (auto key : keys) {
    while (line.starts_with(' ')) line.remove_prefix(1);
    if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != '=') {
      throw ModelFormatError(section, "expected '" + std::string(key) + "='");
    }
    line.remove_prefix(key.size() + 1);
    auto sp = line.find(' ');
    values.push_back(line.substr(0, sp));
    line = sp == std::string_view::npos ? std::string_view{} : line.substr(sp);
  }
  if (!line.empty()) throw ModelFormatError(section, "trailing text '" + std::string(line) + "'");
  return values;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  std::string out;
  const Config& c = model.config;
  out += kModelMagic;
  out += '\n';
  out += "w=" + std::to_string(c.window) + " S=" + std::to_string(c.epoch_size) +
         " Tt=" + format_decimal(c.train_threshold) + " TdFrac=" + format_decimal(c.detect_fraction) + '\n';
  out += "ns=" + std::to_string(model.index.ns()) + " retained=" + std::to_string(model.index.retained()) + '\n';
  for (const auto& name : model.index.slots()) {
    out += name;
    out += '\n';
  }
  out += "@other\n";
  out += "entries=" + std::to_string(model.db.size()) + '\n';
  for (std::size_t i = 0; i < model.db.size(); ++i) {
    const Bosc& key = model.db.key_at(i);
    for (std::size_t j = 0; j < key.size(); ++j) {
      if (j) out += ' ';
      out += std::to_string(key.counts[j]);
    }
    out += ':';
    out += std::to_string(model.db.frequency_at(i));
    out += '\n';
  }
  out += "history=" + std::to_string(model.history.size()) + '\n';
  for (const auto& rec : model.history) {
    out += std::to_string(rec.epoch) + ' ' + format_cos(rec.cos_theta) + '\n';
  }
  char crc[32];
  std::snprintf(crc, sizeof crc, "crc32=%08x\n", crc32_of(out));
  out += crc;
  return out;
}

void save_model(const TrainedModel& model, std::ostream& out) {
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed to write model");
}

void save_model_file(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  save_model(model, out);
}

TrainedModel parse_model(std::string_view bytes) {
  if (!bytes.starts_with(kModelMagic) || bytes.size() == kModelMagic.size() ||
      bytes[kModelMagic.size()] != '\n') {
    throw ModelFormatError("version", "missing or unsupported header (want '" +
                                          std::string(kModelMagic) + "')");
  }

  // Trailer: last line must be crc32=<8 hex>.
  std::string_view trimmed = bytes;
  if (!trimmed.ends_with('\n')) throw ModelFormatError("crc32", "file is truncated");
  trimmed.remove_suffix(1);
  const auto last_nl = trimmed.rfind('\n');
  const std::string_view trailer = trimmed.substr(last_nl + 1);
  if (!trailer.starts_with("crc32=")) throw ModelFormatError("crc32", "missing checksum trailer; file is truncated");
  const std::string_view body = bytes.substr(0, last_nl + 1);
  std::uint32_t stored_hex = 0;
  {
    auto hex = trailer.substr(6);
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), stored_hex, 16);
    if (hex.size() != 8 || ec != std::errc{} || ptr != hex.data() + hex.size()) {
      throw ModelFormatError("crc32", "malformed checksum '" + std::string(hex) + "'");
    }
  }
  if (crc32_of(body) != stored_hex) throw ModelFormatError("crc32", "checksum mismatch");

  LineReader lines(body);
  lines.expect("version");

  TrainedModel model;
  {
    const std::string section = "config";
    auto v = keyed_values(section, lines.expect(section), {"w", "S", "Tt", "TdFrac"});
    model.config.window = parse_field<std::size_t>(section, v[0], "w");
    model.config.epoch_size = parse_field<std::size_t>(section, v[1], "S");
    model.config.train_threshold = parse_field<double>(section, v[2], "Tt");
    model.config.detect_fraction = parse_field<double>(section, v[3], "TdFrac");
    try {
      model.config.validate();
    } catch (const ConfigError& e) {
      throw ModelFormatError(section, e.what());
    }
  }

  std::size_t ns = 0;
  {
    const std::string section = "index";
    auto v = keyed_values(section, lines.expect(section), {"ns", "retained"});
    ns = parse_field<std::size_t>(section, v[0], "ns");
    const auto retained = parse_field<std::size_t>(section, v[1], "retained");
    if (ns != retained + 1) throw ModelFormatError(section, "ns must equal retained + 1");
    std::vector<std::string> slots;
    slots.reserve(retained);
    for (std::size_t i = 0; i < retained; ++i) slots.emplace_back(lines.expect(section));
    if (lines.expect(section) != "@other") throw ModelFormatError(section, "missing '@other' sentinel");
    try {
      model.index = SyscallIndex::from_slots(std::move(slots));
    } catch (const std::invalid_argument& e) {
      throw ModelFormatError(section, e.what());
    }
  }

  {
    const std::string section = "entries";
    auto v = keyed_values(section, lines.expect(section), {"entries"});
    const auto n = parse_field<std::size_t>(section, v[0], "entry count");
    model.db = BehaviorDb(ns);
    Bosc bag(ns);
    for (std::size_t i = 0; i < n; ++i) {
      std::string_view line = lines.expect(section);
      const auto colon = line.rfind(':');
      if (colon == std::string_view::npos) throw ModelFormatError(section, "entry without ':'");
      const auto freq = parse_field<std::uint64_t>(section, line.substr(colon + 1), "frequency");
      std::string_view counts = line.substr(0, colon);
      std::size_t j = 0;
      std::uint64_t sum = 0;
      while (!counts.empty()) {
        auto sp = counts.find(' ');
        if (j >= ns) throw ModelFormatError(section, "entry has more than ns counts");
        bag.counts[j++] = parse_field<Count>(section, counts.substr(0, sp), "count");
        sum += bag.counts[j - 1];
        counts = sp == std::string_view::npos ? std::string_view{} : counts.substr(sp + 1);
      }
      if (j != ns) throw ModelFormatError(section, "entry has fewer than ns counts");
      if (sum != model.config.window) throw ModelFormatError(section, "entry counts do not sum to w");
      try {
        model.db.append(bag, freq);
      } catch (const std::invalid_argument& e) {
        throw ModelFormatError(section, e.what());
      }
    }
  }

  {
    const std::string section = "history";
    auto v = keyed_values(section, lines.expect(section), {"history"});
    const auto n = parse_field<std::size_t>(section, v[0], "history length");
    for (std::size_t i = 0; i < n; ++i) {
      std::string_view line = lines.expect(section);
      const auto sp = line.find(' ');
      if (sp == std::string_view::npos) throw ModelFormatError(section, "expected 'k cos'");
      SimilarityRecord rec;
      rec.epoch = parse_field<std::size_t>(section, line.substr(0, sp), "epoch");
      rec.cos_theta = parse_field<double>(section, line.substr(sp + 1), "cos");
      if (rec.epoch != i + 2) throw ModelFormatError(section, "epochs must run 2, 3, ...");
      model.history.push_back(rec);
    }
    std::string_view extra;
    if (lines.next(extra)) throw ModelFormatError(section, "unexpected trailing data");
  }

  model.epochs_trained = model.history.size() + 1;
  const std::size_t h = model.history.size();
  model.converged = h >= 2 && model.history[h - 1].cos_theta >= model.config.train_threshold &&
                    model.history[h - 2].cos_theta >= model.config.train_threshold;
  return model;
}

TrainedModel load_model(std::istream& in) {
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("read failure on model");
  return parse_model(bytes);
}

TrainedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace boscids

#include "boscids/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace boscids {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key) + ": not a valid number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void Config::validate() const {
  if (window == 0) throw ConfigError("window: must be a positive integer");
  if (epoch_size == 0) throw ConfigError("epoch-size: must be a positive integer");
  if (window > epoch_size) throw ConfigError("window: must not exceed epoch-size");
  if (!(train_threshold > 0.0 && train_threshold <= 1.0)) {
    throw ConfigError("train-threshold: must lie in (0, 1]");
  }
  if (!(detect_fraction > 0.0 && detect_fraction <= 1.0)) {
    throw ConfigError("detect-fraction: must lie in (0, 1]");
  }
}

bool apply_setting(Config& config, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "window") {
    config.window = parse_number<std::size_t>(key, value);
  } else if (key == "epoch-size") {
    config.epoch_size = parse_number<std::size_t>(key, value);
  } else if (key == "train-threshold") {
    config.train_threshold = parse_number<double>(key, value);
  } else if (key == "detect-fraction") {
    config.detect_fraction = parse_number<double>(key, value);
  } else {
    return false;
  }
  return true;
}

void apply_config_stream(Config& config, std::istream& in, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto eq = s.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key=value");
    std::string_view key = trim(s.substr(0, eq));
    try {
      if (!apply_setting(config, key, s.substr(eq + 1))) {
        throw ConfigError("unknown key '" + std::string(key) + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_config_file(Config& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  apply_config_stream(config, in, path);
}

std::string format_decimal(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace boscids

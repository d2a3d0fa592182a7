#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace boscids {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Config {
  std::size_t window = 10;
  std::size_t epoch_size = 5000;
  double train_threshold = 0.99;
  // T_d = detect_fraction * epoch length
  double detect_fraction = 0.10;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  double detect_threshold(std::size_t epoch_length) const {
    return detect_fraction * static_cast<double>(epoch_length);
  }

  bool operator==(const Config&) const = default;
};

// Applies one `key=value` setting; keys are the CLI flag names without the
// leading dashes (window, epoch-size, train-threshold, detect-fraction).
// Returns false for keys that are not Config fields.
bool apply_setting(Config& config, std::string_view key, std::string_view value);

// Reads `key=value` lines ('#' comments, blank lines ignored). Unknown keys
// are an error.
void apply_config_stream(Config& config, std::istream& in, std::string_view source);
void apply_config_file(Config& config, const std::string& path);

// Shortest decimal that round-trips.
std::string format_decimal(double value);

}  // namespace boscids

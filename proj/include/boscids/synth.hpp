#pragma once

// Deterministic synthetic syscall workloads with labeled injected epochs.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard (10000th output from the default seed is
// 9981545732273789042). Every draw is derived from raw 64-bit outputs in this
// file rather than through <random> distributions, whose algorithms are
// implementation-defined, so traces are byte-identical across platforms.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "boscids/config.hpp"
#include "boscids/evaluator.hpp"
#include "boscids/ingest.hpp"

namespace boscids {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Order-1 Markov source over syscall names.
struct SourceSpec {
  std::vector<std::string> alphabet;
  std::vector<std::vector<double>> transition;  // row-stochastic
  double zipf_s = 1.0;  // shapes the initial-state distribution
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on bad names or rows not summing to 1.
  void validate() const;
};

/// Knobs for building a program-like transition matrix: each state has a few
/// Zipf-biased successors with geometrically decaying weights, plus a small
/// uniform leak that keeps the chain irreducible.
struct SourceShape {
  std::size_t alphabet_size = 64;
  double zipf_s = 0.5;
  std::size_t branching = 2;
  double decay = 0.02;   // weight ratio between successive successors
  double leak = 0.0001;  // total probability spread uniformly over all states
  std::uint64_t structure_seed = 1;
};

SourceSpec make_source(const SourceShape& shape, std::uint64_t walk_seed);

/// Realistic Linux syscall names, most common first.
const std::vector<std::string>& syscall_name_pool();

RawTrace gen_normal(const SourceSpec& spec, std::size_t total_calls);

enum class InjectionMode { novel_names, shuffled_transitions, burst_repeat };

std::string_view to_string(InjectionMode mode);
std::optional<InjectionMode> parse_injection_mode(std::string_view text);

struct InjectionSpec {
  std::vector<std::size_t> target_epochs;
  InjectionMode mode = InjectionMode::burst_repeat;
  double intensity = 0.5;  // fraction of the epoch's calls replaced, (0, 1]
};

struct LabeledTraceData {
  RawTrace trace;
  std::vector<Label> labels;  // one per epoch of epoch_partition(total, config)
};

/// gen_normal output with the target epochs overwritten. `config` fixes the
/// epoch partition (epoch_size and window). Throws std::invalid_argument on
/// bad intensity or out-of-range target epochs.
LabeledTraceData gen_anomalous(const SourceSpec& spec, std::size_t total_calls,
                               const InjectionSpec& injection, const Config& config);

}  // namespace boscids

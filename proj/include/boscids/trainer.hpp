#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "boscids/bosc.hpp"
#include "boscids/catalog.hpp"
#include "boscids/config.hpp"
#include "boscids/ingest.hpp"

namespace boscids {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelFormatError : public std::runtime_error {
 public:
  ModelFormatError(std::string section, const std::string& what)
      : std::runtime_error("model file [" + section + "]: " + what), section_(std::move(section)) {}
  const std::string& section() const { return section_; }

 private:
  std::string section_;
};

/// Cosine of the angle between two change vectors. The shorter vector is
/// zero-extended to the longer one's length. Both norms zero gives 1, exactly
/// one norm zero gives 0.
double cosine_similarity(const ChangeVector& a, const ChangeVector& b);

struct SimilarityRecord {
  std::size_t epoch = 0;  // k >= 2
  double cos_theta = 0.0;

  bool operator==(const SimilarityRecord&) const = default;
};

struct TrainedModel {
  SyscallIndex index;
  BehaviorDb db;
  Config config;
  std::vector<SimilarityRecord> history;  // one record per epoch k >= 2
  std::size_t epochs_trained = 0;
  bool converged = false;
};

/// Learns the normal-behavior database epoch by epoch until cos(theta_k) and
/// cos(theta_{k-1}) are both >= train_threshold, or the full epochs run out
/// (converged = false). A trailing partial epoch is ignored.
///
/// Throws TrainingError when the stream holds fewer than two full epochs and
/// ConfigError for an invalid config.
TrainedModel train(const RawTrace& trace, const CountTable& counts, const Config& config);
TrainedModel train_slots(std::span<const Slot> slots, SyscallIndex index, const Config& config);

// Model file: versioned, line-oriented, crc32 trailer. See README for layout.
inline constexpr std::string_view kModelMagic = "boscids-model v1";

void save_model(const TrainedModel& model, std::ostream& out);
void save_model_file(const TrainedModel& model, const std::string& path);
std::string serialize_model(const TrainedModel& model);

/// Throws ModelFormatError naming the offending section.
TrainedModel load_model(std::istream& in);
TrainedModel load_model_file(const std::string& path);
TrainedModel parse_model(std::string_view bytes);

}  // namespace boscids

#include "boscids/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace boscids {

double cosine_similarity(const ChangeVector& a, const ChangeVector& b) {
  const std::size_t n = std::max(a.size(), b.size());
  long double dot = 0, norm_a = 0, norm_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double x = i < a.size() ? static_cast<long double>(a.deltas[i]) : 0.0L;
    const long double y = i < b.size() ? static_cast<long double>(b.deltas[i]) : 0.0L;
    dot += x * y;
    norm_a += x * x;
    norm_b += y * y;
  }
  if (norm_a == 0 && norm_b == 0) return 1.0;
  if (norm_a == 0 || norm_b == 0) return 0.0;
  const long double c = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  return static_cast<double>(std::clamp(c, -1.0L, 1.0L));
}

TrainedModel train(const RawTrace& trace, const CountTable& counts, const Config& config) {
  SyscallIndex index = SyscallIndex::build(counts);
  const std::vector<Slot> slots = index.resolve_trace(trace);
  return train_slots(slots, std::move(index), config);
}

TrainedModel train_slots(std::span<const Slot> slots, SyscallIndex index, const Config& config) {
  config.validate();
  const std::size_t S = config.epoch_size;
  const std::size_t full_epochs = slots.size() / S;
  if (full_epochs < 2) {
    throw TrainingError("training needs at least 2 full epochs of " + std::to_string(S) +
                        " calls; got " + std::to_string(slots.size()) + " calls");
  }

  TrainedModel model;
  model.config = config;
  const std::size_t ns = index.ns();
  model.index = std::move(index);
  model.db = BehaviorDb(ns);

  ChangeVector previous;
  for (std::size_t k = 1; k <= full_epochs; ++k) {
    const DbSnapshot before = model.db.snapshot();
    for_each_bag(slots.subspan((k - 1) * S, S), config.window, ns,
                 [&](const Bosc& bag) { model.db.insert(bag); });
    ChangeVector change = model.db.diff_since(before);
    model.epochs_trained = k;

    if (k > 1) {
      model.history.push_back({k, cosine_similarity(change, previous)});
      const std::size_t h = model.history.size();
      if (h >= 2 && model.history[h - 1].cos_theta >= config.train_threshold &&
          model.history[h - 2].cos_theta >= config.train_threshold) {
        model.converged = true;
        break;
      }
    }
    previous = std::move(change);
  }
  return model;
}

}  // namespace boscids

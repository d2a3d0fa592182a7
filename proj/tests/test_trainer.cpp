#include <cmath>
#include <random>
#include <sstream>

#include "boscids/trainer.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace boscids;

namespace {

ChangeVector cv(std::vector<std::int64_t> d) { return ChangeVector{std::move(d)}; }

RawTrace ab_trace(std::size_t pairs) {
  RawTrace t;
  for (std::size_t i = 0; i < pairs; ++i) {
    t.push_back("a");
    t.push_back("b");
  }
  return t;
}

}  // namespace

TEST_CASE("cosine_similarity hand-computed cases") {
  CHECK(cosine_similarity(cv({3}), cv({3})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(cosine_similarity(cv({1, 1}), cv({2})) - 1.0 / std::sqrt(2.0)) < 1e-9);
  CHECK(cosine_similarity(cv({0, 0}), cv({0})) == 1.0);
  CHECK(cosine_similarity(cv({1, 0}), cv({0})) == 0.0);
  CHECK(cosine_similarity(cv({}), cv({})) == 1.0);
}

TEST_CASE("cosine_similarity matches the oracle, is symmetric and scale invariant") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const std::size_t nb = rng() % 20;
    const std::size_t na = nb + rng() % 5;
    std::vector<std::int64_t> a(na), b(nb);
    for (auto& x : a) x = static_cast<std::int64_t>(rng() % 50);
    for (auto& x : b) x = static_cast<std::int64_t>(rng() % 50);
    const double c = cosine_similarity(cv(a), cv(b));
    CHECK(std::abs(c - oracle::cosine({a.begin(), a.end()}, {b.begin(), b.end()})) < 1e-9);
    CHECK(std::abs(c - cosine_similarity(cv(b), cv(a))) < 1e-12);
    const std::int64_t alpha = 1 + static_cast<std::int64_t>(rng() % 1000);
    auto scaled = a;
    for (auto& x : scaled) x *= alpha;
    CHECK(std::abs(cosine_similarity(cv(scaled), cv(b)) - c) < 1e-9);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("a-b micro trace converges after epoch 3 with one bag") {
  auto trace = ab_trace(8);  // 4 epochs of S=4
  Config cfg;
  cfg.window = 2;
  cfg.epoch_size = 4;
  auto model = train(trace, count_table(trace), cfg);
  CHECK(model.converged);
  CHECK(model.epochs_trained == 3);
  CHECK(model.db.size() == 1);
  CHECK(model.db.frequency_at(0) == 9);
  REQUIRE(model.history.size() == 2);
  CHECK(model.history[0] == SimilarityRecord{2, 1.0});
  CHECK(model.history[1] == SimilarityRecord{3, 1.0});
  CHECK(model.index.ns() == 3);
}

TEST_CASE("training needs two full epochs") {
  Config cfg;
  cfg.window = 2;
  cfg.epoch_size = 4;
  auto short_trace = ab_trace(3);  // 6 calls, 1 full epoch
  CHECK_THROWS_AS(train(short_trace, count_table(short_trace), cfg), TrainingError);
  cfg.window = 5;
  auto trace = ab_trace(8);
  CHECK_THROWS_AS(train(trace, count_table(trace), cfg), ConfigError);
}

TEST_CASE("non-convergence returns a flagged model covering every full epoch") {
  // Each epoch introduces a brand-new bag, so consecutive change vectors are
  // orthogonal.
  std::vector<Slot> slots;
  for (Slot e = 0; e < 6; ++e) {
    for (int i = 0; i < 4; ++i) slots.push_back(e);
  }
  slots.push_back(0);  // partial epoch ignored
  auto index = SyscallIndex::from_slots({"a", "b", "c", "d", "e", "f"});
  Config cfg;
  cfg.window = 2;
  cfg.epoch_size = 4;
  auto model = train_slots(slots, index, cfg);
  CHECK_FALSE(model.converged);
  CHECK(model.epochs_trained == 6);
  CHECK(model.history.size() == 5);
  for (const auto& rec : model.history) CHECK(rec.cos_theta == 0.0);
  CHECK(model.db.total_frequency() == 6 * 3);
}

TEST_CASE("history length is epochs_trained - 1 and values lie in [0,1]") {
  std::mt19937_64 rng(11);
  std::vector<Slot> slots(40 * 50);
  for (auto& s : slots) s = static_cast<Slot>((rng() % 3 == 0) ? rng() % 4 : 0);
  Config cfg;
  cfg.window = 4;
  cfg.epoch_size = 50;
  cfg.train_threshold = 0.9;
  auto model = train_slots(slots, SyscallIndex::from_slots({"a", "b", "c"}), cfg);
  CHECK(model.history.size() == model.epochs_trained - 1);
  for (const auto& rec : model.history) {
    CHECK(rec.cos_theta >= 0.0);
    CHECK(rec.cos_theta <= 1.0);
  }
  CHECK(model.db.total_frequency() == model.epochs_trained * (50 - 4 + 1));
}

#include <sstream>

#include <random>

#include "boscids/detector.hpp"
#include "boscids/synth.hpp"
#include "doctest.h"

using namespace boscids;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string trace_bytes(const RawTrace& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("Rng is std::mt19937_64 with the standard's known answer") {
  Rng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next();
  CHECK(rng.next() == 9981545732273789042ULL);

  Rng a(1);
  const double u = a.uniform01();
  const auto k = a.below(64);
  std::mt19937_64 raw(1);
  CHECK(u == static_cast<double>(raw() >> 11) / 9007199254740992.0);
  CHECK(u == 0.13387664401253263);
  CHECK(k == 14);
}

TEST_CASE("single-name alphabet repeats that name") {
  SourceSpec spec;
  spec.alphabet = {"getpid"};
  spec.transition = {{1.0}};
  spec.seed = 99;
  auto t = gen_normal(spec, 50);
  CHECK(t.size() == 50);
  CHECK(t.symbols() == std::vector<std::string>{"getpid"});
}

TEST_CASE("pinned seed-42 source produces the recorded trace") {
  auto spec = make_source(SourceShape{}, 42);
  CHECK(spec.alphabet.size() == 64);
  CHECK_NOTHROW(spec.validate());
  const auto bytes = trace_bytes(gen_normal(spec, 100000));
  CHECK(fnv1a(bytes) == 0xc4c0ab54a5e54425ULL);
  CHECK(trace_bytes(gen_normal(spec, 100000)) == bytes);
  CHECK(trace_bytes(gen_normal(make_source(SourceShape{}, 43), 100000)) != bytes);
}

TEST_CASE("source validation") {
  SourceSpec spec;
  spec.alphabet = {"read", "write"};
  spec.transition = {{0.5, 0.5}, {0.7, 0.2}};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.transition = {{0.5, 0.5}, {0.7, 0.3}};
  CHECK_NOTHROW(spec.validate());
  spec.alphabet = {"read", "read"};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.alphabet = {"read", "9bad"};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("injection labels and untouched regions") {
  auto spec = make_source(SourceShape{}, 3);
  Config cfg;
  cfg.epoch_size = 200;
  const auto normal = gen_normal(spec, 1000);

  for (auto mode : {InjectionMode::novel_names, InjectionMode::shuffled_transitions, InjectionMode::burst_repeat}) {
    CAPTURE(to_string(mode));
    InjectionSpec inj;
    inj.mode = mode;
    inj.intensity = mode == InjectionMode::novel_names ? 1.0 : 0.5;
    inj.target_epochs = {3};
    auto out = gen_anomalous(spec, 1000, inj, cfg);
    CHECK(out.labels == std::vector<Label>{Label::normal, Label::normal, Label::normal, Label::malicious,
                                           Label::normal});
    REQUIRE(out.trace.size() == 1000);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      const bool inside = i >= 600 && i < 800;
      if (!inside) {
        CHECK(out.trace.name_at(i) == normal.name_at(i));
      } else if (out.trace.name_at(i) != normal.name_at(i)) {
        ++changed;
      }
    }
    CHECK(changed > 0);
    if (mode == InjectionMode::novel_names) {
      CHECK(changed == 200);
      for (std::size_t i = 600; i < 800; ++i) {
        CHECK(std::find(spec.alphabet.begin(), spec.alphabet.end(), out.trace.name_at(i)) ==
              spec.alphabet.end());
      }
    }
    CHECK(trace_bytes(gen_anomalous(spec, 1000, inj, cfg).trace) == trace_bytes(out.trace));
  }
}

TEST_CASE("injection preconditions") {
  auto spec = make_source(SourceShape{}, 3);
  Config cfg;
  cfg.epoch_size = 200;
  InjectionSpec inj;
  inj.target_epochs = {1};
  inj.intensity = 0.0;
  CHECK_THROWS_AS(gen_anomalous(spec, 1000, inj, cfg), std::invalid_argument);
  inj.intensity = 1.5;
  CHECK_THROWS_AS(gen_anomalous(spec, 1000, inj, cfg), std::invalid_argument);
  inj.intensity = 0.5;
  inj.target_epochs = {5};
  CHECK_THROWS_AS(gen_anomalous(spec, 1000, inj, cfg), std::invalid_argument);
  CHECK_THROWS_AS(gen_normal(spec, 0), std::invalid_argument);
}

TEST_CASE("labels follow the detector's epoch partition") {
  auto spec = make_source(SourceShape{}, 3);
  Config cfg;
  cfg.epoch_size = 100;
  cfg.window = 10;
  InjectionSpec inj;
  inj.target_epochs = {0};
  CHECK(gen_anomalous(spec, 309, inj, cfg).labels.size() == 3);
  CHECK(gen_anomalous(spec, 310, inj, cfg).labels.size() == 4);
}

TEST_CASE("pinned burst suite: seed 7, 40 epochs, 3 injected, all flagged at defaults") {
  const Config defaults;
  auto train_trace = gen_normal(make_source(SourceShape{}, 7), 100 * defaults.epoch_size);
  auto model = train(train_trace, count_table(train_trace), defaults);
  CHECK(model.converged);
  CHECK(model.epochs_trained == 10);

  InjectionSpec inj;
  inj.mode = InjectionMode::burst_repeat;
  inj.intensity = 0.5;
  inj.target_epochs = {5, 17, 31};
  auto test = gen_anomalous(make_source(SourceShape{}, 8), 40 * defaults.epoch_size, inj, defaults);
  auto report = detect(model, test.trace);
  REQUIRE(report.verdicts.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) {
    CAPTURE(i);
    CHECK(report.verdicts[i].anomalous == (test.labels[i] == Label::malicious));
  }
}

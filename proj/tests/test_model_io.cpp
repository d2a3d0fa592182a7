#include <zlib.h>

#include <cstdio>
#include <sstream>

#include "boscids/trainer.hpp"
#include "doctest.h"

using namespace boscids;

namespace {

TrainedModel ab_model() {
  RawTrace t;
  for (int i = 0; i < 8; ++i) {
    t.push_back("a");
    t.push_back("b");
  }
  Config cfg;
  cfg.window = 2;
  cfg.epoch_size = 4;
  return train(t, count_table(t), cfg);
}

void expect_error(const std::string& bytes, const std::string& section) {
  try {
    parse_model(bytes);
    FAIL("expected ModelFormatError in section " << section);
  } catch (const ModelFormatError& e) {
    CHECK(e.section() == section);
  }
}

}  // namespace

TEST_CASE("a-b model file layout") {
  const std::string bytes = serialize_model(ab_model());
  const std::string expected_body =
      "boscids-model v1\n"
      "w=2 S=4 Tt=0.99 TdFrac=0.1\n"
      "ns=3 retained=2\n"
      "a\n"
      "b\n"
      "@other\n"
      "entries=1\n"
      "1 1 0:9\n"
      "history=2\n"
      "2 1\n"
      "3 1\n";
  REQUIRE(bytes.size() > expected_body.size());
  CHECK(bytes.substr(0, expected_body.size()) == expected_body);
  const std::string trailer = bytes.substr(expected_body.size());
  CHECK(trailer.size() == std::string("crc32=00000000\n").size());
  CHECK(trailer.rfind("crc32=", 0) == 0);
}

TEST_CASE("round trip is observably identical and re-saves byte-identically") {
  auto model = ab_model();
  const std::string bytes = serialize_model(model);
  auto loaded = parse_model(bytes);
  CHECK(loaded.index == model.index);
  CHECK(loaded.db == model.db);
  CHECK(loaded.config == model.config);
  CHECK(loaded.history == model.history);
  CHECK(loaded.epochs_trained == model.epochs_trained);
  CHECK(loaded.converged == model.converged);
  CHECK(serialize_model(loaded) == bytes);

  std::stringstream ss;
  save_model(model, ss);
  CHECK(serialize_model(load_model(ss)) == bytes);
}

TEST_CASE("corrupted model files are rejected naming the section") {
  const std::string good = serialize_model(ab_model());

  expect_error("", "version");
  expect_error("boscids-model v2\n", "version");

  std::string tampered = good;
  tampered.replace(tampered.find("entries=1"), 9, "entries=2");
  expect_error(tampered, "crc32");

  expect_error(good.substr(0, good.size() - 5), "crc32");
  expect_error(good.substr(0, good.find("history=")), "crc32");
}

TEST_CASE("structural errors behind a valid checksum are caught per section") {
  auto resign = [](const std::string& body) {
    const auto crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    char trailer[32];
    std::snprintf(trailer, sizeof trailer, "crc32=%08lx\n", static_cast<unsigned long>(crc));
    return body + trailer;
  };
  const std::string good = serialize_model(ab_model());
  const std::string body = good.substr(0, good.rfind("crc32="));
  CHECK_NOTHROW(parse_model(resign(body)));

  auto edit = [&](const std::string& from, const std::string& to) {
    std::string b = body;
    b.replace(b.find(from), from.size(), to);
    return resign(b);
  };
  expect_error(edit("Tt=0.99", "Tt=1.5"), "config");
  expect_error(edit("w=2 S=4", "w=2"), "config");
  expect_error(edit("@other\n", "other\n"), "index");
  expect_error(edit("ns=3", "ns=4"), "index");
  expect_error(edit("1 1 0:9", "1 1:9"), "entries");
  expect_error(edit("1 1 0:9", "2 1 0:9"), "entries");
  expect_error(edit("1 1 0:9", "1 1 0:0"), "entries");
  expect_error(edit("2 1\n", "5 1\n"), "history");
  expect_error(edit("history=2", "history=3"), "history");
}

TEST_CASE("cosines survive the file exactly, so convergence cannot flip on reload") {
  auto model = ab_model();
  model.history[1].cos_theta = 0.98999999999999;  // prints as 0.990000000 at 9 places
  model.converged = false;
  auto loaded = parse_model(serialize_model(model));
  CHECK(loaded.history == model.history);
  CHECK_FALSE(loaded.converged);
}

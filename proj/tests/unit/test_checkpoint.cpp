#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>

#include "doctest.h"
#include "mpqa/checkpoint.hpp"

using mpqa::CheckpointEntries;
using mpqa::Matrix;
using mpqa::ParameterStore;

namespace {

std::string temp_path(const char* tag) {
  return std::string("ckpt_test_") + tag + ".bin";
}

double from_bits(uint64_t bits) {
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

uint64_t to_bits(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  return bits;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("round trip preserves names, shapes, and exact bits") {
  CheckpointEntries entries;
  Matrix weird(1, 5);
  weird[0] = -0.0;
  weird[1] = std::numeric_limits<double>::infinity();
  weird[2] = from_bits(0x7ff8000000000001ULL);  // NaN with payload
  weird[3] = 5e-324;                            // smallest denormal
  weird[4] = 0.1;
  entries.emplace_back("layer0.w", Matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  entries.emplace_back("odd/values", weird);

  const std::string path = temp_path("roundtrip");
  mpqa::save_checkpoint(path, entries);
  CheckpointEntries loaded = mpqa::load_checkpoint(path);
  std::remove(path.c_str());

  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].first == "layer0.w");
  CHECK(loaded[1].first == "odd/values");
  CHECK(loaded[0].second.same_shape(entries[0].second));
  for (size_t i = 0; i < 5; ++i) {
    CHECK(to_bits(loaded[1].second[i]) == to_bits(weird[i]));
  }
}

TEST_CASE("save_params / load_params round trip through a store") {
  std::mt19937_64 rng(13);
  ParameterStore a;
  a.create_uniform("w1", 3, 4, 4, rng);
  a.create_uniform("w2", 2, 2, 2, rng);

  const std::string path = temp_path("store");
  mpqa::save_params(path, a);

  ParameterStore b;
  b.create_zeros("w1", 3, 4);
  b.create_zeros("w2", 2, 2);
  mpqa::load_params(path, b);
  std::remove(path.c_str());

  CHECK(max_abs_diff(a.get("w1").value, b.get("w1").value) == 0.0);
  CHECK(max_abs_diff(a.get("w2").value, b.get("w2").value) == 0.0);
}

TEST_CASE("load_params rejects unknown, missing, and reshaped parameters") {
  ParameterStore a;
  a.create_zeros("w", 2, 2);
  const std::string path = temp_path("mismatch");
  mpqa::save_params(path, a);

  ParameterStore wrong_name;
  wrong_name.create_zeros("v", 2, 2);
  CHECK_THROWS_AS(mpqa::load_params(path, wrong_name), mpqa::CheckpointError);

  ParameterStore wrong_shape;
  wrong_shape.create_zeros("w", 2, 3);
  CHECK_THROWS_AS(mpqa::load_params(path, wrong_shape), mpqa::CheckpointError);

  ParameterStore extra;
  extra.create_zeros("w", 2, 2);
  extra.create_zeros("w_extra", 1, 1);
  CHECK_THROWS_AS(mpqa::load_params(path, extra), mpqa::CheckpointError);
  std::remove(path.c_str());
}

TEST_CASE("corrupt files are rejected") {
  const std::string path = temp_path("corrupt");
  {
    FILE* f = fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    fputs("definitely not a checkpoint", f);
    fclose(f);
  }
  CHECK_THROWS_AS(mpqa::load_checkpoint(path), mpqa::CheckpointError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(mpqa::load_checkpoint("no_such_file.bin"), mpqa::CheckpointError);
}

}  // TEST_SUITE

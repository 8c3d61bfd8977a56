#include <algorithm>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "mpqa/matcher.hpp"
#include "mpqa/params.hpp"
#include "support/oracles.hpp"

using mpqa::KgToken;
using mpqa::LmToken;
using mpqa::Matrix;
using mpqa::RpbCell;
using mpqa::RpbMask;
using mpqa::RpbOrientation;
using mpqa::Tape;
using mpqa::Value;
using mpqa::WordEmbeddings;

namespace {

WordEmbeddings toy_embeddings() {
  // orthogonal basis plus a diagonal word
  return WordEmbeddings::from_pairs(3, {
                                           {"apple", {1.0, 0.0, 0.0}},
                                           {"pear", {0.0, 1.0, 0.0}},
                                           {"plum", {0.0, 0.0, 1.0}},
                                           {"fruit", {1.0, 1.0, 0.0}},
                                       });
}

std::vector<RpbCell> sorted_cells(std::vector<RpbCell> cells) {
  std::sort(cells.begin(), cells.end(), [](const RpbCell& a, const RpbCell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return cells;
}

bool same_mask(const RpbMask& a, const RpbMask& b) {
  return a.tokens == b.tokens && sorted_cells(a.omega1_cells) == sorted_cells(b.omega1_cells) &&
         sorted_cells(a.omega2_cells) == sorted_cells(b.omega2_cells);
}

}  // namespace

TEST_SUITE("matcher") {

TEST_CASE("phrase embedding averages over underbar-separated words") {
  WordEmbeddings emb = toy_embeddings();

  auto je = emb.phrase_embedding("apple_pear");
  CHECK(je == std::vector<double>({0.5, 0.5, 0.0}));

  CHECK(emb.phrase_embedding("plum") == std::vector<double>({0.0, 0.0, 1.0}));
  CHECK(emb.phrase_embedding("unknown_thing") == std::vector<double>({0.0, 0.0, 0.0}));
  CHECK(emb.phrase_embedding("") == std::vector<double>({0.0, 0.0, 0.0}));
  // unknown words still count toward the denominator
  CHECK(emb.phrase_embedding("apple_unknown") == std::vector<double>({0.5, 0.0, 0.0}));
}

TEST_CASE("embedding file round trip and error handling") {
  WordEmbeddings emb = toy_embeddings();
  const char* path = "emb_test_roundtrip.txt";
  emb.save(path);
  WordEmbeddings loaded = WordEmbeddings::load(path);
  std::remove(path);
  CHECK(loaded.dim() == 3);
  CHECK(loaded.size() == 4);
  REQUIRE(loaded.find("fruit") != nullptr);
  CHECK(*loaded.find("fruit") == std::vector<double>({1.0, 1.0, 0.0}));
  CHECK(loaded.find("celery") == nullptr);

  {
    FILE* f = fopen(path, "w");
    REQUIRE(f != nullptr);
    fputs("apple 1.0 2.0\npear 1.0\n", f);  // ragged dims
    fclose(f);
  }
  CHECK_THROWS_AS(WordEmbeddings::load(path), mpqa::EmbeddingError);
  std::remove(path);
  CHECK_THROWS_AS(WordEmbeddings::load("no_such_emb.txt"), mpqa::EmbeddingError);
}

TEST_CASE("no graph tokens means an all-zero bias") {
  RpbMask mask = mpqa::build_mask(toy_embeddings(), {{0, "<cls>", false}, {1, "apple", true}}, {}, 2);
  CHECK(mask.omega1_cells.empty());
  CHECK(mask.omega2_cells.empty());
}

TEST_CASE("single exact match marks one cell in each direction") {
  // fused layout: 0=cls, 1="apple", 2=the only graph token
  std::vector<LmToken> lm = {{0, "<cls>", false}, {1, "apple", true}};
  std::vector<KgToken> kg = {{2, "apple", "unknown_word"}};
  RpbMask mask = mpqa::build_mask(toy_embeddings(), lm, kg, 3);

  REQUIRE(mask.omega2_cells.size() == 1);
  CHECK(mask.omega2_cells[0] == RpbCell{1, 2});  // row = LM position, col = KG position
  REQUIRE(mask.omega1_cells.size() == 1);
  CHECK(mask.omega1_cells[0] == RpbCell{2, 1});  // transpose quadrant
}

TEST_CASE("figure orientation transposes every cell") {
  std::vector<LmToken> lm = {{0, "apple", true}, {1, "pear", true}};
  std::vector<KgToken> kg = {{2, "apple", "pear"}};
  RpbMask lit = mpqa::build_mask(toy_embeddings(), lm, kg, 3, RpbOrientation::literal);
  RpbMask fig = mpqa::build_mask(toy_embeddings(), lm, kg, 3, RpbOrientation::figure);
  REQUIRE(lit.omega1_cells.size() == fig.omega1_cells.size());
  for (size_t i = 0; i < lit.omega1_cells.size(); ++i) {
    CHECK(fig.omega1_cells[i] == RpbCell{lit.omega1_cells[i].col, lit.omega1_cells[i].row});
  }
  for (size_t i = 0; i < lit.omega2_cells.size(); ++i) {
    CHECK(fig.omega2_cells[i] == RpbCell{lit.omega2_cells[i].col, lit.omega2_cells[i].row});
  }
}

TEST_CASE("cls and sep never take part in matching") {
  // "apple" appears as the cls word; only position 1 may match
  std::vector<LmToken> lm = {{0, "apple", false}, {1, "pear", true}};
  std::vector<KgToken> kg = {{2, "apple", ""}};
  RpbMask mask = mpqa::build_mask(toy_embeddings(), lm, kg, 3);
  REQUIRE(mask.omega2_cells.size() == 1);
  CHECK(mask.omega2_cells[0].row == 1);  // pear, despite apple being the better match
}

TEST_CASE("zero phrase vectors are excluded from both directions") {
  std::vector<LmToken> lm = {{0, "unknownword", true}, {1, "apple", true}};
  std::vector<KgToken> kg = {{2, "unknown_too", "also_unknown"}, {3, "apple", ""}};
  RpbMask mask = mpqa::build_mask(toy_embeddings(), lm, kg, 4);
  // kg token 2 has no usable endpoint: no omega2 cell, never omega1-selected
  REQUIRE(mask.omega2_cells.size() == 1);
  CHECK(mask.omega2_cells[0] == RpbCell{1, 3});
  REQUIRE(mask.omega1_cells.size() == 1);  // lm 0 has a zero vector, lm 1 matches
  CHECK(mask.omega1_cells[0] == RpbCell{3, 1});
}

TEST_CASE("head and tail hitting the same word share one cell") {
  std::vector<LmToken> lm = {{0, "fruit", true}};
  std::vector<KgToken> kg = {{1, "fruit", "fruit"}};
  RpbMask mask = mpqa::build_mask(toy_embeddings(), lm, kg, 2);
  CHECK(mask.omega2_cells.size() == 1);
}

TEST_CASE("ties break toward the lowest position") {
  // identical lm words at positions 0 and 1
  std::vector<LmToken> lm = {{0, "apple", true}, {1, "apple", true}};
  std::vector<KgToken> kg = {{2, "apple", ""}, {3, "apple", ""}};
  RpbMask mask = mpqa::build_mask(toy_embeddings(), lm, kg, 4);
  // both kg tokens pick lm position 0
  REQUIRE(mask.omega2_cells.size() == 2);
  CHECK(mask.omega2_cells[0] == RpbCell{0, 2});
  CHECK(mask.omega2_cells[1] == RpbCell{0, 3});
  // both lm words pick kg position 2
  REQUIRE(mask.omega1_cells.size() == 2);
  CHECK(mask.omega1_cells[0] == RpbCell{2, 0});
  CHECK(mask.omega1_cells[1] == RpbCell{2, 1});
}

TEST_CASE("mask is invariant to a global positive rescaling of the table") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = testsupport::random_mask_instance(rng);
    RpbMask base = mpqa::build_mask(inst.emb, inst.lm, inst.kg, inst.token_count);

    std::vector<std::pair<std::string, std::vector<double>>> scaled;
    for (const char* w : {"w0", "w1", "w2", "w3", "w4", "w5", "zero"}) {
      auto v = *inst.emb.find(w);
      for (double& x : v) x *= 4.0;
      scaled.emplace_back(w, v);
    }
    auto emb4 = mpqa::WordEmbeddings::from_pairs(inst.emb.dim(), scaled);
    RpbMask rescaled = mpqa::build_mask(emb4, inst.lm, inst.kg, inst.token_count);
    CHECK(same_mask(base, rescaled));
  }
}

TEST_CASE("agrees with the exhaustive oracle on random instances") {
  std::mt19937_64 rng(747);
  for (int trial = 0; trial < 120; ++trial) {
    auto inst = testsupport::random_mask_instance(rng);
    CAPTURE(trial);
    RpbMask got = mpqa::build_mask(inst.emb, inst.lm, inst.kg, inst.token_count);
    RpbMask want = testsupport::brute_force_mask(inst.emb, inst.lm, inst.kg, inst.token_count);
    CHECK(same_mask(got, want));

    // one omega1 cell per matchable lm word iff some endpoint is usable
    bool any_endpoint = false;
    for (const auto& t : inst.kg) {
      for (const auto& s : {t.head_surface, t.tail_surface}) {
        auto v = inst.emb.phrase_embedding(s);
        for (double x : v) any_endpoint = any_endpoint || x != 0.0;
      }
    }
    int matchable = 0;
    if (any_endpoint) {
      for (const auto& t : inst.lm) {
        if (!t.is_content) continue;
        auto v = inst.emb.phrase_embedding(t.word);
        bool nonzero = false;
        for (double x : v) nonzero = nonzero || x != 0.0;
        matchable += nonzero ? 1 : 0;
      }
    }
    CHECK(static_cast<int>(got.omega1_cells.size()) == matchable);
    CHECK(got.omega2_cells.size() <= 2 * inst.kg.size());
  }
}

TEST_CASE("realize_omega places the scalars and routes their gradients") {
  mpqa::ParameterStore store;
  store.create("o1", Matrix::scalar(0.5));
  store.create("o2", Matrix::scalar(-0.25));

  RpbMask mask;
  mask.tokens = 3;
  mask.omega1_cells = {{2, 0}, {2, 1}};
  mask.omega2_cells = {{0, 2}};

  Tape t;
  Value omega = mpqa::realize_omega(t, mask, t.param(store.get("o1")), t.param(store.get("o2")), 3);
  const Matrix& m = t.value(omega);
  CHECK(m.at(2, 0) == 0.5);
  CHECK(m.at(2, 1) == 0.5);
  CHECK(m.at(0, 2) == -0.25);
  CHECK(mpqa::sum_all(m) == doctest::Approx(0.75));

  t.backward(t.sum(omega));
  // d sum(omega) / d omega1 = number of omega1 cells, same for omega2
  CHECK(store.get("o1").grad.at(0, 0) == 2.0);
  CHECK(store.get("o2").grad.at(0, 0) == 1.0);
}

TEST_CASE("realize_omega with an empty mask is the zero matrix") {
  Tape t;
  RpbMask mask;
  mask.tokens = 4;
  Value omega = mpqa::realize_omega(t, mask, t.constant(Matrix::scalar(1.0)),
                                    t.constant(Matrix::scalar(2.0)), 4);
  CHECK(mpqa::sum_all(t.value(omega)) == 0.0);
  CHECK(t.rows(omega) == 4);
}

TEST_CASE("realize_omega rejects a stale mask size") {
  Tape t;
  RpbMask mask;
  mask.tokens = 4;
  CHECK_THROWS_AS(mpqa::realize_omega(t, mask, t.constant(Matrix::scalar(1.0)),
                                      t.constant(Matrix::scalar(2.0)), 5),
                  mpqa::SizeMismatch);
}

}  // TEST_SUITE

#include "mpqa/baselines.hpp"

#include <random>
#include <vector>

#include "doctest.h"
#include "mpqa/grad_check.hpp"
#include "mpqa/graph.hpp"
#include "mpqa/matrix.hpp"
#include "mpqa/metapath.hpp"
#include "mpqa/params.hpp"
#include "mpqa/tape.hpp"

namespace {

mpqa::Node make_node(int id, mpqa::NodeType type, std::vector<double> feature) {
  mpqa::Node n;
  n.id = id;
  n.type = type;
  n.surface = "n" + std::to_string(id);
  n.feature = std::move(feature);
  return n;
}

// Two question anchors, two answer anchors, one bystander. Three stored edges
// run q->a, the rest point elsewhere.
mpqa::Subgraph mixed_graph() {
  mpqa::Subgraph g;
  g.num_relations = 2;
  g.nodes = {
      make_node(0, mpqa::NodeType::Q, {0.5, -1.0}),
      make_node(1, mpqa::NodeType::Q, {2.0, 0.25}),
      make_node(2, mpqa::NodeType::A, {-0.75, 1.5}),
      make_node(3, mpqa::NodeType::A, {1.0, 1.0}),
      make_node(4, mpqa::NodeType::O, {0.0, 3.0}),
  };
  g.q_nodes = {0, 1};
  g.a_nodes = {2, 3};
  g.edges = {
      {0, 0, 2},  // qualifies
      {0, 1, 4},  // tail is a bystander
      {1, 1, 2},  // qualifies
      {4, 0, 3},  // head is a bystander
      {1, 0, 3},  // qualifies
      {2, 1, 0},  // answer -> question, wrong direction
  };
  return g;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("rn encoder returns the zero row when no edge qualifies") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(7);
    mpqa::RnEncoder enc(store, "rn", 2, 2, 6, rng);

    mpqa::Subgraph g = mixed_graph();
    g.edges = {{0, 1, 4}, {4, 0, 3}, {2, 1, 0}};

    mpqa::Tape tape;
    mpqa::Value out = enc.encode(tape, g);
    REQUIRE(tape.rows(out) == 1);
    REQUIRE(tape.cols(out) == 6);
    for (int j = 0; j < 6; ++j) CHECK(tape.value(out).at(0, j) == 0.0);
  }

  TEST_CASE("rn encoder pools exactly the q->a edges, as their arithmetic mean") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(11);
    mpqa::RnEncoder enc(store, "rn", 2, 2, 5, rng);

    const mpqa::Subgraph full = mixed_graph();
    const std::vector<mpqa::Edge> qualifying = {{0, 0, 2}, {1, 1, 2}, {1, 0, 3}};

    // Oracle: encode each qualifying edge in isolation and average the rows.
    mpqa::Matrix expected(1, 5);
    for (const mpqa::Edge& e : qualifying) {
      mpqa::Subgraph single = full;
      single.edges = {e};
      mpqa::Tape tape;
      const mpqa::Matrix row = tape.value(enc.encode(tape, single));
      for (int j = 0; j < 5; ++j) expected.at(0, j) += row.at(0, j) / 3.0;
    }

    mpqa::Tape tape;
    const mpqa::Matrix got = tape.value(enc.encode(tape, full));
    CHECK(mpqa::max_abs_diff(got, expected) < 1e-12);
  }

  TEST_CASE("rn encoder ignores edge order") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(3);
    mpqa::RnEncoder enc(store, "rn", 2, 2, 4, rng);

    mpqa::Subgraph g = mixed_graph();
    mpqa::Subgraph shuffled = g;
    std::reverse(shuffled.edges.begin(), shuffled.edges.end());

    mpqa::Tape ta;
    mpqa::Tape tb;
    const mpqa::Matrix a = ta.value(enc.encode(ta, g));
    const mpqa::Matrix b = tb.value(enc.encode(tb, shuffled));
    CHECK(mpqa::max_abs_diff(a, b) < 1e-12);
  }

  TEST_CASE("rn encoder sees inverse edges that point question-to-answer") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(5);
    mpqa::RnEncoder enc(store, "rn", 1, 1, 3, rng);

    mpqa::Subgraph g;
    g.num_relations = 1;
    g.nodes = {make_node(0, mpqa::NodeType::Q, {1.0}), make_node(1, mpqa::NodeType::A, {2.0})};
    g.q_nodes = {0};
    g.a_nodes = {1};
    g.edges = {{1, 0, 0}};  // stored answer -> question only
    {
      mpqa::Tape tape;
      const mpqa::Matrix out = tape.value(enc.encode(tape, g));
      double norm = 0.0;
      for (int j = 0; j < 3; ++j) norm += out.at(0, j) * out.at(0, j);
      CHECK(norm == 0.0);
    }

    mpqa::Subgraph doubled = mpqa::add_inverse_edges(g);
    mpqa::Tape ta;
    const mpqa::Matrix pooled = ta.value(enc.encode(ta, doubled));

    // The only qualifying edge is the materialized inverse (0, 1, 1).
    mpqa::Subgraph lone = doubled;
    lone.edges = {{0, 1, 1}};
    mpqa::Tape tb;
    const mpqa::Matrix single = tb.value(enc.encode(tb, lone));
    CHECK(mpqa::max_abs_diff(pooled, single) < 1e-15);
  }

  TEST_CASE("rn encoder gradients match finite differences") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(19);
    mpqa::RnEncoder enc(store, "rn", 2, 2, 4, rng);
    const mpqa::Subgraph g = mixed_graph();

    const auto report = mpqa::grad_check(
        store, [&](mpqa::Tape& tape) { return tape.sum(enc.encode(tape, g)); });
    CHECK(report.max_rel_error < 1e-6);
  }

  TEST_CASE("node token encoder emits one affine row per node") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(23);
    mpqa::NodeTokenEncoder enc(store, "nt", 2, 4, rng);
    const mpqa::Subgraph g = mixed_graph();

    mpqa::Tape tape;
    mpqa::Value out = enc.encode(tape, g);
    REQUIRE(tape.rows(out) == 5);
    REQUIRE(tape.cols(out) == 4);

    // Oracle: assemble [feature, phi] by hand and push it through plain
    // matrix arithmetic.
    const mpqa::Matrix& w = store.get("nt.w").value;
    const mpqa::Matrix& b = store.get("nt.b").value;
    mpqa::Matrix inputs(5, 2 + mpqa::kNodeTypeCount);
    for (int i = 0; i < 5; ++i) {
      inputs.at(i, 0) = g.nodes[i].feature[0];
      inputs.at(i, 1) = g.nodes[i].feature[1];
      const auto phi = mpqa::one_hot(g.nodes[i].type);
      for (int j = 0; j < mpqa::kNodeTypeCount; ++j) inputs.at(i, 2 + j) = phi[j];
    }
    mpqa::Matrix expected = mpqa::matmul(inputs, w);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j) expected.at(i, j) += b.at(0, j);

    CHECK(mpqa::max_abs_diff(tape.value(out), expected) == 0.0);
  }

  TEST_CASE("node token encoder handles the empty graph and rejects bad feature widths") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(29);
    mpqa::NodeTokenEncoder enc(store, "nt", 2, 4, rng);

    mpqa::Subgraph empty;
    empty.num_relations = 1;
    mpqa::Tape tape;
    CHECK(tape.rows(enc.encode(tape, empty)) == 0);

    mpqa::Subgraph bad;
    bad.num_relations = 1;
    bad.nodes = {make_node(0, mpqa::NodeType::O, {1.0, 2.0, 3.0})};
    mpqa::Tape t2;
    CHECK_THROWS_AS(enc.encode(t2, bad), mpqa::ShapeMismatch);
  }

  TEST_CASE("node token encoder gradients match finite differences") {
    mpqa::ParameterStore store;
    std::mt19937_64 rng(31);
    mpqa::NodeTokenEncoder enc(store, "nt", 2, 3, rng);
    const mpqa::Subgraph g = mixed_graph();

    const auto report = mpqa::grad_check(
        store, [&](mpqa::Tape& tape) { return tape.sum(enc.encode(tape, g)); });
    CHECK(report.max_rel_error < 1e-7);
  }
}

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mpqa/data_io.hpp"
#include "mpqa/matcher.hpp"
#include "mpqa/metapath.hpp"
#include "mpqa/model.hpp"
#include "mpqa/rasa.hpp"
#include "mpqa/rng.hpp"

namespace {

// Dense-ish multi-relational test graph: `n` nodes, ~3n directed base edges,
// one question and two answer anchors, inverses materialized.
mpqa::Subgraph make_graph(int n) {
  std::mt19937_64 rng(n);
  mpqa::Subgraph g;
  g.num_relations = 3;
  for (int i = 0; i < n; ++i) {
    mpqa::Node node;
    node.id = i;
    node.type = i == 0 ? mpqa::NodeType::Q
                       : (i <= 2 ? mpqa::NodeType::A : mpqa::NodeType::O);
    node.surface = "n" + std::to_string(i);
    node.feature = {mpqa::uniform01(rng), mpqa::uniform01(rng)};
    if (node.type == mpqa::NodeType::Q) g.q_nodes.push_back(i);
    if (node.type == mpqa::NodeType::A) g.a_nodes.push_back(i);
    g.nodes.push_back(std::move(node));
  }
  for (int i = 0; i < 3 * n; ++i) {
    const int head = static_cast<int>(mpqa::uniform_index(rng, n));
    int tail = static_cast<int>(mpqa::uniform_index(rng, n));
    if (tail == head) tail = (tail + 1) % n;
    g.edges.push_back({head, static_cast<int>(mpqa::uniform_index(rng, 3)), tail});
  }
  return mpqa::add_inverse_edges(g);
}

void bm_enumerate_paths(benchmark::State& state) {
  const mpqa::Subgraph g = make_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpqa::enumerate_paths(g, 2));
  }
}
BENCHMARK(bm_enumerate_paths)->Arg(8)->Arg(12)->Arg(20);

void bm_attention_layer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = 64;
  std::mt19937_64 rng(7);
  mpqa::ParameterStore store;
  mpqa::RasaStack stack(store, "stack", d, 1, 4, rng);

  mpqa::Matrix x(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) x.at(r, c) = mpqa::normal01(rng);
  mpqa::RpbMask mask;
  mask.tokens = n;
  for (int i = 0; i < n / 2; ++i) {
    mask.omega1_cells.push_back({n / 2 + i / 2, i});
    mask.omega2_cells.push_back({i, n / 2 + i / 2});
  }

  for (auto _ : state) {
    mpqa::Tape tape;
    benchmark::DoNotOptimize(
        tape.scalar(tape.sum(stack.forward(tape, tape.constant(x), n / 2, mask))));
  }
}
BENCHMARK(bm_attention_layer)->Arg(16)->Arg(32)->Arg(64);

void bm_score_choice(benchmark::State& state) {
  const auto data = mpqa::gen_synthetic(mpqa::SyntheticTask::hop2, 1, 9);
  const mpqa::Vocabulary vocab =
      mpqa::Vocabulary::from_corpus(mpqa::dataset_word_corpus(data));
  const mpqa::WordEmbeddings emb = mpqa::synthetic_embeddings(16, 9);

  mpqa::ModelConfig cfg;
  cfg.d_model = 32;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.max_hops = 2;
  cfg.num_relations = data[0].choices[0].graph.num_relations;
  cfg.d_node = data[0].choices[0].graph.node_feature_dim();

  mpqa::ParameterStore store;
  std::mt19937_64 init(9);
  mpqa::Model model(store, cfg, vocab, &emb, init);
  const mpqa::McqaExample& ex = data[0];

  for (auto _ : state) {
    mpqa::Tape tape;
    benchmark::DoNotOptimize(tape.scalar(
        model.score_choice(tape, ex.question, ex.choices[0].text, ex.choices[0].graph)));
  }
}
BENCHMARK(bm_score_choice);

}  // namespace

BENCHMARK_MAIN();

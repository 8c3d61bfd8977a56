#include "mpqa/model.hpp"

#include <array>
#include <stdexcept>

#include "mpqa/metapath.hpp"

namespace mpqa {

KgEncoderKind kg_encoder_from_string(const std::string& name) {
  if (name == "metapath") return KgEncoderKind::metapath;
  if (name == "node") return KgEncoderKind::node;
  if (name == "rn") return KgEncoderKind::rn;
  if (name == "none") return KgEncoderKind::none;
  throw std::invalid_argument("unknown kg encoder '" + name +
                              "' (expected metapath, node, rn, or none)");
}

std::string to_string(KgEncoderKind kind) {
  switch (kind) {
    case KgEncoderKind::metapath: return "metapath";
    case KgEncoderKind::node: return "node";
    case KgEncoderKind::rn: return "rn";
    case KgEncoderKind::none: return "none";
  }
  return "?";
}

Model::Model(ParameterStore& params, const ModelConfig& cfg, const Vocabulary& vocab,
             const WordEmbeddings* embeddings, std::mt19937_64& init_rng)
    : params_(&params),
      cfg_(cfg),
      embeddings_(embeddings),
      context_(params, "context", vocab, cfg.d_model, init_rng),
      paths_(cfg.kg_encoder == KgEncoderKind::metapath
                 ? std::optional<PathEncoder>(std::in_place, params, "paths", cfg.max_hops,
                                              cfg.num_relations, cfg.d_node, cfg.d_model, init_rng)
                 : std::nullopt),
      node_tokens_(cfg.kg_encoder == KgEncoderKind::node
                       ? std::optional<NodeTokenEncoder>(std::in_place, params, "nodes",
                                                         cfg.d_node, cfg.d_model, init_rng)
                       : std::nullopt),
      rn_(cfg.kg_encoder == KgEncoderKind::rn
              ? std::optional<RnEncoder>(std::in_place, params, "rn", cfg.num_relations,
                                         cfg.d_node, cfg.d_model, init_rng)
              : std::nullopt),
      stack_(params, "stack", cfg.d_model, cfg.layers, cfg.heads, init_rng) {
  if (cfg_.token_cap < 0)
    throw std::invalid_argument("token_cap must be nonnegative, got " +
                                std::to_string(cfg_.token_cap));
  params.create_uniform("head.w", cfg.d_model, 1, cfg.d_model, init_rng);
  params.create_zeros("head.b", 1, 1);
}

Model::KgTokens Model::encode_kg(Tape& tape, const Subgraph& g, const ScoreOptions& opts) const {
  KgTokens out;
  switch (cfg_.kg_encoder) {
    case KgEncoderKind::metapath: {
      std::vector<MetaPath> paths = enumerate_paths(g, cfg_.max_hops);
      if (static_cast<int>(paths.size()) > cfg_.token_cap) paths.resize(cfg_.token_cap);
      if (opts.training && opts.drop_mp_rate > 0.0) {
        if (opts.drop_rng == nullptr)
          throw std::invalid_argument("drop_mp_rate > 0 in training needs a drop_rng");
        paths = drop_mp(paths, opts.drop_mp_rate, *opts.drop_rng, /*training=*/true);
      }
      std::vector<RawPathFeature> features;
      features.reserve(paths.size());
      for (const MetaPath& p : paths) features.push_back(featurize(p, g));
      out.states = paths_->encode(tape, features);
      for (const MetaPath& p : paths) {
        out.surfaces.emplace_back(g.node_by_id(p.head()).surface, g.node_by_id(p.tail()).surface);
        std::string label = "path:" + std::to_string(p.node_ids[0]);
        for (size_t h = 0; h < p.relations.size(); ++h)
          label += "-r" + std::to_string(p.relations[h]) + ">" + std::to_string(p.node_ids[h + 1]);
        out.labels.push_back(std::move(label));
      }
      break;
    }
    case KgEncoderKind::node: {
      out.states = node_tokens_->encode(tape, g);
      for (const Node& n : g.nodes) {
        out.surfaces.emplace_back(n.surface, std::string());
        out.labels.push_back("node:" + std::to_string(n.id));
      }
      break;
    }
    case KgEncoderKind::rn: {
      out.states = rn_->encode(tape, g);
      out.surfaces.emplace_back(std::string(), std::string());  // pooled token never matches
      out.labels.push_back("rn");
      break;
    }
    case KgEncoderKind::none: {
      out.states = tape.constant(Matrix(0, cfg_.d_model));
      break;
    }
  }
  return out;
}

Value Model::score_choice(Tape& tape, const std::vector<std::string>& question,
                          const std::vector<std::string>& answer, const Subgraph& graph) const {
  return score_choice(tape, question, answer, graph, ScoreOptions());
}

Value Model::score_choice(Tape& tape, const std::vector<std::string>& question,
                          const std::vector<std::string>& answer, const Subgraph& graph,
                          const ScoreOptions& opts) const {
  const Subgraph* g = &graph;
  Subgraph with_hub;
  if (!graph.has_context_node()) {
    with_hub = insert_context_node(graph);
    g = &with_hub;
  }

  ContextEncoder::Encoded ctx = context_.encode(tape, question, answer);
  const int n_lm = tape.rows(ctx.states);
  KgTokens kg = encode_kg(tape, *g, opts);
  const int n_kg = tape.rows(kg.states);
  const int n = n_lm + n_kg;

  Value x = ctx.states;
  if (n_kg > 0) {
    const std::array<Value, 2> blocks = {ctx.states, kg.states};
    x = tape.concat_rows(blocks);
  }

  RpbMask mask;
  mask.tokens = n;
  if (cfg_.rpb && embeddings_ != nullptr) {
    std::vector<LmToken> lm_tokens;
    for (int i = 0; i < n_lm; ++i) lm_tokens.push_back({i, ctx.words[i], ctx.is_content[i]});
    std::vector<KgToken> kg_tokens;
    for (int i = 0; i < n_kg; ++i)
      kg_tokens.push_back({n_lm + i, kg.surfaces[i].first, kg.surfaces[i].second});
    mask = build_mask(*embeddings_, lm_tokens, kg_tokens, n, cfg_.orientation);
  }

  Value fused = stack_.forward(tape, x, n_lm, mask, opts.trace);

  if (opts.token_labels != nullptr) {
    opts.token_labels->assign(ctx.words.begin(), ctx.words.end());
    opts.token_labels->insert(opts.token_labels->end(), kg.labels.begin(), kg.labels.end());
  }
  if (opts.mask_out != nullptr) *opts.mask_out = mask;

  Value cls = tape.slice_rows(fused, 0, 1);
  Value w = tape.param(params_->get("head.w"));
  Value b = tape.param(params_->get("head.b"));
  return tape.add(tape.matmul(cls, w), b);
}

}  // namespace mpqa

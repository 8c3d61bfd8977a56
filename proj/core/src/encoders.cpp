#include "mpqa/encoders.hpp"

namespace mpqa {

PathEncoder::PathEncoder(ParameterStore& params, std::string prefix, int max_hops,
                         int num_relations, int d_node, int d_model, std::mt19937_64& rng)
    : params_(&params),
      prefix_(std::move(prefix)),
      max_hops_(max_hops),
      num_relations_(num_relations),
      d_node_(d_node),
      d_model_(d_model) {
  if (max_hops_ < 1) throw UnknownHopCount("max_hops must be >= 1");
  for (int k = 1; k <= max_hops_; ++k) {
    const std::string base = prefix_ + ".hop" + std::to_string(k);
    const int in = input_dim(k);
    params.create_uniform(base + ".w1", in, d_model_, in, rng);
    params.create_zeros(base + ".b1", 1, d_model_);
    params.create_uniform(base + ".w2", d_model_, d_model_, d_model_, rng);
    params.create_zeros(base + ".b2", 1, d_model_);
  }
}

int PathEncoder::input_dim(int hops) const {
  return path_feature_dim(hops, num_relations_, d_node_);
}

Value PathEncoder::encode(Tape& tape, const std::vector<RawPathFeature>& features) const {
  if (features.empty()) return tape.constant(Matrix(0, d_model_));

  // bucket by hop count, remembering where each token must end up
  std::vector<std::vector<size_t>> members(max_hops_ + 1);
  for (size_t i = 0; i < features.size(); ++i) {
    const int k = features[i].hops;
    if (k < 1 || k > max_hops_) {
      throw UnknownHopCount("no encoder for hop count " + std::to_string(k));
    }
    if (features[i].vector.size() != static_cast<size_t>(input_dim(k))) {
      throw ShapeMismatch("raw feature size " + std::to_string(features[i].vector.size()) +
                          " does not match hop count " + std::to_string(k));
    }
    members[k].push_back(i);
  }

  std::vector<Value> blocks;
  std::vector<int> order(features.size());  // output row of token i inside the concat
  int row = 0;
  for (int k = 1; k <= max_hops_; ++k) {
    if (members[k].empty()) continue;
    Matrix input(static_cast<int>(members[k].size()), input_dim(k));
    for (size_t r = 0; r < members[k].size(); ++r) {
      input.set_row(static_cast<int>(r), features[members[k][r]].vector);
      order[members[k][r]] = row++;
    }
    const std::string base = prefix_ + ".hop" + std::to_string(k);
    Value x = tape.constant(std::move(input));
    Value h1 = tape.add_row_broadcast(tape.matmul(x, tape.param(params_->get(base + ".w1"))),
                                      tape.param(params_->get(base + ".b1")));
    Value h2 = tape.add_row_broadcast(tape.matmul(tape.gelu(h1), tape.param(params_->get(base + ".w2"))),
                                      tape.param(params_->get(base + ".b2")));
    blocks.push_back(h2);
  }

  Value stacked = blocks.size() == 1 ? blocks[0] : tape.concat_rows(blocks);
  bool already_ordered = true;
  for (size_t i = 0; i < order.size(); ++i) already_ordered = already_ordered && order[i] == static_cast<int>(i);
  if (already_ordered) return stacked;
  return tape.gather_rows(stacked, order);
}

ContextEncoder::ContextEncoder(ParameterStore& params, std::string prefix, const Vocabulary& vocab,
                               int d_model, std::mt19937_64& rng)
    : params_(&params), prefix_(std::move(prefix)), vocab_(&vocab), d_model_(d_model) {
  params.create_uniform(prefix_ + ".table", vocab.size(), d_model, d_model, rng);
}

ContextEncoder::Encoded ContextEncoder::encode(Tape& tape, const std::vector<std::string>& question,
                                               const std::vector<std::string>& answer) const {
  Encoded out;
  std::vector<int> ids;
  ids.reserve(2 + question.size() + answer.size());

  ids.push_back(vocab_->cls_id());
  out.words.push_back(Vocabulary::kCls);
  out.is_content.push_back(false);
  for (const auto& w : question) {
    ids.push_back(vocab_->id(w));
    out.words.push_back(w);
    out.is_content.push_back(true);
  }
  ids.push_back(vocab_->sep_id());
  out.words.push_back(Vocabulary::kSep);
  out.is_content.push_back(false);
  for (const auto& w : answer) {
    ids.push_back(vocab_->id(w));
    out.words.push_back(w);
    out.is_content.push_back(true);
  }

  out.states = tape.gather_rows(tape.param(params_->get(prefix_ + ".table")), ids);
  return out;
}

}  // namespace mpqa

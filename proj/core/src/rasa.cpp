#include "mpqa/rasa.hpp"

#include <cmath>

namespace mpqa {

RasaStack::RasaStack(ParameterStore& params, std::string prefix, int d_model, int layers, int heads,
                     std::mt19937_64& rng)
    : params_(&params), prefix_(std::move(prefix)), d_model_(d_model), layers_(layers), heads_(heads) {
  if (heads_ < 1 || d_model_ % heads_ != 0) {
    throw ShapeMismatch("head count " + std::to_string(heads_) + " must divide d_model " +
                        std::to_string(d_model_));
  }
  if (layers_ < 0) throw ShapeMismatch("negative layer count");

  params.create_zeros(prefix_ + ".e_lm", 1, d_model_);
  params.create_zeros(prefix_ + ".e_kg", 1, d_model_);

  const int dh = d_head();
  for (int l = 0; l < layers_; ++l) {
    const std::string lb = prefix_ + ".l" + std::to_string(l);
    for (int h = 0; h < heads_; ++h) {
      const std::string hb = lb + ".h" + std::to_string(h);
      params.create_uniform(hb + ".wq", d_model_, dh, d_model_, rng);
      params.create_uniform(hb + ".wk", d_model_, dh, d_model_, rng);
      params.create_uniform(hb + ".wv", d_model_, dh, d_model_, rng);
      params.create(omega_name(l, h, 1), Matrix::scalar(0.0));
      params.create(omega_name(l, h, 2), Matrix::scalar(0.0));
    }
    params.create_uniform(lb + ".wo", d_model_, d_model_, d_model_, rng);
    params.create_zeros(lb + ".bo", 1, d_model_);
    params.create(lb + ".ln1.gain", Matrix::full(1, d_model_, 1.0));
    params.create_zeros(lb + ".ln1.bias", 1, d_model_);
    params.create(lb + ".ln2.gain", Matrix::full(1, d_model_, 1.0));
    params.create_zeros(lb + ".ln2.bias", 1, d_model_);
    params.create_uniform(lb + ".ffn.w1", d_model_, 4 * d_model_, d_model_, rng);
    params.create_zeros(lb + ".ffn.b1", 1, 4 * d_model_);
    params.create_uniform(lb + ".ffn.w2", 4 * d_model_, d_model_, 4 * d_model_, rng);
    params.create_zeros(lb + ".ffn.b2", 1, d_model_);
  }
}

std::string RasaStack::omega_name(int layer, int head, int which) const {
  return prefix_ + ".l" + std::to_string(layer) + ".h" + std::to_string(head) + ".omega" +
         std::to_string(which);
}

std::vector<std::string> RasaStack::omega_param_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(layers_) * heads_ * 2);
  for (int l = 0; l < layers_; ++l) {
    for (int h = 0; h < heads_; ++h) {
      names.push_back(omega_name(l, h, 1));
      names.push_back(omega_name(l, h, 2));
    }
  }
  return names;
}

Value RasaStack::layer_forward(Tape& tape, Value x, int n_lm, const RpbMask& mask, int layer,
                               AttentionTrace* trace) const {
  const int n = tape.rows(x);
  if (tape.cols(x) != d_model_) {
    throw ShapeMismatch("input width " + std::to_string(tape.cols(x)) + " != d_model " +
                        std::to_string(d_model_));
  }
  if (n_lm < 0 || n_lm > n) throw ShapeMismatch("context block size out of range");
  if (mask.tokens != n) {
    throw SizeMismatch("mask built for " + std::to_string(mask.tokens) + " tokens, input has " +
                       std::to_string(n));
  }

  const std::string lb = prefix_ + ".l" + std::to_string(layer);
  auto p = [&](const std::string& suffix) { return tape.param(params_->get(lb + suffix)); };

  Value normed = tape.layer_norm(x, p(".ln1.gain"), p(".ln1.bias"), 1e-5);

  // modality rows shift only what feeds the query/key projections
  Value shifted = normed;
  if (n_lm > 0) {
    shifted = tape.add_rows_block(shifted, tape.param(params_->get(prefix_ + ".e_lm")), 0, n_lm);
  }
  if (n_lm < n) {
    shifted = tape.add_rows_block(shifted, tape.param(params_->get(prefix_ + ".e_kg")), n_lm, n);
  }

  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d_head()));
  const bool biased = !mask.omega1_cells.empty() || !mask.omega2_cells.empty();

  std::vector<Value> head_outputs;
  head_outputs.reserve(heads_);
  for (int h = 0; h < heads_; ++h) {
    const std::string hb = ".h" + std::to_string(h);
    Value q = tape.matmul(shifted, p(hb + ".wq"));
    Value k = tape.matmul(shifted, p(hb + ".wk"));
    Value v = tape.matmul(normed, p(hb + ".wv"));

    Value scores = tape.scale(tape.matmul(q, tape.transpose(k)), inv_sqrt_dh);
    if (biased) {
      Value omega = realize_omega(tape, mask, tape.param(params_->get(omega_name(layer, h, 1))),
                                  tape.param(params_->get(omega_name(layer, h, 2))), n);
      scores = tape.add(scores, omega);
    }
    Value attn = tape.softmax_rows(scores);
    if (trace != nullptr) trace->maps.push_back({layer, h, tape.value(attn)});
    head_outputs.push_back(tape.matmul(attn, v));
  }

  Value merged = heads_ == 1 ? head_outputs[0] : tape.concat_cols(head_outputs);
  Value attended = tape.add_row_broadcast(tape.matmul(merged, p(".wo")), p(".bo"));
  Value mid = tape.add(attended, x);

  Value normed2 = tape.layer_norm(mid, p(".ln2.gain"), p(".ln2.bias"), 1e-5);
  Value expanded = tape.gelu(
      tape.add_row_broadcast(tape.matmul(normed2, p(".ffn.w1")), p(".ffn.b1")));
  Value ffn = tape.add_row_broadcast(tape.matmul(expanded, p(".ffn.w2")), p(".ffn.b2"));
  return tape.add(ffn, mid);
}

Value RasaStack::forward(Tape& tape, Value x, int n_lm, const RpbMask& mask,
                         AttentionTrace* trace) const {
  Value out = x;
  for (int l = 0; l < layers_; ++l) out = layer_forward(tape, out, n_lm, mask, l, trace);
  return out;
}

}  // namespace mpqa

// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/recognizer.hpp"

#include <algorithm>
#include <cmath>

#include "spinrect/ops.hpp"
#include "spinrect/random.hpp"

namespace spinrect::rec {

RecognizerConfig RecognizerConfig::toy() { return RecognizerConfig{}; }

RecognizerConfig RecognizerConfig::paper_shaped() {
  RecognizerConfig c;
  c.input_height = 32;
  c.input_width = 100;
  c.conv_channels = {64, 128, 256, 256, 512};
  c.hidden = 256;
  c.attention = 256;
  c.embedding = 256;
  c.vocab = Vocabulary::paper();
  return c;
}

Recognizer::Recognizer(const RecognizerConfig& config, nn::ParamSet& params,
                       const std::string& prefix)
    : config_(config) {
  std::size_t in = 1;
  for (std::size_t i = 0; i < config.conv_channels.size(); ++i) {
    convs_.emplace_back(params, prefix + ".conv" + std::to_string(i + 1), in,
                        config.conv_channels[i]);
    norms_.emplace_back(params, prefix + ".bn" + std::to_string(i + 1), config.conv_channels[i]);
    in = config.conv_channels[i];
  }
  const std::size_t h = config.hidden;
  for (int layer = 0; layer < 2; ++layer) {
    const std::size_t layer_in = layer == 0 ? in : 2 * h;
    const std::string base = prefix + ".bilstm" + std::to_string(layer + 1);
    enc_fwd_[layer] = nn::LstmCell(params, base + ".fwd", layer_in, h);
    enc_bwd_[layer] = nn::LstmCell(params, base + ".bwd", layer_in, h);
  }
  att_keys_ = params.add(prefix + ".attention.keys", {2 * h, config.attention});
  att_query_ = params.add(prefix + ".attention.query", {h, config.attention});
  att_bias_ = params.add(prefix + ".attention.bias", {config.attention});
  att_score_ = params.add(prefix + ".attention.score", {config.attention, 1});
  const std::size_t classes = config.vocab.size();
  embedding_ = params.add(prefix + ".embedding", {classes + 1, config.embedding});
  decoder_ = nn::LstmCell(params, prefix + ".decoder", 2 * h + config.embedding, h);
  classifier_ = nn::Linear(params, prefix + ".classifier", h, classes);
}

void Recognizer::init(std::uint64_t seed) {
  for (auto& conv : convs_) conv.he_init(seed);
  for (auto& norm : norms_) norm.init();
  for (int layer = 0; layer < 2; ++layer) {
    enc_fwd_[layer].init(seed);
    enc_bwd_[layer].init(seed);
  }
  nn::he_normal(att_keys_, att_keys_.dim(0), seed, "attention.keys");
  nn::he_normal(att_query_, att_query_.dim(0), seed, "attention.query");
  nn::fill(att_bias_, 0.0);
  nn::he_normal(att_score_, att_score_.dim(0), seed, "attention.score");
  nn::he_normal(embedding_, embedding_.dim(1), seed, "embedding");
  decoder_.init(seed);
  classifier_.he_init(seed);
}

Tensor Recognizer::features(const Tensor& x) const {
  if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != config_.input_height ||
      x.dim(3) != config_.input_width) {
    throw ShapeError("recognizer: expected input (batch, 1, " +
                     std::to_string(config_.input_height) + ", " +
                     std::to_string(config_.input_width) + "), got " + shape_str(x.shape()));
  }
  Tensor h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = relu(norms_[i](convs_[i](h), training_));
    h = i < 2 ? maxpool2d(h, 2, 2, 2, 2) : maxpool2d(h, 2, 1, 2, 1);
  }
  if (h.dim(2) != 1) {
    throw ShapeError("recognizer: feature height " + std::to_string(h.dim(2)) +
                     " not collapsed to 1; input height " + std::to_string(x.dim(2)) +
                     " does not fit " + std::to_string(convs_.size()) + " pooling blocks");
  }
  return h;
}

EncoderOutput Recognizer::encode(const Tensor& x) const {
  const Tensor f = features(x);
  const std::size_t batch = f.dim(0), channels = f.dim(1), length = f.dim(3);
  std::vector<Tensor> seq;
  seq.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    seq.push_back(reshape(slice(f, 3, t, t + 1), {batch, channels}));
  }
  for (int layer = 0; layer < 2; ++layer) {
    std::vector<Tensor> fwd(length), bwd(length);
    nn::LstmState s = enc_fwd_[layer].zero_state(batch);
    for (std::size_t t = 0; t < length; ++t) {
      s = enc_fwd_[layer](seq[t], s);
      fwd[t] = s.h;
    }
    s = enc_bwd_[layer].zero_state(batch);
    for (std::size_t t = length; t-- > 0;) {
      s = enc_bwd_[layer](seq[t], s);
      bwd[t] = s.h;
    }
    for (std::size_t t = 0; t < length; ++t) {
      const Tensor both[] = {fwd[t], bwd[t]};
      seq[t] = concat(both, 1);
    }
  }
  EncoderOutput out;
  const std::size_t width = 2 * config_.hidden;
  std::vector<Tensor> rows;
  rows.reserve(length);
  for (const auto& s : seq) rows.push_back(reshape(s, {batch, 1, width}));
  out.sequence = concat(rows, 1);
  out.projected = reshape(matmul(reshape(out.sequence, {batch * length, width}), att_keys_),
                          {batch, length, config_.attention});
  out.steps = std::move(seq);
  return out;
}

DecoderState Recognizer::initial_state(std::size_t batch) const {
  DecoderState s;
  s.lstm = decoder_.zero_state(batch);
  s.previous.assign(batch, static_cast<int>(config_.vocab.size()));
  return s;
}

StepResult Recognizer::decode_step(const DecoderState& state, const EncoderOutput& enc) const {
  const std::size_t batch = state.previous.size();
  const std::size_t length = enc.length();
  const std::size_t att = config_.attention;

  const Tensor query = nn::add_row_bias(matmul(state.lstm.h, att_query_), att_bias_);
  const Tensor energy =
      tanh(add(enc.projected, expand(reshape(query, {batch, 1, att}), {batch, length, att})));
  const Tensor scores =
      reshape(matmul(reshape(energy, {batch * length, att}), att_score_), {batch, length});
  const Tensor weights = softmax(scores);
  const Tensor context =
      reshape(matmul(reshape(weights, {batch, 1, length}), enc.sequence), {batch, 2 * config_.hidden});

  const std::size_t rows = embedding_.dim(0);
  std::vector<double> onehot(batch * rows, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    onehot[b * rows + static_cast<std::size_t>(state.previous[b])] = 1.0;
  }
  const Tensor embedded = matmul(Tensor::from({batch, rows}, std::move(onehot)), embedding_);
  const Tensor parts[] = {context, embedded};

  StepResult r;
  r.state.lstm = decoder_(concat(parts, 1), state.lstm);
  r.state.previous = state.previous;
  r.state.attention = weights;
  r.context = context;
  r.logits = classifier_(r.state.lstm.h);
  return r;
}

Tensor Recognizer::distribution(const StepResult& step) { return softmax(step.logits); }

Tensor Recognizer::loss(const Tensor& x, const std::vector<std::string>& labels) const {
  const std::size_t batch = labels.size();
  if (x.dim(0) != batch) {
    throw ShapeError("recognizer loss: " + std::to_string(labels.size()) + " labels for batch " +
                     shape_str(x.shape()));
  }
  const int eos = static_cast<int>(config_.vocab.eos());
  std::vector<std::vector<int>> targets;
  std::size_t steps = 0;
  for (const auto& label : labels) {
    auto t = config_.vocab.encode(label);
    t.push_back(eos);
    steps = std::max(steps, t.size());
    targets.push_back(std::move(t));
  }
  const EncoderOutput enc = encode(x);
  DecoderState state = initial_state(batch);
  Tensor total;
  std::vector<int> step_targets(batch);
  for (std::size_t t = 0; t < steps; ++t) {
    StepResult r = decode_step(state, enc);
    for (std::size_t b = 0; b < batch; ++b) {
      step_targets[b] = t < targets[b].size() ? targets[b][t] : -1;
    }
    const Tensor ce = cross_entropy(r.logits, step_targets);
    total = total.defined() ? add(total, ce) : ce;
    state = std::move(r.state);
    for (std::size_t b = 0; b < batch; ++b) {
      state.previous[b] = t < targets[b].size() ? targets[b][t] : eos;
    }
  }
  return scale(total, 1.0 / static_cast<double>(batch));
}

std::vector<std::string> Recognizer::recognize(const Tensor& x) const {
  const std::size_t batch = x.dim(0);
  const EncoderOutput enc = encode(x);
  DecoderState state = initial_state(batch);
  const std::size_t classes = config_.vocab.size();
  const int eos = static_cast<int>(config_.vocab.eos());
  std::vector<std::vector<int>> emitted(batch);
  std::vector<bool> done(batch, false);
  for (std::size_t t = 0; t < config_.max_length; ++t) {
    StepResult r = decode_step(state, enc);
    const auto logits = r.logits.data();
    bool all_done = true;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* row = logits.data() + b * classes;
      const int best = static_cast<int>(std::max_element(row, row + classes) - row);
      if (!done[b]) {
        emitted[b].push_back(best);
        if (best == eos) done[b] = true;
      }
      all_done = all_done && done[b];
      r.state.previous[b] = best;
    }
    state = std::move(r.state);
    if (all_done) break;
  }
  std::vector<std::string> out;
  out.reserve(batch);
  for (const auto& e : emitted) out.push_back(config_.vocab.filter(config_.vocab.decode(e)));
  return out;
}

}  // namespace spinrect::rec

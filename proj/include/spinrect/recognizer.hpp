// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Attention-based sequence recognizer: a small conv stack collapses the
// image height to 1, two bidirectional LSTM layers encode the width
// positions, and an LSTM decoder with additive attention emits one symbol
// per step until end-of-sequence.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spinrect/nn.hpp"
#include "spinrect/tensor.hpp"

namespace spinrect::rec {

class Vocabulary {
 public:
  /// Digits 0-9 plus EOS (11 classes).
  static Vocabulary digits();
  /// 26 letters, 10 digits, 32 ASCII punctuation marks plus EOS (69 classes).
  static Vocabulary paper();

  std::size_t size() const { return symbols_.size() + 1; }
  std::size_t eos() const { return symbols_.size(); }
  int index_of(char symbol) const;
  char symbol(std::size_t index) const;
  /// Throws std::invalid_argument on characters outside the vocabulary.
  std::vector<int> encode(std::string_view label) const;
  /// Concatenates symbols up to the first EOS.
  std::string decode(const std::vector<int>& indices) const;
  /// Drops everything that is not a letter or digit (applied to outputs of
  /// the paper-shaped vocabulary only).
  std::string filter(const std::string& text) const;

  const std::string& symbols() const { return symbols_; }
  bool operator==(const Vocabulary&) const = default;

 private:
  explicit Vocabulary(std::string symbols, bool filter_output);
  std::string symbols_;
  bool filter_output_ = false;
};

struct RecognizerConfig {
  std::size_t input_height = 16;
  std::size_t input_width = 48;
  /// One conv+pool block per entry. The first two pool 2x2, the rest pool
  /// height only.
  std::vector<std::size_t> conv_channels{16, 32, 64, 64};
  std::size_t hidden = 64;
  std::size_t attention = 64;
  std::size_t embedding = 32;
  std::size_t max_length = 25;
  Vocabulary vocab = Vocabulary::digits();

  static RecognizerConfig toy();
  static RecognizerConfig paper_shaped();
};

struct EncoderOutput {
  std::vector<Tensor> steps;  // T tensors of (batch, 2*hidden)
  Tensor sequence;            // (batch, T, 2*hidden)
  Tensor projected;           // (batch, T, attention), attention keys
  std::size_t length() const { return steps.size(); }
};

struct DecoderState {
  nn::LstmState lstm;
  std::vector<int> previous;  // last emitted symbol per image; vocab.size() is GO
  Tensor attention;           // (batch, T) weights of the last step
};

struct StepResult {
  Tensor logits;  // (batch, classes)
  Tensor context;
  DecoderState state;
};

class Recognizer {
 public:
  Recognizer(const RecognizerConfig& config, nn::ParamSet& params,
             const std::string& prefix = "rec");

  Tensor features(const Tensor& x) const;
  EncoderOutput encode(const Tensor& x) const;
  DecoderState initial_state(std::size_t batch) const;
  StepResult decode_step(const DecoderState& state, const EncoderOutput& enc) const;

  /// Teacher-forced per-step cross-entropy, each label followed by EOS,
  /// summed over steps and averaged over the batch.
  Tensor loss(const Tensor& x, const std::vector<std::string>& labels) const;

  /// Greedy decoding, up to config().max_length steps.
  std::vector<std::string> recognize(const Tensor& x) const;

  void init(std::uint64_t seed);

  /// Training mode normalizes conv features with batch statistics and updates
  /// the running estimates; otherwise the running estimates are used.
  void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }

  const RecognizerConfig& config() const { return config_; }
  /// Symbol distribution of a step, softmax over classes.
  static Tensor distribution(const StepResult& step);

 private:
  RecognizerConfig config_;
  std::vector<nn::Conv3x3> convs_;
  std::vector<nn::BatchNorm> norms_;
  bool training_ = false;
  nn::LstmCell enc_fwd_[2], enc_bwd_[2];
  Tensor att_keys_;   // (2*hidden, attention)
  Tensor att_query_;  // (hidden, attention)
  Tensor att_bias_;   // (attention)
  Tensor att_score_;  // (attention, 1)
  Tensor embedding_;  // (classes + 1, embedding)
  nn::LstmCell decoder_;
  nn::Linear classifier_;
};

}  // namespace spinrect::rec

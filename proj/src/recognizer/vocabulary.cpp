// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <stdexcept>

#include "spinrect/recognizer.hpp"

namespace spinrect::rec {

Vocabulary::Vocabulary(std::string symbols, bool filter_output)
    : symbols_(std::move(symbols)), filter_output_(filter_output) {}

Vocabulary Vocabulary::digits() { return Vocabulary("0123456789", false); }

Vocabulary Vocabulary::paper() {
  std::string s = "abcdefghijklmnopqrstuvwxyz0123456789";
  for (char c = 33; c < 127; ++c) {
    if (std::ispunct(static_cast<unsigned char>(c))) s.push_back(c);
  }
  return Vocabulary(std::move(s), true);
}

int Vocabulary::index_of(char symbol) const {
  const auto pos = symbols_.find(symbol);
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

char Vocabulary::symbol(std::size_t index) const {
  if (index >= symbols_.size()) throw std::out_of_range("Vocabulary::symbol: no printable symbol");
  return symbols_[index];
}

std::vector<int> Vocabulary::encode(std::string_view label) const {
  std::vector<int> out;
  out.reserve(label.size());
  for (char c : label) {
    const int i = index_of(c);
    if (i < 0) throw std::invalid_argument(std::string("Vocabulary: symbol '") + c + "' not in vocabulary");
    out.push_back(i);
  }
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& indices) const {
  std::string out;
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= symbols_.size()) break;
    out.push_back(symbols_[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::string Vocabulary::filter(const std::string& text) const {
  if (!filter_output_) return text;
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

}  // namespace spinrect::rec

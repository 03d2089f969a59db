#pragma once

#include <map>

#include "binmt/common.hpp"

namespace binmt {

// Synthetic desk-scale language pair: the target sentence is the token-wise
// image of the source under a bijective lexicon, in reversed order.
struct ToyConfig {
  int vocab_size = 50;
  int n_real = 2000;
  int n_dev = 200;
  int n_test = 200;
  int n_mono = 20000;  // per side
  int min_len = 10;
  int max_len = 14;
  std::uint64_t seed = 7;
  std::string l1 = "src";
  std::string l2 = "tgt";
};

struct ToyData {
  std::vector<std::pair<Sentence, Sentence>> real, dev, test;  // (L1, L2)
  std::vector<Sentence> mono_l1, mono_l2;
  std::map<std::string, std::string> lexicon;  // L1 word -> L2 word
};

ToyData make_toy(const ToyConfig& cfg);

// Writes train/dev/test (two aligned files each) plus mono files to dir.
void write_toy(const ToyData& data, const std::filesystem::path& dir, const ToyConfig& cfg);

}  // namespace binmt

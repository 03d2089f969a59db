#pragma once

#include <array>
#include <string>
#include <vector>

namespace binmt {

struct BleuScore {
  double bleu = 0;  // percentage, 0..100
  std::array<double, 4> precisions{};
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  std::string report() const;  // "BLEU = xx.xx (p1/p2/p3/p4, BP=y.yyy, hyp_len, ref_len)"
};

// Evaluation tokenizer: splits punctuation from words (keeping '.'/',' that
// sit between digits together with the number). Documented approximation of
// the WMT international tokenizer.
std::vector<std::string> bleu_tokenize(const std::string& text, bool lowercase);

// Corpus-level BLEU over detokenized sentence strings, modified n-gram
// precisions n=1..4, no smoothing (any zero precision gives BLEU 0).
BleuScore bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
               bool lowercase = true);

}  // namespace binmt

#pragma once

#include <set>
#include <utility>

#include "binmt/common.hpp"

namespace binmt {

// Joint source-target byte-pair encoding. Merges are learned over the word
// frequency dictionary of both languages' corpora at once; segmentation is
// invertible via a continuation joiner on non-final units.
struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;  // rank order
  std::size_t num_ops = 0;                                  // requested merges
  std::string eow_marker = "</w>";
  std::string joiner = "@@";
  std::set<std::string> protected_tokens;  // pass through unsplit (language tags)
  std::uint64_t data_hash = 0;             // fingerprint of the training corpus

  void save(const std::filesystem::path& file) const;
  static BpeModel load(const std::filesystem::path& file);
};

// Greedy merge learning: repeatedly merge the most frequent adjacent symbol
// pair (ties broken lexicographically), stopping at num_ops merges or when no
// pair occurs at least twice.
BpeModel learn_bpe(const std::vector<Sentence>& corpora, std::size_t num_ops);

Sentence apply_bpe(const BpeModel& model, const Sentence& s);
std::vector<Sentence> apply_bpe(const BpeModel& model, const std::vector<Sentence>& corpus);

// Exact inverse of apply_bpe. Throws on a dangling joiner at sentence end.
Sentence merge_bpe(const Sentence& s, const std::string& joiner = "@@");

}  // namespace binmt

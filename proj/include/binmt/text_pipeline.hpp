#pragma once

#include <map>
#include <utility>

#include "binmt/common.hpp"

namespace binmt {

// Most frequent casing per lowercased type, learned from non-sentence-initial
// positions (all positions as fallback when no such evidence exists).
struct TruecaseModel {
  // lowercase form -> (best surface form, supporting count)
  std::map<std::string, std::pair<std::string, long>> best_form;

  void save(const std::filesystem::path& file) const;
  static TruecaseModel load(const std::filesystem::path& file);
};

// Punctuation normalization rule table (documented in README):
//   curly double quotes / low double quote / guillemets  -> "
//   curly single quotes / low single quote / angle marks -> '
//   en dash, em dash, horizontal bar, minus sign         -> -
//   ellipsis                                             -> ...
//   NBSP and Unicode space separators                    -> space
//   C0/C1 control characters                             -> removed
// Whitespace runs collapse to one space; result is trimmed.
std::string normalize(const std::string& line);

// Whitespace split plus detaching punctuation runs from words. An apostrophe
// run is re-attached to the alphanumeric run that follows it ("don't" ->
// "don" "'t").
Sentence tokenize(const std::string& text, const std::string& lang = "");

TruecaseModel learn_truecaser(const std::vector<Sentence>& corpus);
Sentence apply_truecase(const TruecaseModel& model, const Sentence& s);

std::vector<std::pair<Sentence, Sentence>> filter_parallel(
    const std::vector<std::pair<Sentence, Sentence>>& pairs, std::size_t max_len = 80);

std::vector<Sentence> filter_mono(const std::vector<Sentence>& lines, std::size_t min_exclusive = 9);

}  // namespace binmt

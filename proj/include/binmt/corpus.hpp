#pragma once

#include <map>
#include <optional>

#include "binmt/common.hpp"

namespace binmt {

enum class Provenance { real, synthetic_source, synthetic_target };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// One training pair. `src_lang`/`tgt_lang` carry the direction; when tagging
// is on, source additionally starts with the target-language tag token.
struct TaggedPair {
  Sentence source;
  Sentence target;
  Provenance provenance = Provenance::real;
  std::string src_lang;
  std::string tgt_lang;
};

using ParallelCorpus = std::vector<TaggedPair>;

// The six Table-2 component kinds; the asterisk side is synthetic.
enum class Component {
  l1_to_l2,       // L1>L2   real
  l2_to_l1,       // L2>L1   real (swapped)
  syn1_to_l2,     // L1*>L2  synthetic source
  syn2_to_l1,     // L2*>L1  synthetic source
  l1_to_syn2,     // L1>L2*  synthetic target
  l2_to_syn1,     // L2>L1*  synthetic target
};

std::string to_string(Component c);
Component component_from_string(const std::string& s);

struct DataRecipe {
  std::vector<Component> components;
  std::string name;       // optional preset id
  bool tagged = true;     // uni-directional presets skip tagging

  void validate() const;  // at least one real component, all unique
};

// Parses "L1>L2"-style component lists and the preset names U-1..U-4, B-1..B-6.
DataRecipe parse_recipe(const std::vector<std::string>& component_strings);
DataRecipe preset_recipe(const std::string& name);

// Default tag format "<2{lang}>".
std::string render_tag(const std::string& target_lang, const std::string& format = "<2{lang}>");
bool looks_tagged(const Sentence& s, const std::string& format = "<2{lang}>");

// Prepends the target-language tag token. Throws if s already starts with one.
Sentence tag_source(const Sentence& s, const std::string& target_lang,
                    const std::string& format = "<2{lang}>");

// Doubles the corpus: original direction then swapped direction, tagging each
// source (when `tagged`) with its pair's target language.
ParallelCorpus swap_and_concat(const ParallelCorpus& parallel, bool tagged = true,
                               const std::string& tag_format = "<2{lang}>");

// Composes the recipe from the real corpus and the two synthetic pools
// (syn_src_l1 holds (L1*, L2) pairs, syn_src_l2 holds (L2*, L1) pairs).
// Optional per-component oversampling factors (default 1).
ParallelCorpus build_recipe(const DataRecipe& recipe, const ParallelCorpus& real,
                            const ParallelCorpus& syn_src_l1, const ParallelCorpus& syn_src_l2,
                            const std::map<Component, std::size_t>& oversample_factors = {},
                            const std::string& tag_format = "<2{lang}>");

// Which component kind a built pair belongs to, given the recipe's language pair.
Component component_of(const TaggedPair& p, const std::string& l1, const std::string& l2);

ParallelCorpus oversample(const ParallelCorpus& corpus,
                          const std::map<Component, std::size_t>& factors, const std::string& l1,
                          const std::string& l2);

// TSV with columns source, target, direction, provenance.
void save_corpus(const std::filesystem::path& file, const ParallelCorpus& corpus);
ParallelCorpus load_corpus(const std::filesystem::path& file);

}  // namespace binmt

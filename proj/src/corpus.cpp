#include "binmt/corpus.hpp"

#include <algorithm>
#include <sstream>

namespace binmt {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::real: return "real";
    case Provenance::synthetic_source: return "synthetic-source";
    case Provenance::synthetic_target: return "synthetic-target";
  }
  throw std::logic_error("bad provenance");
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "real") return Provenance::real;
  if (s == "synthetic-source") return Provenance::synthetic_source;
  if (s == "synthetic-target") return Provenance::synthetic_target;
  throw std::runtime_error("unknown provenance: " + s);
}

std::string to_string(Component c) {
  switch (c) {
    case Component::l1_to_l2: return "L1>L2";
    case Component::l2_to_l1: return "L2>L1";
    case Component::syn1_to_l2: return "L1*>L2";
    case Component::syn2_to_l1: return "L2*>L1";
    case Component::l1_to_syn2: return "L1>L2*";
    case Component::l2_to_syn1: return "L2>L1*";
  }
  throw std::logic_error("bad component");
}

Component component_from_string(const std::string& s) {
  if (s == "L1>L2") return Component::l1_to_l2;
  if (s == "L2>L1") return Component::l2_to_l1;
  if (s == "L1*>L2") return Component::syn1_to_l2;
  if (s == "L2*>L1") return Component::syn2_to_l1;
  if (s == "L1>L2*") return Component::l1_to_syn2;
  if (s == "L2>L1*") return Component::l2_to_syn1;
  throw std::runtime_error("unknown recipe component: " + s);
}

void DataRecipe::validate() const {
  if (components.empty()) throw std::runtime_error("recipe has no components");
  bool has_real = false;
  for (auto c : components)
    if (c == Component::l1_to_l2 || c == Component::l2_to_l1) has_real = true;
  if (!has_real) throw std::runtime_error("recipe needs at least one real component");
  auto sorted = components;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::runtime_error("recipe components must be unique");
}

DataRecipe preset_recipe(const std::string& name) {
  using C = Component;
  DataRecipe r;
  r.name = name;
  if (name == "U-1") {
    r.components = {C::l1_to_l2};
    r.tagged = false;
  } else if (name == "U-2") {
    r.components = {C::l1_to_l2, C::syn1_to_l2};
    r.tagged = false;
  } else if (name == "U-3") {
    r.components = {C::l1_to_l2, C::l1_to_syn2};
    r.tagged = false;
  } else if (name == "U-4") {
    r.components = {C::l1_to_l2, C::syn1_to_l2, C::l1_to_syn2};
    r.tagged = false;
  } else if (name == "B-1") {
    r.components = {C::l1_to_l2, C::l2_to_l1};
  } else if (name == "B-2") {
    // L1<->L2 + L1*<->L2: the synthetic pairs appear in both directions
    r.components = {C::l1_to_l2, C::l2_to_l1, C::syn1_to_l2, C::l2_to_syn1};
  } else if (name == "B-3") {
    r.components = {C::l1_to_l2, C::l2_to_l1, C::syn2_to_l1, C::l1_to_syn2};
  } else if (name == "B-4") {
    r.components = {C::l1_to_l2, C::l2_to_l1, C::syn1_to_l2, C::l2_to_syn1,
                    C::syn2_to_l1, C::l1_to_syn2};
  } else if (name == "B-5" || name == "B-6") {
    // B-6 differs from B-5 only in that its synthetic data is re-decoded
    r.components = {C::l1_to_l2, C::l2_to_l1, C::syn1_to_l2, C::syn2_to_l1};
  } else {
    throw std::runtime_error("unknown recipe preset: " + name);
  }
  r.validate();
  return r;
}

DataRecipe parse_recipe(const std::vector<std::string>& component_strings) {
  if (component_strings.size() == 1) {
    const std::string& s = component_strings[0];
    if (s.rfind("U-", 0) == 0 || s.rfind("B-", 0) == 0) return preset_recipe(s);
  }
  DataRecipe r;
  for (const auto& s : component_strings) r.components.push_back(component_from_string(s));
  r.validate();
  return r;
}

std::string render_tag(const std::string& target_lang, const std::string& format) {
  auto pos = format.find("{lang}");
  if (pos == std::string::npos) throw std::runtime_error("tag format lacks {lang}: " + format);
  std::string out = format;
  out.replace(pos, 6, target_lang);
  return out;
}

bool looks_tagged(const Sentence& s, const std::string& format) {
  if (s.empty()) return false;
  auto pos = format.find("{lang}");
  std::string prefix = format.substr(0, pos);
  std::string suffix = format.substr(pos + 6);
  const std::string& t = s.tokens[0];
  return t.size() > prefix.size() + suffix.size() && t.rfind(prefix, 0) == 0 &&
         t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Sentence tag_source(const Sentence& s, const std::string& target_lang, const std::string& format) {
  if (looks_tagged(s, format))
    throw std::runtime_error("sentence already carries a language tag: " + s.tokens[0]);
  Sentence out;
  out.lang = s.lang;
  out.tokens.reserve(s.size() + 1);
  out.tokens.push_back(render_tag(target_lang, format));
  out.tokens.insert(out.tokens.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

namespace {

TaggedPair make_pair_tagged(Sentence src, Sentence tgt, Provenance prov, std::string src_lang,
                            std::string tgt_lang, bool tagged, const std::string& fmt) {
  TaggedPair p;
  p.source = tagged ? tag_source(src, tgt_lang, fmt) : std::move(src);
  p.target = std::move(tgt);
  p.provenance = prov;
  p.src_lang = std::move(src_lang);
  p.tgt_lang = std::move(tgt_lang);
  return p;
}

}  // namespace

ParallelCorpus swap_and_concat(const ParallelCorpus& parallel, bool tagged,
                               const std::string& tag_format) {
  ParallelCorpus out;
  out.reserve(parallel.size() * 2);
  for (const auto& p : parallel)
    out.push_back(make_pair_tagged(p.source, p.target, p.provenance, p.src_lang, p.tgt_lang,
                                   tagged, tag_format));
  for (const auto& p : parallel) {
    Provenance prov = p.provenance;
    if (prov == Provenance::synthetic_source) prov = Provenance::synthetic_target;
    else if (prov == Provenance::synthetic_target) prov = Provenance::synthetic_source;
    out.push_back(make_pair_tagged(p.target, p.source, prov, p.tgt_lang, p.src_lang, tagged,
                                   tag_format));
  }
  return out;
}

ParallelCorpus build_recipe(const DataRecipe& recipe, const ParallelCorpus& real,
                            const ParallelCorpus& syn_src_l1, const ParallelCorpus& syn_src_l2,
                            const std::map<Component, std::size_t>& oversample_factors,
                            const std::string& tag_format) {
  recipe.validate();
  if (real.empty()) throw std::runtime_error("build_recipe: real corpus is empty");
  const std::string l1 = real.front().src_lang;
  const std::string l2 = real.front().tgt_lang;

  auto factor = [&](Component c) -> std::size_t {
    auto it = oversample_factors.find(c);
    if (it == oversample_factors.end()) return 1;
    if (it->second < 1) throw std::runtime_error("oversample factor must be >= 1");
    return it->second;
  };
  auto require = [&](const ParallelCorpus& pool, Component c) -> const ParallelCorpus& {
    if (pool.empty())
      throw std::runtime_error("recipe component " + to_string(c) + " has an empty pool");
    return pool;
  };

  ParallelCorpus out;
  for (Component c : recipe.components) {
    ParallelCorpus part;
    switch (c) {
      case Component::l1_to_l2:
        for (const auto& p : real)
          part.push_back(make_pair_tagged(p.source, p.target, Provenance::real, l1, l2,
                                          recipe.tagged, tag_format));
        break;
      case Component::l2_to_l1:
        for (const auto& p : real)
          part.push_back(make_pair_tagged(p.target, p.source, Provenance::real, l2, l1,
                                          recipe.tagged, tag_format));
        break;
      case Component::syn1_to_l2:
        for (const auto& p : require(syn_src_l1, c))
          part.push_back(make_pair_tagged(p.source, p.target, Provenance::synthetic_source, l1,
                                          l2, recipe.tagged, tag_format));
        break;
      case Component::syn2_to_l1:
        for (const auto& p : require(syn_src_l2, c))
          part.push_back(make_pair_tagged(p.source, p.target, Provenance::synthetic_source, l2,
                                          l1, recipe.tagged, tag_format));
        break;
      case Component::l1_to_syn2:
        // swapped (L2*, L1) pool: real L1 source, synthetic L2 target
        for (const auto& p : require(syn_src_l2, c))
          part.push_back(make_pair_tagged(p.target, p.source, Provenance::synthetic_target, l1,
                                          l2, recipe.tagged, tag_format));
        break;
      case Component::l2_to_syn1:
        for (const auto& p : require(syn_src_l1, c))
          part.push_back(make_pair_tagged(p.target, p.source, Provenance::synthetic_target, l2,
                                          l1, recipe.tagged, tag_format));
        break;
    }
    for (std::size_t f = 0; f < factor(c); ++f)
      out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Component component_of(const TaggedPair& p, const std::string& l1, const std::string& l2) {
  bool forward = p.src_lang == l1 && p.tgt_lang == l2;
  if (!forward && !(p.src_lang == l2 && p.tgt_lang == l1))
    throw std::runtime_error("pair languages " + p.src_lang + ">" + p.tgt_lang +
                             " do not match recipe pair " + l1 + "/" + l2);
  switch (p.provenance) {
    case Provenance::real: return forward ? Component::l1_to_l2 : Component::l2_to_l1;
    case Provenance::synthetic_source:
      return forward ? Component::syn1_to_l2 : Component::syn2_to_l1;
    case Provenance::synthetic_target:
      return forward ? Component::l1_to_syn2 : Component::l2_to_syn1;
  }
  throw std::logic_error("bad provenance");
}

ParallelCorpus oversample(const ParallelCorpus& corpus,
                          const std::map<Component, std::size_t>& factors, const std::string& l1,
                          const std::string& l2) {
  for (const auto& [c, f] : factors)
    if (f < 1) throw std::runtime_error("oversample factor must be >= 1 for " + to_string(c));
  ParallelCorpus out;
  for (const auto& p : corpus) {
    auto it = factors.find(component_of(p, l1, l2));
    std::size_t f = it == factors.end() ? 1 : it->second;
    for (std::size_t i = 0; i < f; ++i) out.push_back(p);
  }
  return out;
}

void save_corpus(const std::filesystem::path& file, const ParallelCorpus& corpus) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& p : corpus)
    lines.push_back(join_tokens(p.source.tokens) + "\t" + join_tokens(p.target.tokens) + "\t" +
                    p.src_lang + ">" + p.tgt_lang + "\t" + to_string(p.provenance));
  write_lines_atomic(file, lines);
}

ParallelCorpus load_corpus(const std::filesystem::path& file) {
  ParallelCorpus out;
  for (const auto& line : read_lines(file)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) throw std::runtime_error("bad corpus line: " + line);
    TaggedPair p;
    p.source = Sentence(split_ws(cols[0]));
    p.target = Sentence(split_ws(cols[1]));
    auto gt = cols[2].find('>');
    if (gt == std::string::npos) throw std::runtime_error("bad direction field: " + cols[2]);
    p.src_lang = cols[2].substr(0, gt);
    p.tgt_lang = cols[2].substr(gt + 1);
    p.source.lang = p.src_lang;
    p.target.lang = p.tgt_lang;
    p.provenance = provenance_from_string(cols[3]);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace binmt

#include "binmt/subword.hpp"

#include <map>
#include <sstream>
#include <unordered_map>

namespace binmt {

namespace {

std::vector<std::string> word_symbols(const std::string& word, const std::string& eow) {
  std::vector<std::string> syms = utf8_chars(word);
  if (!syms.empty()) syms.back() += eow;
  return syms;
}

void merge_in_place(std::vector<std::string>& syms,
                    const std::pair<std::string, std::string>& m) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < syms.size();) {
    if (i + 1 < syms.size() && syms[i] == m.first && syms[i + 1] == m.second) {
      syms[out++] = m.first + m.second;
      i += 2;
    } else {
      if (out != i) syms[out] = std::move(syms[i]);
      ++out;
      i += 1;
    }
  }
  syms.resize(out);
}

}  // namespace

BpeModel learn_bpe(const std::vector<Sentence>& corpora, std::size_t num_ops) {
  if (corpora.empty()) throw std::runtime_error("learn_bpe: empty corpora");
  BpeModel model;
  model.num_ops = num_ops;
  std::vector<std::string> lines;
  for (const auto& s : corpora) lines.push_back(join_tokens(s.tokens));
  model.data_hash = hash_lines(lines);

  // word frequency dictionary over all languages jointly
  std::map<std::string, long> word_freq;
  for (const auto& s : corpora)
    for (const auto& t : s.tokens) word_freq[t]++;

  std::vector<std::pair<std::vector<std::string>, long>> dict;
  dict.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) dict.emplace_back(word_symbols(w, model.eow_marker), f);

  for (std::size_t op = 0; op < num_ops; ++op) {
    std::map<std::pair<std::string, std::string>, long> pair_freq;
    for (const auto& [syms, f] : dict)
      for (std::size_t i = 0; i + 1 < syms.size(); ++i)
        pair_freq[{syms[i], syms[i + 1]}] += f;
    // most frequent pair; on ties the lexicographically smallest (map order)
    const std::pair<std::string, std::string>* best = nullptr;
    long best_freq = 1;  // require frequency >= 2
    for (const auto& [p, f] : pair_freq) {
      if (f > best_freq) {
        best = &p;
        best_freq = f;
      }
    }
    if (!best) break;
    model.merges.push_back(*best);
    for (auto& [syms, f] : dict) merge_in_place(syms, *best);
  }
  return model;
}

Sentence apply_bpe(const BpeModel& model, const Sentence& s) {
  Sentence out;
  out.lang = s.lang;
  for (const auto& tok : s.tokens) {
    if (model.protected_tokens.count(tok)) {
      out.tokens.push_back(tok);
      continue;
    }
    std::vector<std::string> syms = word_symbols(tok, model.eow_marker);
    for (const auto& m : model.merges) {
      if (syms.size() < 2) break;
      merge_in_place(syms, m);
    }
    for (std::size_t i = 0; i < syms.size(); ++i) {
      std::string unit = syms[i];
      if (i + 1 == syms.size()) {
        unit.erase(unit.size() - model.eow_marker.size());
        out.tokens.push_back(unit);
      } else {
        out.tokens.push_back(unit + model.joiner);
      }
    }
  }
  return out;
}

std::vector<Sentence> apply_bpe(const BpeModel& model, const std::vector<Sentence>& corpus) {
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(apply_bpe(model, s));
  return out;
}

Sentence merge_bpe(const Sentence& s, const std::string& joiner) {
  Sentence out;
  out.lang = s.lang;
  std::string pending;
  for (const auto& tok : s.tokens) {
    if (tok.size() >= joiner.size() &&
        tok.compare(tok.size() - joiner.size(), joiner.size(), joiner) == 0) {
      pending += tok.substr(0, tok.size() - joiner.size());
    } else {
      out.tokens.push_back(pending + tok);
      pending.clear();
    }
  }
  if (!pending.empty())
    throw std::runtime_error("merge_bpe: dangling joiner at sentence end");
  return out;
}

void BpeModel::save(const std::filesystem::path& file) const {
  std::ostringstream oss;
  oss << "bpe v1 num_ops=" << num_ops << " hash=" << hash_hex(data_hash)
      << " eow=" << eow_marker << " joiner=" << joiner;
  for (const auto& t : protected_tokens) oss << " protect=" << t;
  oss << "\n";
  for (const auto& m : merges) oss << m.first << ' ' << m.second << "\n";
  write_text_atomic(file, oss.str());
}

BpeModel BpeModel::load(const std::filesystem::path& file) {
  auto lines = read_lines(file);
  if (lines.empty()) throw std::runtime_error("empty BPE model file " + file.string());
  BpeModel model;
  std::istringstream head(lines[0]);
  std::string field;
  head >> field;  // "bpe"
  while (head >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "num_ops") model.num_ops = std::stoul(val);
    else if (key == "hash") model.data_hash = std::stoull(val, nullptr, 16);
    else if (key == "eow") model.eow_marker = val;
    else if (key == "joiner") model.joiner = val;
    else if (key == "protect") model.protected_tokens.insert(val);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto sp = lines[i].find(' ');
    if (sp == std::string::npos) throw std::runtime_error("bad merge line: " + lines[i]);
    model.merges.emplace_back(lines[i].substr(0, sp), lines[i].substr(sp + 1));
  }
  return model;
}

}  // namespace binmt

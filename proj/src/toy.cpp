#include "binmt/toy.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace binmt {

namespace {

std::vector<std::string> make_words(int count, const std::vector<std::string>& syllables,
                                    std::mt19937_64& rng) {
  std::set<std::string> seen;
  std::vector<std::string> words;
  std::uniform_int_distribution<std::size_t> pick(0, syllables.size() - 1);
  std::uniform_int_distribution<int> nsyl(2, 3);
  while (static_cast<int>(words.size()) < count) {
    std::string w;
    int n = nsyl(rng);
    for (int i = 0; i < n; ++i) w += syllables[pick(rng)];
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

Sentence sample_sentence(const std::vector<std::string>& words,
                         const std::vector<double>& cdf, const ToyConfig& cfg,
                         std::mt19937_64& rng, const std::string& lang) {
  std::uniform_int_distribution<int> len_dist(cfg.min_len, cfg.max_len);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sentence s;
  s.lang = lang;
  int len = len_dist(rng);
  for (int i = 0; i < len; ++i) {
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u(rng));
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= words.size()) idx = words.size() - 1;
    s.tokens.push_back(words[idx]);
  }
  return s;
}

}  // namespace

ToyData make_toy(const ToyConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const std::vector<std::string> syl_l1 = {"ba", "ke", "mi", "no", "pu", "ra", "se", "ti", "vo", "zu"};
  const std::vector<std::string> syl_l2 = {"ar", "el", "im", "ol", "un", "es", "it", "or", "ak", "ul"};
  auto words_l1 = make_words(cfg.vocab_size, syl_l1, rng);
  auto words_l2 = make_words(cfg.vocab_size, syl_l2, rng);

  ToyData data;
  for (int i = 0; i < cfg.vocab_size; ++i) data.lexicon[words_l1[i]] = words_l2[i];

  // zipf-like unigram distribution over the lexicon
  std::vector<double> weights(words_l1.size());
  double sum = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = 1.0 / static_cast<double>(i + 2);
    sum += weights[i];
  }
  std::vector<double> cdf(weights.size());
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] / sum;
    cdf[i] = acc;
  }

  auto translate = [&](const Sentence& src) {
    Sentence tgt;
    tgt.lang = cfg.l2;
    for (auto it = src.tokens.rbegin(); it != src.tokens.rend(); ++it)
      tgt.tokens.push_back(data.lexicon.at(*it));
    return tgt;
  };
  auto sample_pairs = [&](int n) {
    std::vector<std::pair<Sentence, Sentence>> pairs;
    for (int i = 0; i < n; ++i) {
      Sentence s = sample_sentence(words_l1, cdf, cfg, rng, cfg.l1);
      pairs.emplace_back(s, translate(s));
    }
    return pairs;
  };

  data.real = sample_pairs(cfg.n_real);
  data.dev = sample_pairs(cfg.n_dev);
  data.test = sample_pairs(cfg.n_test);
  for (int i = 0; i < cfg.n_mono; ++i)
    data.mono_l1.push_back(sample_sentence(words_l1, cdf, cfg, rng, cfg.l1));
  for (int i = 0; i < cfg.n_mono; ++i)
    data.mono_l2.push_back(translate(sample_sentence(words_l1, cdf, cfg, rng, cfg.l1)));
  return data;
}

void write_toy(const ToyData& data, const std::filesystem::path& dir, const ToyConfig& cfg) {
  std::filesystem::create_directories(dir);
  auto write_pairs = [&](const std::string& stem,
                         const std::vector<std::pair<Sentence, Sentence>>& pairs) {
    std::vector<Sentence> a, b;
    for (const auto& p : pairs) {
      a.push_back(p.first);
      b.push_back(p.second);
    }
    write_sentences_atomic(dir / (stem + "." + cfg.l1), a);
    write_sentences_atomic(dir / (stem + "." + cfg.l2), b);
  };
  write_pairs("train", data.real);
  write_pairs("dev", data.dev);
  write_pairs("test", data.test);
  write_sentences_atomic(dir / ("mono." + cfg.l1), data.mono_l1);
  write_sentences_atomic(dir / ("mono." + cfg.l2), data.mono_l2);
}

}  // namespace binmt

#include "binmt/bleu.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "binmt/common.hpp"

namespace binmt {

std::vector<std::string> bleu_tokenize(const std::string& text, bool lowercase) {
  auto cps = utf8_chars(text);
  std::string spaced;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const std::string& cp = cps[i];
    bool word;
    if (cp.size() > 1) {
      word = true;  // non-ASCII treated as letters
    } else {
      unsigned char c = static_cast<unsigned char>(cp[0]);
      word = std::isalnum(c) != 0;
      // keep decimal/thousand marks inside numbers together
      if (!word && (c == '.' || c == ',') && i > 0 && i + 1 < cps.size() &&
          cps[i - 1].size() == 1 && std::isdigit(static_cast<unsigned char>(cps[i - 1][0])) &&
          cps[i + 1].size() == 1 && std::isdigit(static_cast<unsigned char>(cps[i + 1][0])))
        word = true;
    }
    if (word) {
      spaced += cp;
    } else if (cp == " ") {
      spaced += ' ';
    } else {
      spaced += ' ';
      spaced += cp;
      spaced += ' ';
    }
  }
  if (lowercase)
    for (char& c : spaced) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return split_ws(spaced);
}

namespace {

std::string ngram_key(const std::vector<std::string>& toks, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) key += '\x1f';
    key += toks[start + i];
  }
  return key;
}

}  // namespace

BleuScore bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
               bool lowercase) {
  if (hyps.size() != refs.size())
    throw std::runtime_error("bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                             std::to_string(refs.size()) + " references");
  if (hyps.empty()) throw std::runtime_error("bleu: empty corpus");

  std::array<long, 4> clipped{};
  std::array<long, 4> total{};
  std::size_t hyp_len = 0, ref_len = 0;

  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto hyp = bleu_tokenize(hyps[i], lowercase);
    auto ref = bleu_tokenize(refs[i], lowercase);
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      if (hyp.size() < n) continue;
      std::unordered_map<std::string, long> ref_counts;
      if (ref.size() >= n)
        for (std::size_t j = 0; j + n <= ref.size(); ++j) ref_counts[ngram_key(ref, j, n)]++;
      std::unordered_map<std::string, long> hyp_counts;
      for (std::size_t j = 0; j + n <= hyp.size(); ++j) hyp_counts[ngram_key(hyp, j, n)]++;
      for (const auto& [g, c] : hyp_counts) {
        auto it = ref_counts.find(g);
        long r = it == ref_counts.end() ? 0 : it->second;
        clipped[n - 1] += std::min(c, r);
        total[n - 1] += c;
      }
    }
  }

  BleuScore score;
  score.hyp_len = hyp_len;
  score.ref_len = ref_len;
  score.brevity_penalty =
      (hyp_len < ref_len && hyp_len > 0)
          ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
          : 1.0;
  double log_prec_sum = 0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    // when the corpus has no hypothesis n-grams of this order at all (very
    // short sentences), the order is vacuous and contributes neutrally; this
    // keeps identity at 100 regardless of sentence length
    score.precisions[n] =
        total[n] > 0 ? static_cast<double>(clipped[n]) / static_cast<double>(total[n]) : 1.0;
    if (score.precisions[n] <= 0)
      zero = true;
    else
      log_prec_sum += std::log(score.precisions[n]);
  }
  score.bleu = zero ? 0.0 : score.brevity_penalty * std::exp(log_prec_sum / 4.0) * 100.0;
  return score;
}

std::string BleuScore::report() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "BLEU = %.2f (%.3f/%.3f/%.3f/%.3f, BP=%.3f, hyp_len=%zu, ref_len=%zu)",
                bleu, precisions[0], precisions[1], precisions[2], precisions[3], brevity_penalty,
                hyp_len, ref_len);
  return buf;
}

}  // namespace binmt

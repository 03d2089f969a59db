#include "binmt/lm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace binmt {

namespace {
const char kSep = '\x1f';

std::string context_key(const std::vector<std::string>& ctx, std::size_t len) {
  // key over the last `len` tokens of ctx (shorter contexts padded with <s>)
  std::string key;
  for (std::size_t i = 0; i < len; ++i) {
    std::size_t back = len - i;
    if (i) key += kSep;
    key += back > ctx.size() ? NgramLm::kBos : ctx[ctx.size() - back];
  }
  return key;
}
}  // namespace

NgramLm::NgramLm(std::size_t order, std::vector<double> lambdas, double eps)
    : order_(order), lambdas_(std::move(lambdas)), eps_(eps), counts_(order) {
  if (order_ < 1) throw std::runtime_error("NgramLm: order must be >= 1");
  if (lambdas_.empty()) lambdas_.assign(order_, 1.0 / static_cast<double>(order_));
  if (lambdas_.size() != order_)
    throw std::runtime_error("NgramLm: need one lambda per order");
  double sum = std::accumulate(lambdas_.begin(), lambdas_.end(), 0.0);
  for (double l : lambdas_)
    if (l < 0) throw std::runtime_error("NgramLm: negative lambda");
  if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("NgramLm: lambdas must sum to 1");
  if (eps_ < 0 || eps_ >= 1) throw std::runtime_error("NgramLm: eps must be in [0,1)");
}

std::string NgramLm::map_token(const std::string& t) const {
  if (restrict_vocab_ && !restrict_vocab_->count(t)) return kUnk;
  return t;
}

void NgramLm::add_sentence(const std::vector<std::string>& tokens) {
  std::vector<std::string> events;
  events.reserve(tokens.size() + 1);
  for (const auto& t : tokens) {
    std::string m = map_token(t);
    if (m != kUnk) vocab_.insert(m);
    events.push_back(std::move(m));
  }
  events.emplace_back(kEos);
  std::vector<std::string> ctx;
  for (const auto& ev : events) {
    for (std::size_t k = 0; k < order_; ++k) {
      auto& cc = counts_[k][context_key(ctx, k)];
      cc.events[ev]++;
      cc.total++;
    }
    ctx.push_back(ev);
  }
}

double NgramLm::prob(const std::string& token, const std::vector<std::string>& context) const {
  std::string tok = map_token(token);
  if (!vocab_.count(tok) && tok != kEos) tok = kUnk;
  std::vector<std::string> ctx;
  ctx.reserve(context.size());
  for (const auto& c : context) {
    std::string m = map_token(c);
    ctx.push_back(vocab_.count(m) || m == kBos || m == kEos ? m : std::string(kUnk));
  }
  const double uniform = 1.0 / static_cast<double>(event_space_size());
  double p_ml = 0;
  for (std::size_t k = 0; k < order_; ++k) {
    auto it = counts_[k].find(context_key(ctx, k));
    if (it == counts_[k].end() || it->second.total == 0) {
      p_ml += lambdas_[k] * uniform;
    } else {
      auto ev = it->second.events.find(tok);
      long c = ev == it->second.events.end() ? 0 : ev->second;
      p_ml += lambdas_[k] * static_cast<double>(c) / static_cast<double>(it->second.total);
    }
  }
  return (1.0 - eps_) * p_ml + eps_ * uniform;
}

NgramLm train_lm(const std::vector<Sentence>& corpus, std::size_t order,
                 std::vector<double> lambdas, double eps,
                 const std::set<std::string>* restrict_vocab) {
  if (corpus.empty()) throw std::runtime_error("train_lm: empty corpus");
  NgramLm lm(order, std::move(lambdas), eps);
  if (restrict_vocab) lm.restrict_vocab_ = *restrict_vocab;
  for (const auto& s : corpus) lm.add_sentence(s.tokens);
  return lm;
}

double cross_entropy(const NgramLm& lm, const Sentence& s) {
  if (s.empty()) throw std::runtime_error("cross_entropy: empty sentence");
  double nll = 0;
  std::vector<std::string> ctx;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    const std::string& tok = i < s.size() ? s.tokens[i] : std::string(NgramLm::kEos);
    nll -= std::log(lm.prob(tok, ctx));
    if (i < s.size()) ctx.push_back(s.tokens[i]);
  }
  return nll / static_cast<double>(s.size() + 1);
}

double ce_difference(const NgramLm& lm_in, const NgramLm& lm_out, const Sentence& s) {
  return cross_entropy(lm_in, s) - cross_entropy(lm_out, s);
}

std::vector<ScoredSentence> select(const std::vector<Sentence>& pool, const NgramLm& lm_in,
                                   const NgramLm& lm_out, std::size_t count) {
  if (count > pool.size())
    throw std::runtime_error("select: requested " + std::to_string(count) +
                             " sentences from a pool of " + std::to_string(pool.size()));
  std::vector<ScoredSentence> scored;
  scored.reserve(pool.size());
  for (const auto& s : pool) {
    ScoredSentence ss;
    ss.sentence = s;
    ss.h_in = cross_entropy(lm_in, s);
    ss.h_out = cross_entropy(lm_out, s);
    ss.score = ss.h_in - ss.h_out;
    scored.push_back(std::move(ss));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredSentence& a, const ScoredSentence& b) { return a.score < b.score; });
  scored.resize(count);
  return scored;
}

void NgramLm::save(const std::filesystem::path& file) const {
  std::ostringstream oss;
  oss << "ngram-lm v1 order=" << order_ << " eps=" << std::hexfloat << eps_ << std::defaultfloat
      << " vocab=" << vocab_.size() << " lambdas=";
  for (std::size_t i = 0; i < lambdas_.size(); ++i)
    oss << (i ? "," : "") << std::hexfloat << lambdas_[i] << std::defaultfloat;
  oss << "\n";
  for (const auto& v : vocab_) oss << "V\t" << v << "\n";
  if (restrict_vocab_) {
    for (const auto& v : *restrict_vocab_) oss << "R\t" << v << "\n";
  }
  for (std::size_t k = 0; k < order_; ++k) {
    std::vector<std::string> lines;
    for (const auto& [ctx, cc] : counts_[k])
      for (const auto& [tok, c] : cc.events) {
        std::string printable_ctx = ctx;
        std::replace(printable_ctx.begin(), printable_ctx.end(), kSep, ' ');
        lines.push_back("C\t" + std::to_string(k + 1) + "\t" + printable_ctx + "\t" + tok + "\t" +
                        std::to_string(c));
      }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) oss << l << "\n";
  }
  write_text_atomic(file, oss.str());
}

NgramLm NgramLm::load(const std::filesystem::path& file) {
  auto lines = read_lines(file);
  if (lines.empty()) throw std::runtime_error("empty LM file " + file.string());
  std::istringstream head(lines[0]);
  std::string field;
  std::size_t order = 3;
  double eps = 1e-6;
  std::vector<double> lambdas;
  head >> field;  // "ngram-lm"
  while (head >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "order") order = std::stoul(val);
    else if (key == "eps") eps = std::strtod(val.c_str(), nullptr);
    else if (key == "lambdas") {
      std::istringstream ls(val);
      std::string item;
      while (std::getline(ls, item, ',')) lambdas.push_back(std::strtod(item.c_str(), nullptr));
    }
  }
  NgramLm lm(order, lambdas, eps);
  std::set<std::string> restrict;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      parts.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (parts[0] == "V") {
      lm.vocab_.insert(parts[1]);
    } else if (parts[0] == "R") {
      restrict.insert(parts[1]);
    } else if (parts[0] == "C") {
      std::size_t k = std::stoul(parts[1]) - 1;
      std::string ctx = parts[2];
      std::replace(ctx.begin(), ctx.end(), ' ', kSep);
      long c = std::stol(parts[4]);
      auto& cc = lm.counts_[k][ctx];
      cc.events[parts[3]] += c;
      cc.total += c;
    } else {
      throw std::runtime_error("bad LM line: " + line);
    }
  }
  if (!restrict.empty()) lm.restrict_vocab_ = std::move(restrict);
  return lm;
}

}  // namespace binmt

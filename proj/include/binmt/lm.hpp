#pragma once

#include <optional>
#include <set>
#include <unordered_map>

#include "binmt/common.hpp"

namespace binmt {

// Interpolated count-based n-gram model used for cross-entropy scoring.
//
// Event space E = vocab ∪ {<unk>, </s>}; <s> only ever appears in contexts.
// P(w|ctx) = (1-eps) * sum_i lambda_i * P_ML,i(w|ctx_i) + eps / |E|,
// where an unseen context's P_ML,i falls back to the uniform 1/|E|.
// This sums to 1 over E for every context.
class NgramLm {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  NgramLm() = default;
  NgramLm(std::size_t order, std::vector<double> lambdas, double eps);

  std::size_t order() const { return order_; }
  double eps() const { return eps_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::set<std::string>& vocab() const { return vocab_; }
  std::size_t event_space_size() const { return vocab_.size() + 2; }

  void add_sentence(const std::vector<std::string>& tokens);
  // Probability of `token` (mapped to <unk> if OOV) given the preceding
  // context tokens; context may be shorter than order-1 (padded with <s>).
  double prob(const std::string& token, const std::vector<std::string>& context) const;

  void save(const std::filesystem::path& file) const;
  static NgramLm load(const std::filesystem::path& file);

 private:
  std::string map_token(const std::string& t) const;

  std::size_t order_ = 3;
  std::vector<double> lambdas_;  // lambdas_[i] weights order i+1
  double eps_ = 1e-6;
  std::set<std::string> vocab_;
  std::optional<std::set<std::string>> restrict_vocab_;
  // per order: context key -> (token -> count, total)
  struct ContextCounts {
    std::unordered_map<std::string, long> events;
    long total = 0;
  };
  std::vector<std::unordered_map<std::string, ContextCounts>> counts_;

  friend NgramLm train_lm(const std::vector<Sentence>&, std::size_t, std::vector<double>,
                          double, const std::set<std::string>*);
};

// Trains on `corpus`. When `restrict_vocab` is given (Moore-Lewis coupling of
// the out-of-domain model to the in-domain vocabulary), tokens outside it are
// mapped to <unk> in both events and contexts.
NgramLm train_lm(const std::vector<Sentence>& corpus, std::size_t order = 3,
                 std::vector<double> lambdas = {}, double eps = 1e-6,
                 const std::set<std::string>* restrict_vocab = nullptr);

// Mean negative log probability in nats per token; the end-of-sentence event
// counts both in the sum and in the normalizer.
double cross_entropy(const NgramLm& lm, const Sentence& s);

double ce_difference(const NgramLm& lm_in, const NgramLm& lm_out, const Sentence& s);

struct ScoredSentence {
  Sentence sentence;
  double h_in = 0;
  double h_out = 0;
  double score = 0;  // h_in - h_out
};

// The `count` pool sentences with smallest cross-entropy difference, ascending;
// ties keep pool order.
std::vector<ScoredSentence> select(const std::vector<Sentence>& pool, const NgramLm& lm_in,
                                   const NgramLm& lm_out, std::size_t count);

}  // namespace binmt

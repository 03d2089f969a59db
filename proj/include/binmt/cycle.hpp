#pragma once

#include "binmt/lm.hpp"
#include "binmt/subword.hpp"
#include "binmt/train.hpp"

namespace binmt {

// The improvement cycle: round 0 trains the base recipe from scratch; every
// later round back-translates the (fixed) selected monolingual data with the
// previous round's model, rebuilds the augment recipe, and continues training
// from the previous best checkpoint.
struct CyclePlan {
  std::string base_recipe = "B-1";
  std::string augment_recipe = "B-5";
  int rounds = 1;       // 1 = fine-tune once (B-5*), 2 = re-decode round (B-6*)
  int k = 1;            // selected monolingual size = k * |real|
  int beam = 5;
  std::size_t lm_order = 3;
  double lm_eps = 1e-6;
  std::size_t decode_avg_top_k = 0;  // 0 = decode with the best single checkpoint
  int threads = 1;
};

struct CycleData {
  // BPE-applied, untagged corpora; real/dev/test pairs are L1 -> L2
  ParallelCorpus real;
  ParallelCorpus dev;
  ParallelCorpus test;
  std::vector<Sentence> mono_l1, mono_l2;          // back-translation pools
  std::vector<Sentence> in_domain_l1, in_domain_l2;  // data selection seeds
  std::string l1, l2;
};

struct RoundScores {
  int round = 0;
  double bleu_l1_to_l2 = 0;
  double bleu_l2_to_l1 = 0;
};

struct CostReport {
  std::vector<std::pair<std::string, std::size_t>> stages;  // stage name -> checkpoints
  std::size_t total() const;
  std::vector<std::string> to_tsv() const;
};

struct CycleResult {
  std::vector<Checkpoint> round_best;  // index = round
  std::vector<RoundScores> scores;
  CostReport cost;
  // per fine-tune round (index 0 = round 1): the synthetic pools used
  std::vector<ParallelCorpus> synthetic_l1, synthetic_l2;
};

// Translates each monolingual sentence (language `real_lang`) into `syn_lang`,
// producing (synthetic, real) pairs with the real text on the target side.
// Decode failures are skipped with a logged index.
ParallelCorpus back_translate(const ModelConfig& cfg,
                              const std::vector<const ModelParams*>& models,
                              const std::vector<Sentence>& mono, const std::string& syn_lang,
                              const std::string& real_lang, int beam = 5, int threads = 1);

// Decodes `sources` (untagged, language src_lang) into tgt_lang.
std::vector<Sentence> translate_corpus(const ModelConfig& cfg,
                                       const std::vector<const ModelParams*>& models,
                                       const std::vector<Sentence>& sources,
                                       const std::string& tgt_lang, int beam, int threads = 1);

RoundScores evaluate_both_directions(const ModelConfig& cfg,
                                     const std::vector<const ModelParams*>& models,
                                     const ParallelCorpus& test, const std::string& l1,
                                     const std::string& l2, int beam, int threads, int round);

CycleResult run_cycle(const CyclePlan& plan, const CycleData& data, const ModelConfig& cfg,
                      const TrainConfig& base_tc, const TrainConfig& finetune_tc);

struct SweepRow {
  int k = 0;
  std::string direction;
  double bleu = 0;
  bool feasible = true;
};

// Runs the cycle for each k, reusing the shared round-0 baseline. Infeasible k
// (k*|real| exceeding a pool) yields warning rows instead of aborting.
std::vector<SweepRow> sweep_k(const CyclePlan& plan, const CycleData& data,
                              const ModelConfig& cfg, const TrainConfig& base_tc,
                              const TrainConfig& finetune_tc, const std::vector<int>& k_values);

}  // namespace binmt

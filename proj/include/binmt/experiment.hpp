#pragma once

#include "binmt/cycle.hpp"
#include "binmt/text_pipeline.hpp"

namespace binmt {

// Aggregated settings for an end-to-end run, loaded from a JSON config file.
// Path values support ${VAR} environment-variable expansion.
struct ExperimentConfig {
  std::string l1 = "src", l2 = "tgt";
  // two aligned files per split
  std::string train_l1, train_l2, dev_l1, dev_l2, test_l1, test_l2;
  std::string mono_l1, mono_l2;
  std::string in_domain_l1, in_domain_l2;  // optional; default = train sides
  std::string dev2_l1, dev2_l2;            // optional extra dev set (domain adaptation)

  std::size_t max_len = 80;
  std::size_t mono_min_exclusive = 9;
  bool truecase = true;
  bool do_normalize = true;

  std::size_t bpe_num_ops = 300;

  ModelConfig model;  // vocab filled in by the driver
  TrainConfig base_train;
  TrainConfig finetune_train;
  CyclePlan cycle;

  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "out";

  static ExperimentConfig load(const std::filesystem::path& file);
  void validate() const;  // referenced paths must exist
};

struct ExperimentResult {
  // rows: seed ("median" for aggregates), round, direction, bleu
  std::vector<std::string> score_table;
  std::vector<std::string> cost_table;
  std::map<std::string, std::string> artifact_hashes;  // file -> hex hash
  std::vector<CycleResult> per_seed;
};

// Full pipeline: preprocess, joint BPE + vocab, selection LMs, per-seed cycle,
// score/cost tables and hashed artifacts under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<std::string> sweep_table(const ExperimentConfig& cfg, const std::vector<int>& ks);

}  // namespace binmt

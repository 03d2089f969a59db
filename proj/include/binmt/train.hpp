#pragma once

#include "binmt/corpus.hpp"
#include "binmt/model.hpp"

namespace binmt {

struct AdamConfig {
  double lr = 0.0003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 64;
  std::size_t checkpoint_interval = 1000;
  std::size_t patience = 8;  // checkpoints without dev perplexity improvement
  std::uint64_t seed = 1;
  std::size_t max_updates = 100000;  // safety bound
  bool verbose = false;
};

struct Checkpoint {
  ModelParams params;
  std::size_t update_count = 0;
  double dev_perplexity = 0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<Checkpoint> history;
};

// Encodes a (possibly tagged) corpus against the vocabulary.
std::vector<std::pair<std::vector<int>, std::vector<int>>> encode_corpus(
    const Vocab& vocab, const ParallelCorpus& corpus);

double perplexity(const ModelConfig& cfg, const ModelParams& params, const ParallelCorpus& corpus);

// Adam on seeded-shuffled batches, snapshot every checkpoint_interval updates,
// early stop after `patience` consecutive non-improving checkpoints.
TrainResult train(ModelParams params, const ModelConfig& cfg, const ParallelCorpus& train_corpus,
                  const ParallelCorpus& dev_corpus, const TrainConfig& tc);

// Same loop, started from an existing checkpoint with fresh optimizer state.
// Throws if the checkpoint's shapes do not match the current vocabulary.
TrainResult continue_training(const Checkpoint& ckpt, const ModelConfig& cfg,
                              const ParallelCorpus& new_train, const ParallelCorpus& dev_corpus,
                              const TrainConfig& tc);

// Elementwise mean of the best `top_k` checkpoints by dev perplexity (all if
// fewer). Averaging identical checkpoints reproduces them bitwise.
ModelParams average_checkpoints(const std::vector<Checkpoint>& ckpts, std::size_t top_k = 4);

// Versioned text archive: named tensors, shapes, hexfloat values (exact
// round trip), config echo and vocabulary hash.
void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt,
                     const ModelConfig& cfg);
Checkpoint load_checkpoint(const std::filesystem::path& file, const ModelConfig& cfg);

std::uint64_t params_hash(const ModelParams& params);

}  // namespace binmt

#pragma once

#include <map>
#include <random>
#include <unordered_map>

#include "binmt/autodiff.hpp"
#include "binmt/common.hpp"

namespace binmt {

// Closed subword vocabulary (no unknown token); ids 0/1 are <s> and </s>.
struct Vocab {
  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, int> token_to_id;
  static constexpr int kBosId = 0;
  static constexpr int kEosId = 1;

  static Vocab build(const std::vector<Sentence>& corpus,
                     const std::vector<std::string>& extra_tokens = {});
  int size() const { return static_cast<int>(id_to_token.size()); }
  int id(const std::string& token) const;
  std::vector<int> encode(const Sentence& s) const;
  Sentence decode(const std::vector<int>& ids) const;
  std::uint64_t content_hash() const;

  void save(const std::filesystem::path& file) const;
  static Vocab load(const std::filesystem::path& file);
};

struct ModelConfig {
  int embed_dim = 32;
  int hidden_dim = 64;
  int attention_dim = 64;
  double dropout_p = 0.0;
  bool tie_source_target_embeddings = true;  // always on; single embedding table
  bool tie_output_embeddings = true;
  bool layer_norm = true;
  Vocab vocab;
};

// All trainable tensors, addressable by name. Tied tensors are represented by
// absence: with tie_output_embeddings there simply is no separate output
// projection, so every view of the embedding is the same storage by
// construction.
struct ModelParams {
  std::map<std::string, ad::Matrix> tensors;

  ModelParams& axpy(double a, const ModelParams& other);  // this += a * other
  bool same_shapes(const ModelParams& other) const;
};

ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed);

struct Batch {
  // id sequences without <s>/</s>; source carries the language tag token when
  // the recipe is tagged
  std::vector<std::vector<int>> src;
  std::vector<std::vector<int>> tgt;
};

struct ForwardInspect {
  std::vector<ad::Matrix> attention;  // per decoder step, B x src_len
  std::vector<ad::Matrix> output_probs;
};

struct ForwardResult {
  double loss = 0;   // mean per-token negative log likelihood
  long tokens = 0;   // target events including </s>
  std::map<std::string, ad::Matrix> grads;  // empty unless train_mode
};

// Bi-directional LSTM encoder, additive-attention LSTM decoder. Dropout is
// active only in train_mode (rng required then).
ForwardResult forward_loss(const ModelConfig& cfg, const ModelParams& params, const Batch& batch,
                           bool train_mode, std::mt19937_64* rng = nullptr,
                           ForwardInspect* inspect = nullptr);

struct Hypothesis {
  std::vector<int> tokens;  // target ids, without <s>/</s>
  double log_prob = 0;      // accumulated (unnormalized) log probability
  bool completed = false;
};

// Beam search; multiple models are combined by averaging per-step output
// probabilities. Final ranking uses length-normalized log probability.
Hypothesis beam_decode(const ModelConfig& cfg, const std::vector<const ModelParams*>& models,
                       const std::vector<int>& src, int beam = 5, double max_len_factor = 2.0,
                       int max_len_const = 10);

}  // namespace binmt

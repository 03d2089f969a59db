#include "binmt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

namespace binmt {

std::vector<std::pair<std::vector<int>, std::vector<int>>> encode_corpus(
    const Vocab& vocab, const ParallelCorpus& corpus) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus)
    out.emplace_back(vocab.encode(p.source), vocab.encode(p.target));
  return out;
}

double perplexity(const ModelConfig& cfg, const ModelParams& params,
                  const ParallelCorpus& corpus) {
  if (corpus.empty()) throw std::runtime_error("perplexity: empty corpus");
  auto encoded = encode_corpus(cfg.vocab, corpus);
  double nll_sum = 0;
  long tokens = 0;
  const std::size_t chunk = 64;
  for (std::size_t start = 0; start < encoded.size(); start += chunk) {
    Batch b;
    for (std::size_t i = start; i < std::min(encoded.size(), start + chunk); ++i) {
      b.src.push_back(encoded[i].first);
      b.tgt.push_back(encoded[i].second);
    }
    auto res = forward_loss(cfg, params, b, /*train_mode=*/false);
    nll_sum += res.loss * static_cast<double>(res.tokens);
    tokens += res.tokens;
  }
  return std::exp(nll_sum / static_cast<double>(tokens));
}

namespace {

class Adam {
 public:
  Adam(const AdamConfig& cfg, const ModelParams& params) : cfg_(cfg) {
    for (const auto& [name, t] : params.tensors) {
      m_[name] = ad::Matrix::Zero(t.rows(), t.cols());
      v_[name] = ad::Matrix::Zero(t.rows(), t.cols());
    }
  }

  void update(ModelParams& params, const std::map<std::string, ad::Matrix>& grads) {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (auto& [name, t] : params.tensors) {
      const ad::Matrix& grad = grads.at(name);
      ad::Matrix& m = m_[name];
      ad::Matrix& v = v_[name];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
      t.array() -= cfg_.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.eps);
    }
  }

 private:
  AdamConfig cfg_;
  std::map<std::string, ad::Matrix> m_, v_;
  long step_ = 0;
};

TrainResult train_loop(ModelParams params, const ModelConfig& cfg,
                       const ParallelCorpus& train_corpus, const ParallelCorpus& dev_corpus,
                       const TrainConfig& tc) {
  if (dev_corpus.empty()) throw std::runtime_error("train: empty dev corpus");
  if (train_corpus.empty()) throw std::runtime_error("train: empty training corpus");
  if (tc.patience < 1 || tc.checkpoint_interval < 1)
    throw std::runtime_error("train: patience and checkpoint_interval must be >= 1");
  auto encoded = encode_corpus(cfg.vocab, train_corpus);

  Adam adam(tc.adam, params);
  std::mt19937_64 shuffle_rng(tc.seed);
  std::mt19937_64 dropout_rng(tc.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  double best_ppl = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::size_t updates = 0;
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);

  bool stop = false;
  while (!stop) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size() && !stop; start += tc.batch_size) {
      Batch batch;
      for (std::size_t i = start; i < std::min(order.size(), start + tc.batch_size); ++i) {
        batch.src.push_back(encoded[order[i]].first);
        batch.tgt.push_back(encoded[order[i]].second);
      }
      ForwardResult fr;
      try {
        fr = forward_loss(cfg, params, batch, /*train_mode=*/true, &dropout_rng);
      } catch (const std::exception& e) {
        throw std::runtime_error("training aborted at update " + std::to_string(updates) + ": " +
                                 e.what());
      }
      adam.update(params, fr.grads);
      ++updates;

      if (updates % tc.checkpoint_interval == 0 || updates >= tc.max_updates) {
        Checkpoint ck;
        ck.params = params;
        ck.update_count = updates;
        ck.dev_perplexity = perplexity(cfg, params, dev_corpus);
        result.history.push_back(ck);
        if (tc.verbose)
          std::cerr << "checkpoint " << result.history.size() << " update " << updates
                    << " train_loss " << fr.loss << " dev_ppl " << ck.dev_perplexity << "\n";
        if (ck.dev_perplexity < best_ppl) {
          best_ppl = ck.dev_perplexity;
          result.best = ck;
          since_best = 0;
        } else {
          ++since_best;
        }
        if (since_best >= tc.patience || updates >= tc.max_updates) stop = true;
      }
    }
  }
  if (result.history.empty()) {
    // max_updates smaller than one checkpoint interval: snapshot the end state
    Checkpoint ck;
    ck.params = params;
    ck.update_count = updates;
    ck.dev_perplexity = perplexity(cfg, params, dev_corpus);
    result.history.push_back(ck);
    result.best = ck;
  }
  return result;
}

}  // namespace

TrainResult train(ModelParams params, const ModelConfig& cfg, const ParallelCorpus& train_corpus,
                  const ParallelCorpus& dev_corpus, const TrainConfig& tc) {
  return train_loop(std::move(params), cfg, train_corpus, dev_corpus, tc);
}

TrainResult continue_training(const Checkpoint& ckpt, const ModelConfig& cfg,
                              const ParallelCorpus& new_train, const ParallelCorpus& dev_corpus,
                              const TrainConfig& tc) {
  ModelParams expected = init_model(cfg, 0);
  if (!ckpt.params.same_shapes(expected))
    throw std::runtime_error(
        "checkpoint is incompatible with the current vocabulary; rebuild BPE/vocab with "
        "vocab-carry mode or retrain from scratch");
  return train_loop(ckpt.params, cfg, new_train, dev_corpus, tc);
}

ModelParams average_checkpoints(const std::vector<Checkpoint>& ckpts, std::size_t top_k) {
  if (ckpts.empty()) throw std::runtime_error("average_checkpoints: no checkpoints");
  std::vector<const Checkpoint*> sorted;
  for (const auto& c : ckpts) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(), [](const Checkpoint* a, const Checkpoint* b) {
    return a->dev_perplexity < b->dev_perplexity;
  });
  if (sorted.size() > top_k) sorted.resize(top_k);
  const double k = static_cast<double>(sorted.size());

  // mean as base + sum(deltas)/k so identical checkpoints average bitwise
  ModelParams out = sorted[0]->params;
  for (auto& [name, t] : out.tensors) {
    ad::Matrix delta = ad::Matrix::Zero(t.rows(), t.cols());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      auto it = sorted[i]->params.tensors.find(name);
      if (it == sorted[i]->params.tensors.end() || it->second.rows() != t.rows() ||
          it->second.cols() != t.cols())
        throw std::runtime_error("average_checkpoints: shape mismatch for " + name);
      delta += it->second - t;
    }
    t += delta / k;
  }
  return out;
}

std::uint64_t params_hash(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, t] : params.tensors) {
    h = fnv1a(name, h);
    h = fnv1a(std::string(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double)), h);
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt,
                     const ModelConfig& cfg) {
  std::ostringstream oss;
  char buf[64];
  oss << "binmt-checkpoint v1\n";
  oss << "update_count " << ckpt.update_count << "\n";
  std::snprintf(buf, sizeof(buf), "%a", ckpt.dev_perplexity);
  oss << "dev_perplexity " << buf << "\n";
  oss << "config embed=" << cfg.embed_dim << " hidden=" << cfg.hidden_dim
      << " attention=" << cfg.attention_dim << " dropout=" << cfg.dropout_p
      << " tie_output=" << cfg.tie_output_embeddings << " layer_norm=" << cfg.layer_norm
      << " vocab_size=" << cfg.vocab.size() << " vocab_hash=" << hash_hex(cfg.vocab.content_hash())
      << "\n";
  oss << "params_hash " << hash_hex(params_hash(ckpt.params)) << "\n";
  for (const auto& [name, t] : ckpt.params.tensors) {
    oss << "tensor " << name << " " << t.rows() << " " << t.cols() << " f64\n";
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%a", t(i, j));
        oss << (j ? " " : "") << buf;
      }
      oss << "\n";
    }
  }
  write_text_atomic(file, oss.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& file, const ModelConfig& cfg) {
  auto lines = read_lines(file);
  if (lines.empty() || lines[0] != "binmt-checkpoint v1")
    throw std::runtime_error("not a checkpoint file: " + file.string());
  Checkpoint ck;
  std::size_t i = 1;
  std::string recorded_vocab_hash;
  for (; i < lines.size(); ++i) {
    std::istringstream iss(lines[i]);
    std::string key;
    iss >> key;
    if (key == "update_count") {
      iss >> ck.update_count;
    } else if (key == "dev_perplexity") {
      std::string v;
      iss >> v;
      ck.dev_perplexity = std::strtod(v.c_str(), nullptr);
    } else if (key == "config") {
      std::string field;
      while (iss >> field)
        if (field.rfind("vocab_hash=", 0) == 0) recorded_vocab_hash = field.substr(11);
    } else if (key == "params_hash") {
      // informational
    } else if (key == "tensor") {
      break;
    } else {
      throw std::runtime_error("bad checkpoint line: " + lines[i]);
    }
  }
  if (!recorded_vocab_hash.empty() && recorded_vocab_hash != hash_hex(cfg.vocab.content_hash()))
    throw std::runtime_error(
        "checkpoint was built against a different vocabulary; rebuild BPE/vocab with vocab-carry "
        "mode or retrain from scratch");
  while (i < lines.size()) {
    std::istringstream iss(lines[i]);
    std::string key, name, dtype;
    Eigen::Index rows, cols;
    iss >> key >> name >> rows >> cols >> dtype;
    if (key != "tensor" || dtype != "f64")
      throw std::runtime_error("bad tensor header: " + lines[i]);
    ad::Matrix t(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      ++i;
      std::istringstream row(lines.at(i));
      std::string v;
      for (Eigen::Index c = 0; c < cols; ++c) {
        row >> v;
        t(r, c) = std::strtod(v.c_str(), nullptr);
      }
    }
    ck.params.tensors.emplace(name, std::move(t));
    ++i;
  }
  return ck;
}

}  // namespace binmt

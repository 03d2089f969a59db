#include <doctest.h>

#include <filesystem>

#include "binmt/train.hpp"
#include "test_util.hpp"

using namespace binmt;
using testutil::tiny_config;

namespace {

ParallelCorpus copy_corpus(const ModelConfig& cfg, int n, std::uint64_t seed) {
  // trivial copy task: target equals source
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(2, cfg.vocab.size() - 1);
  std::uniform_int_distribution<int> len(2, 5);
  ParallelCorpus c;
  for (int i = 0; i < n; ++i) {
    Sentence s;
    int L = len(rng);
    for (int j = 0; j < L; ++j) s.tokens.push_back(cfg.vocab.id_to_token[tok(rng)]);
    TaggedPair p;
    p.source = s;
    p.target = s;
    p.src_lang = "a";
    p.tgt_lang = "b";
    c.push_back(p);
  }
  return c;
}

}  // namespace

TEST_CASE("training reduces dev perplexity and records checkpoints") {
  ModelConfig cfg = tiny_config(5, 8, 8, 8);
  ParallelCorpus corpus = copy_corpus(cfg, 64, 1);
  ParallelCorpus dev = copy_corpus(cfg, 16, 2);
  TrainConfig tc;
  tc.adam.lr = 0.01;
  tc.batch_size = 16;
  tc.checkpoint_interval = 20;
  tc.max_updates = 80;
  tc.seed = 3;
  double ppl0 = perplexity(cfg, init_model(cfg, tc.seed), dev);
  TrainResult tr = train(init_model(cfg, tc.seed), cfg, corpus, dev, tc);
  CHECK(tr.history.size() == 4);
  CHECK(tr.best.dev_perplexity < ppl0);
  for (std::size_t i = 0; i + 1 < tr.history.size(); ++i)
    CHECK(tr.history[i].update_count < tr.history[i + 1].update_count);
  // best is the minimum over history
  for (const auto& c : tr.history) CHECK(tr.best.dev_perplexity <= c.dev_perplexity);
}

TEST_CASE("training is deterministic in the seed") {
  ModelConfig cfg = tiny_config(4);
  ParallelCorpus corpus = copy_corpus(cfg, 32, 5);
  ParallelCorpus dev = copy_corpus(cfg, 8, 6);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.checkpoint_interval = 10;
  tc.max_updates = 20;
  tc.seed = 11;
  TrainResult a = train(init_model(cfg, tc.seed), cfg, corpus, dev, tc);
  TrainResult b = train(init_model(cfg, tc.seed), cfg, corpus, dev, tc);
  CHECK(params_hash(a.best.params) == params_hash(b.best.params));
  tc.seed = 12;
  TrainResult c = train(init_model(cfg, tc.seed), cfg, corpus, dev, tc);
  CHECK(params_hash(a.best.params) != params_hash(c.best.params));
}

TEST_CASE("checkpoint files round-trip bitwise") {
  ModelConfig cfg = tiny_config(4);
  Checkpoint ck;
  ck.params = init_model(cfg, 17);
  ck.update_count = 123;
  ck.dev_perplexity = 4.5678901234567;
  auto tmp = std::filesystem::temp_directory_path() / "ckpt_test.txt";
  save_checkpoint(tmp, ck, cfg);
  Checkpoint rt = load_checkpoint(tmp, cfg);
  CHECK(rt.update_count == ck.update_count);
  CHECK(rt.dev_perplexity == ck.dev_perplexity);  // exact, hexfloat storage
  CHECK(params_hash(rt.params) == params_hash(ck.params));
  std::filesystem::remove(tmp);
}

TEST_CASE("checkpoints refuse a mismatched vocabulary") {
  ModelConfig cfg = tiny_config(4);
  Checkpoint ck;
  ck.params = init_model(cfg, 19);
  auto tmp = std::filesystem::temp_directory_path() / "ckpt_vocab_test.txt";
  save_checkpoint(tmp, ck, cfg);
  ModelConfig other = tiny_config(4, 4, 6, 5, {"<2xx>"});  // different vocab, same shapes? no
  CHECK_THROWS(load_checkpoint(tmp, other));
  std::filesystem::remove(tmp);
}

TEST_CASE("averaging identical checkpoints is a bitwise no-op") {
  ModelConfig cfg = tiny_config(4);
  Checkpoint ck;
  ck.params = init_model(cfg, 23);
  ck.dev_perplexity = 2.0;
  ModelParams avg = average_checkpoints({ck, ck, ck}, 3);
  CHECK(params_hash(avg) == params_hash(ck.params));
}

TEST_CASE("averaging keeps the best checkpoints by dev perplexity") {
  ModelConfig cfg = tiny_config(4);
  Checkpoint good, bad;
  good.params = init_model(cfg, 29);
  good.dev_perplexity = 1.0;
  bad.params = init_model(cfg, 31);
  bad.dev_perplexity = 100.0;
  // top_k = 1 must pick `good` exactly
  ModelParams avg = average_checkpoints({bad, good}, 1);
  CHECK(params_hash(avg) == params_hash(good.params));
}

TEST_CASE("continue_training rejects shape-incompatible checkpoints") {
  ModelConfig cfg = tiny_config(4);
  ModelConfig bigger = tiny_config(6);
  Checkpoint ck;
  ck.params = init_model(bigger, 37);
  ParallelCorpus corpus = copy_corpus(cfg, 8, 7);
  TrainConfig tc;
  tc.max_updates = 1;
  tc.checkpoint_interval = 1;
  CHECK_THROWS(continue_training(ck, cfg, corpus, corpus, tc));
}

TEST_CASE("continue_training resumes and improves on the new data") {
  ModelConfig cfg = tiny_config(5, 8, 8, 8);
  ParallelCorpus corpus = copy_corpus(cfg, 64, 8);
  ParallelCorpus dev = copy_corpus(cfg, 16, 9);
  TrainConfig tc;
  tc.adam.lr = 0.01;
  tc.batch_size = 16;
  tc.checkpoint_interval = 16;
  tc.max_updates = 48;
  tc.seed = 41;
  TrainResult first = train(init_model(cfg, tc.seed), cfg, corpus, dev, tc);
  TrainResult second = continue_training(first.best, cfg, corpus, dev, tc);
  CHECK(second.best.dev_perplexity <= first.best.dev_perplexity * 1.05);
  CHECK(!second.history.empty());
}

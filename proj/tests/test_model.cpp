#include <doctest.h>

#include "binmt/train.hpp"
#include "test_util.hpp"

using namespace binmt;
using testutil::random_batch;
using testutil::tiny_config;

TEST_CASE("vocabulary is closed: unknown tokens are an error") {
  ModelConfig cfg = tiny_config();
  CHECK(cfg.vocab.id("w0") >= 2);
  CHECK_THROWS(cfg.vocab.id("nope"));
  CHECK_THROWS(cfg.vocab.encode(Sentence({"w0", "nope"})));
  Sentence rt = cfg.vocab.decode(cfg.vocab.encode(Sentence({"w2", "w0"})));
  CHECK(rt.tokens == std::vector<std::string>{"w2", "w0"});
}

TEST_CASE("vocabulary file round trip preserves ids and hash") {
  Vocab v = testutil::tiny_vocab(5, {"<2en>"});
  auto tmp = std::filesystem::temp_directory_path() / "vocab_test.txt";
  v.save(tmp);
  Vocab w = Vocab::load(tmp);
  CHECK(w.id_to_token == v.id_to_token);
  CHECK(w.content_hash() == v.content_hash());
  std::filesystem::remove(tmp);
}

TEST_CASE("initialization is deterministic in the seed") {
  ModelConfig cfg = tiny_config();
  ModelParams a = init_model(cfg, 7), b = init_model(cfg, 7), c = init_model(cfg, 8);
  CHECK(params_hash(a) == params_hash(b));
  CHECK(params_hash(a) != params_hash(c));
  // tied output: no separate projection tensor exists
  CHECK(a.tensors.count("out_proj") == 0);
  ModelConfig untied = cfg;
  untied.tie_output_embeddings = false;
  CHECK(init_model(untied, 7).tensors.count("out_proj") == 1);
}

TEST_CASE("attention weights are a distribution over real source positions") {
  ModelConfig cfg = tiny_config(4);
  ModelParams params = init_model(cfg, 3);
  Batch batch = random_batch(cfg, 5, 7, 13);  // ragged lengths force padding
  ForwardInspect inspect;
  ForwardResult res = forward_loss(cfg, params, batch, false, nullptr, &inspect);
  CHECK(std::isfinite(res.loss));
  REQUIRE(!inspect.attention.empty());
  for (const auto& alpha : inspect.attention) {
    for (Eigen::Index b = 0; b < alpha.rows(); ++b) {
      CHECK(alpha.row(b).sum() == doctest::Approx(1.0).epsilon(1e-9));
      // padded positions get (numerically) zero mass
      for (std::size_t j = batch.src[static_cast<std::size_t>(b)].size();
           j < static_cast<std::size_t>(alpha.cols()); ++j)
        CHECK(alpha(b, static_cast<Eigen::Index>(j)) < 1e-12);
    }
  }
  for (const auto& probs : inspect.output_probs)
    for (Eigen::Index b = 0; b < probs.rows(); ++b)
      CHECK(probs.row(b).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("evaluation forward is deterministic; dropout training is rng-driven") {
  ModelConfig cfg = tiny_config();
  cfg.dropout_p = 0.3;
  ModelParams params = init_model(cfg, 5);
  Batch batch = random_batch(cfg, 4, 5, 17);
  double e1 = forward_loss(cfg, params, batch, false).loss;
  double e2 = forward_loss(cfg, params, batch, false).loss;
  CHECK(e1 == e2);
  std::mt19937_64 r1(9), r2(9), r3(10);
  double t1 = forward_loss(cfg, params, batch, true, &r1).loss;
  double t2 = forward_loss(cfg, params, batch, true, &r2).loss;
  double t3 = forward_loss(cfg, params, batch, true, &r3).loss;
  CHECK(t1 == t2);
  CHECK(t1 != t3);
}

TEST_CASE("batched loss equals the token-weighted mean of per-sentence losses") {
  ModelConfig cfg = tiny_config(4);
  ModelParams params = init_model(cfg, 21);
  Batch batch = random_batch(cfg, 6, 6, 23);
  ForwardResult whole = forward_loss(cfg, params, batch, false);
  double nll_sum = 0;
  long tok_sum = 0;
  for (std::size_t i = 0; i < batch.src.size(); ++i) {
    Batch one;
    one.src = {batch.src[i]};
    one.tgt = {batch.tgt[i]};
    ForwardResult r = forward_loss(cfg, params, one, false);
    nll_sum += r.loss * static_cast<double>(r.tokens);
    tok_sum += r.tokens;
  }
  CHECK(whole.tokens == tok_sum);
  CHECK(whole.loss ==
        doctest::Approx(nll_sum / static_cast<double>(tok_sum)).epsilon(1e-9));
}

TEST_CASE("beam search basics: deterministic, never emits <s>, respects max length") {
  ModelConfig cfg = tiny_config(4);
  ModelParams params = init_model(cfg, 41);
  std::vector<int> src = {2, 3, 4};
  Hypothesis h1 = beam_decode(cfg, {&params}, src, 5);
  Hypothesis h2 = beam_decode(cfg, {&params}, src, 5);
  CHECK(h1.tokens == h2.tokens);
  for (int id : h1.tokens) CHECK(id != Vocab::kBosId);
  CHECK(h1.tokens.size() <= 2 * src.size() + 10);
}

TEST_CASE("ensemble of identical models equals the single model") {
  ModelConfig cfg = tiny_config(5);
  ModelParams params = init_model(cfg, 43);
  for (std::uint64_t seed : {1, 2, 3}) {
    Batch b = random_batch(cfg, 1, 6, seed);
    Hypothesis one = beam_decode(cfg, {&params}, b.src[0], 5);
    Hypothesis three = beam_decode(cfg, {&params, &params, &params}, b.src[0], 5);
    CHECK(one.tokens == three.tokens);
  }
}

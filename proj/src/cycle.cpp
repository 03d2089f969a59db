#include "binmt/cycle.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <thread>

#include "binmt/bleu.hpp"

namespace binmt {

std::size_t CostReport::total() const {
  std::size_t t = 0;
  for (const auto& [name, n] : stages) t += n;
  return t;
}

std::vector<std::string> CostReport::to_tsv() const {
  std::vector<std::string> lines;
  lines.push_back("stage\tcheckpoints");
  for (const auto& [name, n] : stages) lines.push_back(name + "\t" + std::to_string(n));
  lines.push_back("TOTAL\t" + std::to_string(total()));
  return lines;
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Model output may end in a continuation joiner; treat the fragment as a word
// instead of rejecting the whole hypothesis.
Sentence merge_bpe_lenient(Sentence s) {
  if (!s.tokens.empty()) {
    std::string& last = s.tokens.back();
    if (last.size() >= 2 && last.compare(last.size() - 2, 2, "@@") == 0)
      last.erase(last.size() - 2);
  }
  return merge_bpe(s);
}

}  // namespace

std::vector<Sentence> translate_corpus(const ModelConfig& cfg,
                                       const std::vector<const ModelParams*>& models,
                                       const std::vector<Sentence>& sources,
                                       const std::string& tgt_lang, int beam, int threads) {
  std::vector<Sentence> out(sources.size());
  parallel_for(sources.size(), threads, [&](std::size_t i) {
    auto tagged = tag_source(sources[i], tgt_lang);
    auto hyp = beam_decode(cfg, models, cfg.vocab.encode(tagged), beam);
    out[i] = cfg.vocab.decode(hyp.tokens);
    out[i].lang = tgt_lang;
  });
  return out;
}

ParallelCorpus back_translate(const ModelConfig& cfg,
                              const std::vector<const ModelParams*>& models,
                              const std::vector<Sentence>& mono, const std::string& syn_lang,
                              const std::string& real_lang, int beam, int threads) {
  std::vector<TaggedPair> slots(mono.size());
  std::vector<char> ok(mono.size(), 0);
  parallel_for(mono.size(), threads, [&](std::size_t i) {
    try {
      auto tagged = tag_source(mono[i], syn_lang);
      auto hyp = beam_decode(cfg, models, cfg.vocab.encode(tagged), beam);
      if (hyp.tokens.empty()) throw std::runtime_error("empty hypothesis");
      TaggedPair p;
      p.source = cfg.vocab.decode(hyp.tokens);
      p.source.lang = syn_lang;
      p.target = mono[i];
      p.provenance = Provenance::synthetic_source;
      p.src_lang = syn_lang;
      p.tgt_lang = real_lang;
      slots[i] = std::move(p);
      ok[i] = 1;
    } catch (const std::exception& e) {
      std::cerr << "back_translate: skipping sentence " << i << ": " << e.what() << "\n";
    }
  });
  ParallelCorpus out;
  out.reserve(mono.size());
  for (std::size_t i = 0; i < mono.size(); ++i)
    if (ok[i]) out.push_back(std::move(slots[i]));
  return out;
}

RoundScores evaluate_both_directions(const ModelConfig& cfg,
                                     const std::vector<const ModelParams*>& models,
                                     const ParallelCorpus& test, const std::string& l1,
                                     const std::string& l2, int beam, int threads, int round) {
  std::vector<Sentence> src_l1, src_l2;
  std::vector<std::string> ref_l1, ref_l2;
  for (const auto& p : test) {
    src_l1.push_back(p.source);
    src_l2.push_back(p.target);
    ref_l1.push_back(join_tokens(merge_bpe(p.source).tokens));
    ref_l2.push_back(join_tokens(merge_bpe(p.target).tokens));
  }
  auto to_l2 = translate_corpus(cfg, models, src_l1, l2, beam, threads);
  auto to_l1 = translate_corpus(cfg, models, src_l2, l1, beam, threads);
  std::vector<std::string> hyp_l2, hyp_l1;
  for (const auto& s : to_l2) hyp_l2.push_back(join_tokens(merge_bpe_lenient(s).tokens));
  for (const auto& s : to_l1) hyp_l1.push_back(join_tokens(merge_bpe_lenient(s).tokens));
  RoundScores rs;
  rs.round = round;
  rs.bleu_l1_to_l2 = bleu(hyp_l2, ref_l2).bleu;
  rs.bleu_l2_to_l1 = bleu(hyp_l1, ref_l1).bleu;
  return rs;
}

namespace {

struct SelectedMono {
  std::vector<Sentence> l1, l2;  // fixed for all rounds of a plan
};

std::vector<Sentence> select_pool(const std::vector<Sentence>& pool,
                                  const std::vector<Sentence>& seed, std::size_t count,
                                  std::size_t order, double eps) {
  NgramLm lm_in = train_lm(seed, order, {}, eps);
  NgramLm lm_out = train_lm(pool, order, {}, eps, &lm_in.vocab());
  auto scored = select(pool, lm_in, lm_out, count);
  std::vector<Sentence> out;
  out.reserve(scored.size());
  for (auto& s : scored) out.push_back(std::move(s.sentence));
  return out;
}

SelectedMono select_mono(const CyclePlan& plan, const CycleData& data) {
  SelectedMono sel;
  std::size_t want = static_cast<std::size_t>(plan.k) * data.real.size();
  if (want > data.mono_l1.size() || want > data.mono_l2.size())
    throw std::runtime_error("selection needs " + std::to_string(want) +
                             " sentences per pool; pools have " +
                             std::to_string(data.mono_l1.size()) + " / " +
                             std::to_string(data.mono_l2.size()));
  sel.l1 = select_pool(data.mono_l1, data.in_domain_l1, want, plan.lm_order, plan.lm_eps);
  sel.l2 = select_pool(data.mono_l2, data.in_domain_l2, want, plan.lm_order, plan.lm_eps);
  return sel;
}

// the artifact used both for evaluation and for re-decoding
ModelParams decode_artifact(const CyclePlan& plan, const TrainResult& tr) {
  if (plan.decode_avg_top_k > 0) return average_checkpoints(tr.history, plan.decode_avg_top_k);
  return tr.best.params;
}

CycleResult run_cycle_from(const CyclePlan& plan, const CycleData& data, const ModelConfig& cfg,
                           const TrainConfig& base_tc, const TrainConfig& finetune_tc,
                           const TrainResult* shared_base) {
  if (plan.rounds < 0) throw std::runtime_error("run_cycle: rounds must be >= 0");
  DataRecipe base = preset_recipe(plan.base_recipe);
  DataRecipe augment = preset_recipe(plan.augment_recipe);
  CycleResult result;

  TrainResult round_tr;
  try {
    if (shared_base) {
      round_tr = *shared_base;
    } else {
      auto corpus0 = build_recipe(base, data.real, {}, {});
      round_tr = train(init_model(cfg, base_tc.seed), cfg, corpus0, build_recipe(base, data.dev, {}, {}),
                       base_tc);
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("cycle stage train round 0: " + std::string(e.what()));
  }
  result.cost.stages.emplace_back("round0-train-" + plan.base_recipe, round_tr.history.size());
  ModelParams artifact = decode_artifact(plan, round_tr);
  result.round_best.push_back(round_tr.best);
  result.scores.push_back(evaluate_both_directions(cfg, {&artifact}, data.test, data.l1, data.l2,
                                                   plan.beam, plan.threads, 0));

  SelectedMono sel;
  if (plan.rounds > 0) sel = select_mono(plan, data);

  for (int round = 1; round <= plan.rounds; ++round) {
    try {
      // re-decode the same selected monolingual data with the latest model
      auto syn_l1 = back_translate(cfg, {&artifact}, sel.l2, data.l1, data.l2, plan.beam,
                                   plan.threads);
      auto syn_l2 = back_translate(cfg, {&artifact}, sel.l1, data.l2, data.l1, plan.beam,
                                   plan.threads);
      auto corpus = build_recipe(augment, data.real, syn_l1, syn_l2);
      auto dev = build_recipe(preset_recipe("B-1"), data.dev, {}, {});
      result.synthetic_l1.push_back(syn_l1);
      result.synthetic_l2.push_back(syn_l2);
      round_tr = continue_training(round_tr.best, cfg, corpus, dev, finetune_tc);
    } catch (const std::exception& e) {
      throw std::runtime_error("cycle stage round " + std::to_string(round) + ": " + e.what());
    }
    result.cost.stages.emplace_back(
        "round" + std::to_string(round) + "-finetune-" + plan.augment_recipe,
        round_tr.history.size());
    artifact = decode_artifact(plan, round_tr);
    result.round_best.push_back(round_tr.best);
    result.scores.push_back(evaluate_both_directions(cfg, {&artifact}, data.test, data.l1,
                                                     data.l2, plan.beam, plan.threads, round));
  }
  return result;
}

}  // namespace

CycleResult run_cycle(const CyclePlan& plan, const CycleData& data, const ModelConfig& cfg,
                      const TrainConfig& base_tc, const TrainConfig& finetune_tc) {
  return run_cycle_from(plan, data, cfg, base_tc, finetune_tc, nullptr);
}

std::vector<SweepRow> sweep_k(const CyclePlan& plan, const CycleData& data,
                              const ModelConfig& cfg, const TrainConfig& base_tc,
                              const TrainConfig& finetune_tc, const std::vector<int>& k_values) {
  // the round-0 baseline does not depend on k; train it once
  DataRecipe base = preset_recipe(plan.base_recipe);
  auto corpus0 = build_recipe(base, data.real, {}, {});
  TrainResult base_tr = train(init_model(cfg, base_tc.seed), cfg, corpus0,
                              build_recipe(base, data.dev, {}, {}), base_tc);
  std::vector<SweepRow> rows;
  for (int k : k_values) {
    std::size_t want = static_cast<std::size_t>(k) * data.real.size();
    if (k < 1 || want > data.mono_l1.size() || want > data.mono_l2.size()) {
      std::cerr << "sweep_k: k=" << k << " infeasible for pools, skipping\n";
      for (const auto& dir : {data.l1 + ">" + data.l2, data.l2 + ">" + data.l1})
        rows.push_back({k, dir, 0.0, false});
      continue;
    }
    CyclePlan p = plan;
    p.k = k;
    auto res = run_cycle_from(p, data, cfg, base_tc, finetune_tc, &base_tr);
    const RoundScores& last = res.scores.back();
    rows.push_back({k, data.l1 + ">" + data.l2, last.bleu_l1_to_l2, true});
    rows.push_back({k, data.l2 + ">" + data.l1, last.bleu_l2_to_l1, true});
  }
  return rows;
}

}  // namespace binmt

// binmt: config-driven front end for the bi-directional NMT toolkit.
// Every subcommand maps onto one library operation; data goes to files,
// logs go to stderr, and all outputs are written atomically.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "binmt/bleu.hpp"
#include "binmt/experiment.hpp"
#include "binmt/toy.hpp"

using namespace binmt;

namespace {

struct ModelFlags {
  int embed_dim = 32, hidden_dim = 64, attention_dim = 64;
  double dropout = 0.0;
  bool no_layer_norm = false, no_tie_output = false;
  std::string vocab_file;

  void attach(CLI::App* app, bool vocab_required = true) {
    app->add_option("--embed-dim", embed_dim);
    app->add_option("--hidden-dim", hidden_dim);
    app->add_option("--attention-dim", attention_dim);
    app->add_option("--dropout", dropout);
    app->add_flag("--no-layer-norm", no_layer_norm);
    app->add_flag("--no-tie-output", no_tie_output);
    auto* v = app->add_option("--vocab", vocab_file, "vocabulary file");
    if (vocab_required) v->required();
  }
  ModelConfig build() const {
    ModelConfig cfg;
    cfg.embed_dim = embed_dim;
    cfg.hidden_dim = hidden_dim;
    cfg.attention_dim = attention_dim;
    cfg.dropout_p = dropout;
    cfg.layer_norm = !no_layer_norm;
    cfg.tie_output_embeddings = !no_tie_output;
    cfg.vocab = Vocab::load(vocab_file);
    return cfg;
  }
};

struct TrainFlags {
  TrainConfig tc;
  void attach(CLI::App* app) {
    app->add_option("--lr", tc.adam.lr);
    app->add_option("--batch-size", tc.batch_size);
    app->add_option("--checkpoint-interval", tc.checkpoint_interval);
    app->add_option("--patience", tc.patience);
    app->add_option("--seed", tc.seed);
    app->add_option("--max-updates", tc.max_updates);
    app->add_flag("--verbose", tc.verbose);
  }
};

std::vector<const ModelParams*> as_ptrs(const std::vector<ModelParams>& ms) {
  std::vector<const ModelParams*> p;
  for (const auto& m : ms) p.push_back(&m);
  return p;
}

void save_history(const std::string& dir, const TrainResult& tr, const ModelConfig& cfg) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < tr.history.size(); ++i)
    save_checkpoint(std::filesystem::path(dir) / ("ckpt_" + std::to_string(i) + ".txt"),
                    tr.history[i], cfg);
}

int run(int argc, char** argv) {
  CLI::App app{"bi-directional NMT toolkit"};
  app.require_subcommand(1);

  // ---- preprocess ----
  auto* pre = app.add_subcommand("preprocess", "normalize, tokenize, truecase, filter");
  std::string p_in, p_in2, p_lang, p_lang2, p_out, p_out2, p_tc_model;
  bool p_no_norm = false, p_learn_tc = false, p_mono = false;
  std::size_t p_max_len = 80, p_mono_min = 9;
  pre->add_option("--input", p_in)->required();
  pre->add_option("--input2", p_in2, "second side of a parallel corpus");
  pre->add_option("--lang", p_lang)->required();
  pre->add_option("--lang2", p_lang2);
  pre->add_option("--output", p_out)->required();
  pre->add_option("--output2", p_out2);
  pre->add_option("--truecase-model", p_tc_model);
  pre->add_flag("--learn-truecase", p_learn_tc, "learn the truecase model from this input");
  pre->add_flag("--no-normalize", p_no_norm);
  pre->add_flag("--mono", p_mono, "apply the monolingual length filter");
  pre->add_option("--max-len", p_max_len);
  pre->add_option("--mono-min", p_mono_min, "keep sentences strictly longer than this");
  pre->callback([&] {
    auto load = [&](const std::string& file, const std::string& lang) {
      std::vector<Sentence> out;
      for (const auto& line : read_lines(file))
        out.push_back(tokenize(p_no_norm ? line : normalize(line), lang));
      return out;
    };
    auto a = load(p_in, p_lang);
    std::optional<TruecaseModel> tc;
    if (p_learn_tc) {
      tc = learn_truecaser(a);
      if (!p_tc_model.empty()) tc->save(p_tc_model);
    } else if (!p_tc_model.empty()) {
      tc = TruecaseModel::load(p_tc_model);
    }
    if (tc)
      for (auto& s : a) s = apply_truecase(*tc, s);
    if (!p_in2.empty()) {
      auto b = load(p_in2, p_lang2.empty() ? p_lang : p_lang2);
      if (tc)
        for (auto& s : b) s = apply_truecase(*tc, s);
      if (a.size() != b.size()) throw std::runtime_error("parallel inputs are not aligned");
      std::vector<std::pair<Sentence, Sentence>> pairs;
      for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
      pairs = filter_parallel(pairs, p_max_len);
      std::vector<Sentence> fa, fb;
      for (auto& p : pairs) {
        fa.push_back(p.first);
        fb.push_back(p.second);
      }
      write_sentences_atomic(p_out, fa);
      if (p_out2.empty()) throw std::runtime_error("--output2 required with --input2");
      write_sentences_atomic(p_out2, fb);
    } else {
      if (p_mono) a = filter_mono(a, p_mono_min);
      write_sentences_atomic(p_out, a);
    }
  });

  // ---- learn-bpe ----
  auto* lbpe = app.add_subcommand("learn-bpe", "learn joint BPE merges");
  std::vector<std::string> lb_inputs, lb_protect;
  std::size_t lb_ops = 300;
  std::string lb_out;
  lbpe->add_option("--input", lb_inputs)->required();
  lbpe->add_option("--num-ops", lb_ops);
  lbpe->add_option("--protect", lb_protect, "tokens that must never be split");
  lbpe->add_option("--output", lb_out)->required();
  lbpe->callback([&] {
    std::vector<Sentence> corpus;
    for (const auto& f : lb_inputs)
      for (auto& s : read_sentences(f, "")) corpus.push_back(std::move(s));
    BpeModel m = learn_bpe(corpus, lb_ops);
    m.protected_tokens.insert(lb_protect.begin(), lb_protect.end());
    m.save(lb_out);
  });

  // ---- apply-bpe ----
  auto* abpe = app.add_subcommand("apply-bpe", "segment (or --merge: unsegment) a corpus");
  std::string ab_model, ab_in, ab_out;
  std::vector<std::string> ab_check;
  bool ab_merge = false, ab_force = false;
  abpe->add_option("--model", ab_model);
  abpe->add_option("--input", ab_in)->required();
  abpe->add_option("--output", ab_out)->required();
  abpe->add_option("--check-data", ab_check,
                   "verify the model was learned on exactly these files");
  abpe->add_flag("--merge", ab_merge, "invert segmentation instead of applying it");
  abpe->add_flag("--force", ab_force, "apply even if --check-data hashes mismatch");
  abpe->callback([&] {
    auto sents = read_sentences(ab_in, "");
    if (ab_merge) {
      for (auto& s : sents) s = merge_bpe(s);
      write_sentences_atomic(ab_out, sents);
      return;
    }
    if (ab_model.empty()) throw std::runtime_error("--model is required unless --merge");
    BpeModel m = BpeModel::load(ab_model);
    if (!ab_check.empty()) {
      std::vector<std::string> lines;
      for (const auto& f : ab_check)
        for (auto& l : read_lines(f)) lines.push_back(std::move(l));
      if (hash_lines(lines) != m.data_hash && !ab_force)
        throw std::runtime_error(
            "BPE model is stale: training data hash mismatch (relearn, or pass --force)");
    }
    write_sentences_atomic(ab_out, apply_bpe(m, sents));
  });

  // ---- train-lm ----
  auto* tlm = app.add_subcommand("train-lm", "train an interpolated n-gram LM");
  std::string tl_in, tl_out, tl_restrict;
  std::size_t tl_order = 3;
  double tl_eps = 1e-6;
  tlm->add_option("--input", tl_in)->required();
  tlm->add_option("--order", tl_order);
  tlm->add_option("--eps", tl_eps);
  tlm->add_option("--restrict-vocab", tl_restrict,
                  "LM file whose vocabulary caps this model's vocabulary");
  tlm->add_option("--output", tl_out)->required();
  tlm->callback([&] {
    auto corpus = read_sentences(tl_in, "");
    if (tl_restrict.empty()) {
      train_lm(corpus, tl_order, {}, tl_eps).save(tl_out);
    } else {
      NgramLm ref = NgramLm::load(tl_restrict);
      train_lm(corpus, tl_order, {}, tl_eps, &ref.vocab()).save(tl_out);
    }
  });

  // ---- select ----
  auto* sel = app.add_subcommand("select", "cross-entropy-difference data selection");
  std::string se_pool, se_seed, se_out, se_scores;
  std::size_t se_count = 0, se_order = 3;
  double se_eps = 1e-6;
  sel->add_option("--pool", se_pool)->required();
  sel->add_option("--seed-corpus", se_seed, "in-domain seed corpus")->required();
  sel->add_option("--count", se_count)->required();
  sel->add_option("--order", se_order);
  sel->add_option("--eps", se_eps);
  sel->add_option("--output", se_out)->required();
  sel->add_option("--scores", se_scores, "optional TSV of (score, h_in, h_out) per kept line");
  sel->callback([&] {
    auto pool = read_sentences(se_pool, "");
    auto seeds = read_sentences(se_seed, "");
    NgramLm lm_in = train_lm(seeds, se_order, {}, se_eps);
    NgramLm lm_out = train_lm(pool, se_order, {}, se_eps, &lm_in.vocab());
    auto chosen = select(pool, lm_in, lm_out, se_count);
    std::vector<Sentence> kept;
    std::vector<std::string> score_lines = {"score\th_in\th_out\tsentence"};
    for (const auto& s : chosen) {
      kept.push_back(s.sentence);
      score_lines.push_back(std::to_string(s.score) + "\t" + std::to_string(s.h_in) + "\t" +
                            std::to_string(s.h_out) + "\t" + join_tokens(s.sentence.tokens));
    }
    write_sentences_atomic(se_out, kept);
    if (!se_scores.empty()) write_lines_atomic(se_scores, score_lines);
  });

  // ---- build-corpus ----
  auto* bc = app.add_subcommand("build-corpus", "compose a training corpus from a recipe");
  std::string bc_recipe = "B-1", bc_real, bc_syn1, bc_syn2, bc_out;
  std::vector<std::string> bc_over;
  bc->add_option("--recipe", bc_recipe, "preset (U-1..U-4, B-1..B-6)");
  bc->add_option("--real", bc_real, "real corpus TSV")->required();
  bc->add_option("--syn-l1", bc_syn1, "(L1*, L2) synthetic pool TSV");
  bc->add_option("--syn-l2", bc_syn2, "(L2*, L1) synthetic pool TSV");
  bc->add_option("--oversample", bc_over, "component=factor, e.g. 'L1>L2=2'");
  bc->add_option("--output", bc_out)->required();
  bc->callback([&] {
    DataRecipe recipe = preset_recipe(bc_recipe);
    ParallelCorpus real = load_corpus(bc_real);
    ParallelCorpus s1 = bc_syn1.empty() ? ParallelCorpus{} : load_corpus(bc_syn1);
    ParallelCorpus s2 = bc_syn2.empty() ? ParallelCorpus{} : load_corpus(bc_syn2);
    std::map<Component, std::size_t> factors;
    for (const auto& spec : bc_over) {
      auto eq = spec.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad --oversample " + spec);
      factors[component_from_string(spec.substr(0, eq))] = std::stoul(spec.substr(eq + 1));
    }
    save_corpus(bc_out, build_recipe(recipe, real, s1, s2, factors));
  });

  // ---- train / finetune ----
  auto add_train_cmd = [&](const char* name, const char* help, bool is_finetune) {
    auto* cmd = app.add_subcommand(name, help);
    auto mf = std::make_shared<ModelFlags>();
    auto tf = std::make_shared<TrainFlags>();
    auto paths = std::make_shared<std::vector<std::string>>(5);
    mf->attach(cmd);
    tf->attach(cmd);
    cmd->add_option("--train", (*paths)[0], "training corpus TSV")->required();
    cmd->add_option("--dev", (*paths)[1], "dev corpus TSV")->required();
    cmd->add_option("--output", (*paths)[2], "best-checkpoint file")->required();
    cmd->add_option("--history-dir", (*paths)[3], "save every checkpoint here");
    if (is_finetune) cmd->add_option("--from", (*paths)[4], "starting checkpoint")->required();
    cmd->callback([=] {
      ModelConfig cfg = mf->build();
      ParallelCorpus tr = load_corpus((*paths)[0]);
      ParallelCorpus dev = load_corpus((*paths)[1]);
      TrainResult res;
      if (is_finetune) {
        Checkpoint from = load_checkpoint((*paths)[4], cfg);
        res = continue_training(from, cfg, tr, dev, tf->tc);
      } else {
        res = train(init_model(cfg, tf->tc.seed), cfg, tr, dev, tf->tc);
      }
      save_checkpoint((*paths)[2], res.best, cfg);
      if (!(*paths)[3].empty()) save_history((*paths)[3], res, cfg);
      std::cerr << name << ": best dev perplexity " << res.best.dev_perplexity << " at update "
                << res.best.update_count << " (" << res.history.size() << " checkpoints)\n";
    });
  };
  add_train_cmd("train", "train a model from scratch", false);
  add_train_cmd("finetune", "continue training from a checkpoint on new data", true);

  // ---- avg-checkpoints ----
  auto* avg = app.add_subcommand("avg-checkpoints", "elementwise mean of the best checkpoints");
  ModelFlags avg_mf;
  std::vector<std::string> avg_in;
  std::string avg_out;
  std::size_t avg_k = 4;
  avg_mf.attach(avg);
  avg->add_option("--input", avg_in)->required();
  avg->add_option("--top-k", avg_k);
  avg->add_option("--output", avg_out)->required();
  avg->callback([&] {
    ModelConfig cfg = avg_mf.build();
    std::vector<Checkpoint> ckpts;
    for (const auto& f : avg_in) ckpts.push_back(load_checkpoint(f, cfg));
    Checkpoint out;
    out.params = average_checkpoints(ckpts, avg_k);
    for (const auto& c : ckpts) out.update_count = std::max(out.update_count, c.update_count);
    save_checkpoint(avg_out, out, cfg);
  });

  // ---- translate ----
  auto* tr = app.add_subcommand("translate", "beam-decode a file (ensemble if several models)");
  ModelFlags tr_mf;
  std::vector<std::string> tr_models;
  std::string tr_in, tr_out, tr_to, tr_lang;
  int tr_beam = 5, tr_threads = 1;
  bool tr_merge = false;
  tr_mf.attach(tr);
  tr->add_option("--model", tr_models)->required();
  tr->add_option("--input", tr_in)->required();
  tr->add_option("--lang", tr_lang, "source language id");
  tr->add_option("--to", tr_to, "target language tag")->required();
  tr->add_option("--beam", tr_beam);
  tr->add_option("--threads", tr_threads);
  tr->add_flag("--merge-bpe", tr_merge, "undo BPE on the output");
  tr->add_option("--output", tr_out)->required();
  tr->callback([&] {
    ModelConfig cfg = tr_mf.build();
    std::vector<ModelParams> models;
    for (const auto& f : tr_models) models.push_back(load_checkpoint(f, cfg).params);
    auto srcs = read_sentences(tr_in, tr_lang);
    auto hyps = translate_corpus(cfg, as_ptrs(models), srcs, tr_to, tr_beam, tr_threads);
    if (tr_merge)
      for (auto& h : hyps) h = merge_bpe(h);
    write_sentences_atomic(tr_out, hyps);
  });

  // ---- backtranslate ----
  auto* bt = app.add_subcommand("backtranslate", "build a synthetic-source corpus from mono data");
  ModelFlags bt_mf;
  std::vector<std::string> bt_models;
  std::string bt_mono, bt_out, bt_syn_lang, bt_real_lang;
  int bt_beam = 5, bt_threads = 1;
  bt_mf.attach(bt);
  bt->add_option("--model", bt_models)->required();
  bt->add_option("--mono", bt_mono, "monolingual input (the real target side)")->required();
  bt->add_option("--syn-lang", bt_syn_lang, "language to translate into")->required();
  bt->add_option("--real-lang", bt_real_lang, "language of the mono input")->required();
  bt->add_option("--beam", bt_beam);
  bt->add_option("--threads", bt_threads);
  bt->add_option("--output", bt_out, "synthetic corpus TSV")->required();
  bt->callback([&] {
    ModelConfig cfg = bt_mf.build();
    std::vector<ModelParams> models;
    for (const auto& f : bt_models) models.push_back(load_checkpoint(f, cfg).params);
    auto mono = read_sentences(bt_mono, bt_real_lang);
    save_corpus(bt_out, back_translate(cfg, as_ptrs(models), mono, bt_syn_lang, bt_real_lang,
                                       bt_beam, bt_threads));
  });

  // ---- evaluate ----
  auto* ev = app.add_subcommand("evaluate", "corpus BLEU of hypothesis vs reference");
  std::string ev_hyp, ev_ref, ev_tsv;
  bool ev_cased = false;
  ev->add_option("--hyp", ev_hyp)->required();
  ev->add_option("--ref", ev_ref)->required();
  ev->add_flag("--cased", ev_cased, "case-sensitive scoring");
  ev->add_option("--tsv", ev_tsv, "machine-readable score output");
  ev->callback([&] {
    BleuScore s = bleu(read_lines(ev_hyp), read_lines(ev_ref), !ev_cased);
    std::cout << s.report() << "\n";
    if (!ev_tsv.empty()) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%zu\t%zu", s.bleu,
                    s.precisions[0], s.precisions[1], s.precisions[2], s.precisions[3],
                    s.brevity_penalty, s.hyp_len, s.ref_len);
      write_lines_atomic(ev_tsv, {"bleu\tp1\tp2\tp3\tp4\tbp\thyp_len\tref_len", buf});
    }
  });

  // ---- run-experiment ----
  auto* rex = app.add_subcommand("run-experiment", "full pipeline from a JSON config");
  std::string rex_cfg, rex_outdir;
  int rex_threads = 0;
  rex->add_option("--config", rex_cfg)->required();
  rex->add_option("--output-dir", rex_outdir, "override the config's output_dir");
  rex->add_option("--threads", rex_threads);
  rex->callback([&] {
    ExperimentConfig cfg = ExperimentConfig::load(rex_cfg);
    if (!rex_outdir.empty()) cfg.output_dir = rex_outdir;
    if (rex_threads > 0) cfg.cycle.threads = rex_threads;
    ExperimentResult res = run_experiment(cfg);
    for (const auto& line : res.score_table) std::cout << line << "\n";
  });

  // ---- sweep-k ----
  auto* swk = app.add_subcommand("sweep-k", "monolingual-size sweep from a JSON config");
  std::string swk_cfg, swk_out;
  std::vector<int> swk_ks = {1, 2, 4};
  int swk_threads = 0;
  swk->add_option("--config", swk_cfg)->required();
  swk->add_option("--k", swk_ks);
  swk->add_option("--output", swk_out, "write the table here as well");
  swk->add_option("--threads", swk_threads);
  swk->callback([&] {
    ExperimentConfig cfg = ExperimentConfig::load(swk_cfg);
    if (swk_threads > 0) cfg.cycle.threads = swk_threads;
    auto table = sweep_table(cfg, swk_ks);
    for (const auto& line : table) std::cout << line << "\n";
    if (!swk_out.empty()) write_lines_atomic(swk_out, table);
  });

  // ---- make-toy ----
  auto* toy = app.add_subcommand("make-toy", "generate the synthetic toy language pair");
  ToyConfig toy_cfg;
  std::string toy_dir = "toy";
  toy->add_option("--dir", toy_dir);
  toy->add_option("--vocab-size", toy_cfg.vocab_size);
  toy->add_option("--n-real", toy_cfg.n_real);
  toy->add_option("--n-dev", toy_cfg.n_dev);
  toy->add_option("--n-test", toy_cfg.n_test);
  toy->add_option("--n-mono", toy_cfg.n_mono);
  toy->add_option("--seed", toy_cfg.seed);
  toy->add_option("--l1", toy_cfg.l1);
  toy->add_option("--l2", toy_cfg.l2);
  toy->callback([&] { write_toy(make_toy(toy_cfg), toy_dir, toy_cfg); });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "binmt/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "binmt/subword.hpp"

namespace binmt {

namespace {

using nlohmann::json;

std::string expand_env(const std::string& path) {
  std::string out = path;
  std::size_t pos;
  while ((pos = out.find("${")) != std::string::npos) {
    auto end = out.find('}', pos);
    if (end == std::string::npos) throw std::runtime_error("unterminated ${ in path: " + path);
    std::string var = out.substr(pos + 2, end - pos - 2);
    const char* val = std::getenv(var.c_str());
    out = out.substr(0, pos) + (val ? val : "") + out.substr(end + 1);
  }
  return out;
}

void read_train_cfg(const json& j, TrainConfig& tc) {
  if (j.contains("lr")) tc.adam.lr = j["lr"].get<double>();
  if (j.contains("beta1")) tc.adam.beta1 = j["beta1"].get<double>();
  if (j.contains("beta2")) tc.adam.beta2 = j["beta2"].get<double>();
  if (j.contains("adam_eps")) tc.adam.eps = j["adam_eps"].get<double>();
  if (j.contains("batch_size")) tc.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("checkpoint_interval"))
    tc.checkpoint_interval = j["checkpoint_interval"].get<std::size_t>();
  if (j.contains("patience")) tc.patience = j["patience"].get<std::size_t>();
  if (j.contains("max_updates")) tc.max_updates = j["max_updates"].get<std::size_t>();
  if (j.contains("verbose")) tc.verbose = j["verbose"].get<bool>();
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  json j;
  in >> j;
  ExperimentConfig cfg;
  cfg.l1 = j.value("l1", cfg.l1);
  cfg.l2 = j.value("l2", cfg.l2);
  const json& d = j.at("data");
  auto path = [&](const char* key, std::string def = "") {
    return d.contains(key) ? expand_env(d[key].get<std::string>()) : def;
  };
  cfg.train_l1 = path("train_l1");
  cfg.train_l2 = path("train_l2");
  cfg.dev_l1 = path("dev_l1");
  cfg.dev_l2 = path("dev_l2");
  cfg.test_l1 = path("test_l1");
  cfg.test_l2 = path("test_l2");
  cfg.mono_l1 = path("mono_l1");
  cfg.mono_l2 = path("mono_l2");
  cfg.in_domain_l1 = path("in_domain_l1");
  cfg.in_domain_l2 = path("in_domain_l2");
  cfg.dev2_l1 = path("dev2_l1");
  cfg.dev2_l2 = path("dev2_l2");
  if (j.contains("preprocess")) {
    const json& p = j["preprocess"];
    cfg.max_len = p.value("max_len", cfg.max_len);
    cfg.mono_min_exclusive = p.value("mono_min_exclusive", cfg.mono_min_exclusive);
    cfg.truecase = p.value("truecase", cfg.truecase);
    cfg.do_normalize = p.value("normalize", cfg.do_normalize);
  }
  if (j.contains("bpe")) cfg.bpe_num_ops = j["bpe"].value("num_ops", cfg.bpe_num_ops);
  if (j.contains("model")) {
    const json& m = j["model"];
    cfg.model.embed_dim = m.value("embed_dim", cfg.model.embed_dim);
    cfg.model.hidden_dim = m.value("hidden_dim", cfg.model.hidden_dim);
    cfg.model.attention_dim = m.value("attention_dim", cfg.model.attention_dim);
    cfg.model.dropout_p = m.value("dropout", cfg.model.dropout_p);
    cfg.model.tie_output_embeddings = m.value("tie_output", cfg.model.tie_output_embeddings);
    cfg.model.layer_norm = m.value("layer_norm", cfg.model.layer_norm);
  }
  if (j.contains("train")) read_train_cfg(j["train"], cfg.base_train);
  cfg.finetune_train = cfg.base_train;
  if (j.contains("finetune")) read_train_cfg(j["finetune"], cfg.finetune_train);
  if (j.contains("cycle")) {
    const json& c = j["cycle"];
    cfg.cycle.base_recipe = c.value("base_recipe", cfg.cycle.base_recipe);
    cfg.cycle.augment_recipe = c.value("augment_recipe", cfg.cycle.augment_recipe);
    cfg.cycle.rounds = c.value("rounds", cfg.cycle.rounds);
    cfg.cycle.k = c.value("k", cfg.cycle.k);
    cfg.cycle.beam = c.value("beam", cfg.cycle.beam);
    cfg.cycle.lm_order = c.value("lm_order", cfg.cycle.lm_order);
    cfg.cycle.lm_eps = c.value("lm_eps", cfg.cycle.lm_eps);
    cfg.cycle.decode_avg_top_k = c.value("decode_avg_top_k", cfg.cycle.decode_avg_top_k);
  }
  if (j.contains("threads")) cfg.cycle.threads = j["threads"].get<int>();
  if (j.contains("seeds")) {
    cfg.seeds.clear();
    for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
  } else if (j.contains("seed")) {
    // one global seed expanded into per-seed streams seed, seed+1, ...
    std::uint64_t base = j["seed"].get<std::uint64_t>();
    std::size_t n = j.value("num_seeds", 1);
    cfg.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(base + i);
  }
  cfg.output_dir = expand_env(j.value("output_dir", cfg.output_dir));
  return cfg;
}

void ExperimentConfig::validate() const {
  std::vector<std::pair<std::string, std::string>> required = {
      {"train_l1", train_l1}, {"train_l2", train_l2}, {"dev_l1", dev_l1},
      {"dev_l2", dev_l2},     {"test_l1", test_l1},   {"test_l2", test_l2},
      {"mono_l1", mono_l1},   {"mono_l2", mono_l2},
  };
  for (const auto& [key, p] : required) {
    if (p.empty()) throw std::runtime_error("config: data." + key + " is required");
    if (!std::filesystem::exists(p))
      throw std::runtime_error("config: data." + key + " path does not exist: " + p);
  }
  for (const auto& p : {in_domain_l1, in_domain_l2, dev2_l1, dev2_l2})
    if (!p.empty() && !std::filesystem::exists(p))
      throw std::runtime_error("config: path does not exist: " + p);
  if (seeds.empty()) throw std::runtime_error("config: at least one seed required");
}

namespace {

struct Prepared {
  CycleData data;
  ModelConfig model_cfg;
  BpeModel bpe;
};

std::vector<Sentence> preprocess_lines(const std::vector<std::string>& lines,
                                       const std::string& lang, bool do_normalize) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(tokenize(do_normalize ? normalize(lines[i]) : lines[i], lang));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

Prepared prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  auto load_side = [&](const std::string& file, const std::string& lang) {
    return preprocess_lines(read_lines(file), lang, cfg.do_normalize);
  };
  auto l1_train = load_side(cfg.train_l1, cfg.l1);
  auto l2_train = load_side(cfg.train_l2, cfg.l2);
  if (l1_train.size() != l2_train.size())
    throw std::runtime_error("training sides are not aligned");

  std::optional<TruecaseModel> tc_l1, tc_l2;
  if (cfg.truecase) {
    tc_l1 = learn_truecaser(l1_train);
    tc_l2 = learn_truecaser(l2_train);
  }
  auto apply_tc = [&](std::vector<Sentence>& sents, const std::optional<TruecaseModel>& tc) {
    if (!tc) return;
    for (auto& s : sents) s = apply_truecase(*tc, s);
  };
  apply_tc(l1_train, tc_l1);
  apply_tc(l2_train, tc_l2);

  auto load_pair_split = [&](const std::string& f1, const std::string& f2) {
    auto a = load_side(f1, cfg.l1);
    auto b = load_side(f2, cfg.l2);
    if (a.size() != b.size()) throw std::runtime_error("unaligned split: " + f1);
    apply_tc(a, tc_l1);
    apply_tc(b, tc_l2);
    std::vector<std::pair<Sentence, Sentence>> pairs;
    for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
    return pairs;
  };

  std::vector<std::pair<Sentence, Sentence>> train_pairs;
  for (std::size_t i = 0; i < l1_train.size(); ++i)
    train_pairs.emplace_back(l1_train[i], l2_train[i]);
  train_pairs = filter_parallel(train_pairs, cfg.max_len);
  auto dev_pairs = filter_parallel(load_pair_split(cfg.dev_l1, cfg.dev_l2), cfg.max_len);
  auto test_pairs = load_pair_split(cfg.test_l1, cfg.test_l2);
  if (!cfg.dev2_l1.empty()) {
    auto dev2 = filter_parallel(load_pair_split(cfg.dev2_l1, cfg.dev2_l2), cfg.max_len);
    dev_pairs.insert(dev_pairs.end(), dev2.begin(), dev2.end());
  }

  auto mono_l1 = load_side(cfg.mono_l1, cfg.l1);
  auto mono_l2 = load_side(cfg.mono_l2, cfg.l2);
  apply_tc(mono_l1, tc_l1);
  apply_tc(mono_l2, tc_l2);
  mono_l1 = filter_mono(mono_l1, cfg.mono_min_exclusive);
  mono_l2 = filter_mono(mono_l2, cfg.mono_min_exclusive);

  std::vector<Sentence> seed_l1, seed_l2;
  if (!cfg.in_domain_l1.empty()) {
    seed_l1 = load_side(cfg.in_domain_l1, cfg.l1);
    apply_tc(seed_l1, tc_l1);
  } else {
    for (const auto& p : train_pairs) seed_l1.push_back(p.first);
  }
  if (!cfg.in_domain_l2.empty()) {
    seed_l2 = load_side(cfg.in_domain_l2, cfg.l2);
    apply_tc(seed_l2, tc_l2);
  } else {
    for (const auto& p : train_pairs) seed_l2.push_back(p.second);
  }

  // joint BPE over both training sides; tags never get split
  std::vector<Sentence> joint;
  for (const auto& p : train_pairs) {
    joint.push_back(p.first);
    joint.push_back(p.second);
  }
  BpeModel bpe = learn_bpe(joint, cfg.bpe_num_ops);
  bpe.protected_tokens = {render_tag(cfg.l1), render_tag(cfg.l2)};

  Prepared prep;
  prep.bpe = bpe;
  auto seg_pairs = [&](const std::vector<std::pair<Sentence, Sentence>>& pairs) {
    ParallelCorpus out;
    for (const auto& p : pairs) {
      TaggedPair tp;
      tp.source = apply_bpe(bpe, p.first);
      tp.target = apply_bpe(bpe, p.second);
      tp.src_lang = cfg.l1;
      tp.tgt_lang = cfg.l2;
      tp.provenance = Provenance::real;
      out.push_back(std::move(tp));
    }
    return out;
  };
  prep.data.real = seg_pairs(train_pairs);
  prep.data.dev = seg_pairs(dev_pairs);
  prep.data.test = seg_pairs(test_pairs);
  prep.data.mono_l1 = apply_bpe(bpe, mono_l1);
  prep.data.mono_l2 = apply_bpe(bpe, mono_l2);
  prep.data.in_domain_l1 = apply_bpe(bpe, seed_l1);
  prep.data.in_domain_l2 = apply_bpe(bpe, seed_l2);
  prep.data.l1 = cfg.l1;
  prep.data.l2 = cfg.l2;

  std::vector<Sentence> vocab_corpus;
  for (const auto& p : prep.data.real) {
    vocab_corpus.push_back(p.source);
    vocab_corpus.push_back(p.target);
  }
  prep.model_cfg = cfg.model;
  prep.model_cfg.vocab =
      Vocab::build(vocab_corpus, {render_tag(cfg.l1), render_tag(cfg.l2)});
  return prep;
}

std::string fmt_bleu(double b) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", b);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Prepared prep = prepare(cfg);
  std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  ExperimentResult result;
  result.score_table.push_back("seed\tround\tdirection\tbleu");

  std::map<std::pair<int, std::string>, std::vector<double>> by_round_dir;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig base_tc = cfg.base_train;
    base_tc.seed = seed;
    TrainConfig ft_tc = cfg.finetune_train;
    ft_tc.seed = seed;
    CycleResult cr = run_cycle(cfg.cycle, prep.data, prep.model_cfg, base_tc, ft_tc);
    for (const auto& rs : cr.scores) {
      std::string d12 = cfg.l1 + ">" + cfg.l2, d21 = cfg.l2 + ">" + cfg.l1;
      result.score_table.push_back(std::to_string(seed) + "\t" + std::to_string(rs.round) +
                                   "\t" + d12 + "\t" + fmt_bleu(rs.bleu_l1_to_l2));
      result.score_table.push_back(std::to_string(seed) + "\t" + std::to_string(rs.round) +
                                   "\t" + d21 + "\t" + fmt_bleu(rs.bleu_l2_to_l1));
      by_round_dir[{rs.round, d12}].push_back(rs.bleu_l1_to_l2);
      by_round_dir[{rs.round, d21}].push_back(rs.bleu_l2_to_l1);
    }
    for (const auto& [stage, n] : cr.cost.stages)
      result.cost_table.push_back("seed" + std::to_string(seed) + "\t" + stage + "\t" +
                                  std::to_string(n));
    // artifacts: best checkpoint per round, synthetic corpora per round
    for (std::size_t r = 0; r < cr.round_best.size(); ++r) {
      auto file = out_dir / ("ckpt_seed" + std::to_string(seed) + "_round" + std::to_string(r) +
                             ".txt");
      save_checkpoint(file, cr.round_best[r], prep.model_cfg);
    }
    for (std::size_t r = 0; r < cr.synthetic_l1.size(); ++r) {
      save_corpus(out_dir / ("syn_l1_seed" + std::to_string(seed) + "_round" +
                             std::to_string(r + 1) + ".tsv"),
                  cr.synthetic_l1[r]);
      save_corpus(out_dir / ("syn_l2_seed" + std::to_string(seed) + "_round" +
                             std::to_string(r + 1) + ".tsv"),
                  cr.synthetic_l2[r]);
    }
    result.per_seed.push_back(std::move(cr));
  }
  for (const auto& [key, vals] : by_round_dir)
    result.score_table.push_back("median\t" + std::to_string(key.first) + "\t" + key.second +
                                 "\t" + fmt_bleu(median(vals)));

  prep.bpe.save(out_dir / "bpe.model");
  prep.model_cfg.vocab.save(out_dir / "vocab.txt");
  write_lines_atomic(out_dir / "scores.tsv", result.score_table);
  {
    std::vector<std::string> cost_lines = {"seed_stage\tstage\tcheckpoints"};
    cost_lines.insert(cost_lines.end(), result.cost_table.begin(), result.cost_table.end());
    write_lines_atomic(out_dir / "cost_report.tsv", cost_lines);
  }

  // fingerprint every artifact for reproducibility checks
  std::vector<std::string> hash_lines_out;
  for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name == "hashes.tsv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    result.artifact_hashes[name] = hash_hex(fnv1a(ss.str()));
  }
  for (const auto& [name, h] : result.artifact_hashes)
    hash_lines_out.push_back(name + "\t" + h);
  write_lines_atomic(out_dir / "hashes.tsv", hash_lines_out);
  for (const auto& l : hash_lines_out) std::cerr << "artifact " << l << "\n";
  return result;
}

std::vector<std::string> sweep_table(const ExperimentConfig& cfg, const std::vector<int>& ks) {
  Prepared prep = prepare(cfg);
  std::vector<std::string> table = {"seed\tk\tdirection\tbleu\tfeasible"};
  std::map<std::pair<int, std::string>, std::vector<double>> agg;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig base_tc = cfg.base_train;
    base_tc.seed = seed;
    TrainConfig ft_tc = cfg.finetune_train;
    ft_tc.seed = seed;
    auto rows = sweep_k(cfg.cycle, prep.data, prep.model_cfg, base_tc, ft_tc, ks);
    for (const auto& r : rows) {
      table.push_back(std::to_string(seed) + "\t" + std::to_string(r.k) + "\t" + r.direction +
                      "\t" + (r.feasible ? fmt_bleu(r.bleu) : std::string("-")) + "\t" +
                      (r.feasible ? "yes" : "no"));
      if (r.feasible) agg[{r.k, r.direction}].push_back(r.bleu);
    }
  }
  for (const auto& [key, vals] : agg)
    table.push_back("median\t" + std::to_string(key.first) + "\t" + key.second + "\t" +
                    fmt_bleu(median(vals)) + "\tyes");
  return table;
}

}  // namespace binmt

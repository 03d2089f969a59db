#include "binmt/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace binmt {

using ad::Graph;
using ad::Matrix;
using ad::Var;

// ---------------------------------------------------------------------------
// Vocab

Vocab Vocab::build(const std::vector<Sentence>& corpus, const std::vector<std::string>& extra) {
  Vocab v;
  v.id_to_token = {"<s>", "</s>"};
  auto add = [&](const std::string& t) {
    if (!v.token_to_id.count(t)) {
      v.token_to_id[t] = static_cast<int>(v.id_to_token.size());
      v.id_to_token.push_back(t);
    }
  };
  v.token_to_id["<s>"] = kBosId;
  v.token_to_id["</s>"] = kEosId;
  for (const auto& t : extra) add(t);
  for (const auto& s : corpus)
    for (const auto& t : s.tokens) add(t);
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = token_to_id.find(token);
  if (it == token_to_id.end())
    throw std::runtime_error("token outside vocabulary: '" + token +
                             "' (vocabulary is closed after BPE)");
  return it->second;
}

std::vector<int> Vocab::encode(const Sentence& s) const {
  std::vector<int> ids;
  ids.reserve(s.size());
  for (const auto& t : s.tokens) ids.push_back(id(t));
  return ids;
}

Sentence Vocab::decode(const std::vector<int>& ids) const {
  Sentence s;
  for (int i : ids) {
    if (i < 0 || i >= size()) throw std::runtime_error("id out of range: " + std::to_string(i));
    s.tokens.push_back(id_to_token[i]);
  }
  return s;
}

std::uint64_t Vocab::content_hash() const { return hash_lines(id_to_token); }

void Vocab::save(const std::filesystem::path& file) const {
  write_lines_atomic(file, id_to_token);
}

Vocab Vocab::load(const std::filesystem::path& file) {
  Vocab v;
  v.id_to_token = read_lines(file);
  while (!v.id_to_token.empty() && v.id_to_token.back().empty()) v.id_to_token.pop_back();
  if (v.id_to_token.size() < 2 || v.id_to_token[0] != "<s>" || v.id_to_token[1] != "</s>")
    throw std::runtime_error("bad vocab file " + file.string());
  for (std::size_t i = 0; i < v.id_to_token.size(); ++i)
    v.token_to_id[v.id_to_token[i]] = static_cast<int>(i);
  return v;
}

// ---------------------------------------------------------------------------
// Parameter initialization

ModelParams& ModelParams::axpy(double a, const ModelParams& other) {
  for (auto& [name, t] : tensors) {
    auto it = other.tensors.find(name);
    if (it == other.tensors.end() || it->second.rows() != t.rows() ||
        it->second.cols() != t.cols())
      throw std::runtime_error("parameter shape mismatch for " + name);
    t += a * it->second;
  }
  return *this;
}

bool ModelParams::same_shapes(const ModelParams& other) const {
  if (tensors.size() != other.tensors.size()) return false;
  for (const auto& [name, t] : tensors) {
    auto it = other.tensors.find(name);
    if (it == other.tensors.end() || it->second.rows() != t.rows() ||
        it->second.cols() != t.cols())
      return false;
  }
  return true;
}

namespace {

struct Shapes {
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> list;
  void add(const std::string& n, Eigen::Index r, Eigen::Index c) { list.push_back({n, {r, c}}); }
};

Shapes param_shapes(const ModelConfig& cfg) {
  const Eigen::Index e = cfg.embed_dim, h = cfg.hidden_dim, a = cfg.attention_dim;
  const Eigen::Index V = cfg.vocab.size();
  Shapes s;
  s.add("embedding", V, e);
  s.add("out_bias", 1, V);
  if (!cfg.tie_output_embeddings) s.add("out_proj", V, e);
  auto lstm = [&](const std::string& p, Eigen::Index in) {
    s.add(p + ".Wx", in, 4 * h);
    s.add(p + ".Wh", h, 4 * h);
    if (cfg.layer_norm) {
      s.add(p + ".ln_g", 1, 4 * h);
      s.add(p + ".ln_b", 1, 4 * h);
    } else {
      s.add(p + ".b", 1, 4 * h);
    }
  };
  lstm("enc_fw", e);
  lstm("enc_bw", e);
  lstm("dec", e + 2 * h);
  s.add("att.We", 2 * h, a);
  s.add("att.Wd", h, a);
  s.add("att.b", 1, a);
  s.add("att.v", a, 1);
  s.add("init.Wh", 2 * h, h);
  s.add("init.bh", 1, h);
  s.add("init.Wc", 2 * h, h);
  s.add("init.bc", 1, h);
  s.add("readout.W", h + 2 * h + e, e);
  s.add("readout.b", 1, e);
  return s;
}

bool is_bias_like(const std::string& name) {
  return name == "out_bias" || name.ends_with(".b") || name.ends_with(".bh") ||
         name.ends_with(".bc") || name.ends_with(".ln_b");
}

}  // namespace

ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.vocab.size() < 3) throw std::runtime_error("init_model: vocabulary is empty");
  if (!cfg.tie_source_target_embeddings)
    throw std::runtime_error("source/target embeddings are always tied");
  std::mt19937_64 rng(seed);
  ModelParams params;
  for (const auto& [name, shape] : param_shapes(cfg).list) {
    auto [r, c] = shape;
    Matrix m(r, c);
    if (is_bias_like(name)) {
      m.setZero();
    } else if (name.ends_with(".ln_g")) {
      m.setOnes();
    } else {
      // scaled-uniform (Glorot) init
      double bound = std::sqrt(6.0 / static_cast<double>(r + c));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    }
    params.tensors.emplace(name, std::move(m));
  }
  return params;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

class ParamLeaves {
 public:
  ParamLeaves(Graph& g, const ModelParams& params, bool requires_grad)
      : g_(g), params_(params), requires_grad_(requires_grad) {}

  Var operator()(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    auto pit = params_.tensors.find(name);
    if (pit == params_.tensors.end())
      throw std::runtime_error("missing parameter tensor: " + name);
    Var v = g_.leaf(pit->second, requires_grad_);
    cache_.emplace(name, v);
    return v;
  }

  void collect_grads(std::map<std::string, Matrix>& out) const {
    for (const auto& [name, t] : params_.tensors) {
      auto it = cache_.find(name);
      if (it != cache_.end() && it->second->grad.size() != 0)
        out[name] = it->second->grad;
      else
        out[name] = Matrix::Zero(t.rows(), t.cols());
    }
  }

 private:
  Graph& g_;
  const ModelParams& params_;
  bool requires_grad_;
  std::map<std::string, Var> cache_;
};

struct LstmCell {
  Var Wx, Wh, b, ln_g, ln_b;
  bool layer_norm = false;
  Eigen::Index h = 0;

  static LstmCell fetch(ParamLeaves& P, const std::string& prefix, bool ln, Eigen::Index h) {
    LstmCell c;
    c.layer_norm = ln;
    c.h = h;
    c.Wx = P(prefix + ".Wx");
    c.Wh = P(prefix + ".Wh");
    if (ln) {
      c.ln_g = P(prefix + ".ln_g");
      c.ln_b = P(prefix + ".ln_b");
    } else {
      c.b = P(prefix + ".b");
    }
    return c;
  }

  std::pair<Var, Var> step(Graph& g, const Var& x, const Var& hprev, const Var& cprev) const {
    Var pre = ad::add(g, ad::matmul(g, x, Wx), ad::matmul(g, hprev, Wh));
    pre = layer_norm ? ad::layer_norm_rows(g, pre, ln_g, ln_b) : ad::add_rowwise(g, pre, b);
    Var i = ad::sigmoid_v(g, ad::slice_cols(g, pre, 0, h));
    Var f = ad::sigmoid_v(g, ad::slice_cols(g, pre, h, h));
    Var o = ad::sigmoid_v(g, ad::slice_cols(g, pre, 2 * h, h));
    Var u = ad::tanh_v(g, ad::slice_cols(g, pre, 3 * h, h));
    Var cnew = ad::add(g, ad::cmul(g, f, cprev), ad::cmul(g, i, u));
    Var hnew = ad::cmul(g, o, ad::tanh_v(g, cnew));
    return {hnew, cnew};
  }
};

Var dropout_var(Graph& g, const Var& x, double p, bool train_mode, std::mt19937_64* rng) {
  if (!train_mode || p <= 0) return x;
  if (!rng) throw std::runtime_error("dropout requires an rng in train mode");
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask(x->val.rows(), x->val.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      mask(i, j) = keep(*rng) ? 1.0 / (1.0 - p) : 0.0;
  return ad::cmul(g, x, g.leaf(std::move(mask), false));
}

// state <- update where mask row is 1, previous state elsewhere
Var masked_state(Graph& g, const Var& updated, const Var& prev, const Var& mask_m,
                 const Var& inv_mask_m) {
  return ad::add(g, ad::cmul(g, updated, mask_m), ad::cmul(g, prev, inv_mask_m));
}

}  // namespace

ForwardResult forward_loss(const ModelConfig& cfg, const ModelParams& params, const Batch& batch,
                           bool train_mode, std::mt19937_64* rng, ForwardInspect* inspect) {
  if (batch.src.empty() || batch.src.size() != batch.tgt.size())
    throw std::runtime_error("forward_loss: batch is empty or misaligned");
  const Eigen::Index B = static_cast<Eigen::Index>(batch.src.size());
  const Eigen::Index h = cfg.hidden_dim;
  const int V = cfg.vocab.size();
  std::size_t Ls = 0, max_tgt = 0;
  for (const auto& s : batch.src) {
    if (s.empty()) throw std::runtime_error("forward_loss: empty source sentence");
    Ls = std::max(Ls, s.size());
  }
  for (const auto& t : batch.tgt) max_tgt = std::max(max_tgt, t.size());
  const std::size_t Lt = max_tgt + 1;  // target events include </s>
  for (const auto& s : batch.src)
    for (int id : s)
      if (id < 0 || id >= V) throw std::runtime_error("source id outside vocabulary");
  for (const auto& t : batch.tgt)
    for (int id : t)
      if (id < 0 || id >= V) throw std::runtime_error("target id outside vocabulary");

  Graph g;
  ParamLeaves P(g, params, train_mode);
  Var E = P("embedding");
  const LstmCell enc_fw = LstmCell::fetch(P, "enc_fw", cfg.layer_norm, h);
  const LstmCell enc_bw = LstmCell::fetch(P, "enc_bw", cfg.layer_norm, h);
  const LstmCell dec = LstmCell::fetch(P, "dec", cfg.layer_norm, h);

  // source masks
  std::vector<std::vector<int>> src_ids(Ls, std::vector<int>(B, Vocab::kBosId));
  Matrix att_mask = Matrix::Zero(B, static_cast<Eigen::Index>(Ls));
  std::vector<Var> mask_h(Ls), inv_mask_h(Ls);
  for (std::size_t j = 0; j < Ls; ++j) {
    Matrix mh = Matrix::Zero(B, h), imh = Matrix::Ones(B, h);
    for (Eigen::Index b = 0; b < B; ++b) {
      if (j < batch.src[b].size()) {
        src_ids[j][b] = batch.src[b][j];
        mh.row(b).setOnes();
        imh.row(b).setZero();
      } else {
        att_mask(b, static_cast<Eigen::Index>(j)) = -1e30;
      }
    }
    mask_h[j] = g.leaf(std::move(mh), false);
    inv_mask_h[j] = g.leaf(std::move(imh), false);
  }

  // source embeddings (shared by both encoder directions)
  std::vector<Var> src_emb(Ls);
  for (std::size_t j = 0; j < Ls; ++j)
    src_emb[j] = dropout_var(g, ad::gather_rows(g, E, src_ids[j]), cfg.dropout_p, train_mode, rng);

  Var zero_h = g.leaf(Matrix::Zero(B, h), false);
  std::vector<Var> fw(Ls), bw(Ls);
  {
    Var hs = zero_h, cs = zero_h;
    for (std::size_t j = 0; j < Ls; ++j) {
      auto [h2, c2] = enc_fw.step(g, src_emb[j], hs, cs);
      hs = masked_state(g, h2, hs, mask_h[j], inv_mask_h[j]);
      cs = masked_state(g, c2, cs, mask_h[j], inv_mask_h[j]);
      fw[j] = hs;
    }
  }
  {
    Var hs = zero_h, cs = zero_h;
    for (std::size_t jj = Ls; jj-- > 0;) {
      auto [h2, c2] = enc_bw.step(g, src_emb[jj], hs, cs);
      hs = masked_state(g, h2, hs, mask_h[jj], inv_mask_h[jj]);
      cs = masked_state(g, c2, cs, mask_h[jj], inv_mask_h[jj]);
      bw[jj] = hs;
    }
  }

  std::vector<Var> enc(Ls), U(Ls);
  Var att_We = P("att.We");
  for (std::size_t j = 0; j < Ls; ++j) {
    enc[j] = dropout_var(g, ad::concat_cols(g, {fw[j], bw[j]}), cfg.dropout_p, train_mode, rng);
    U[j] = ad::matmul(g, enc[j], att_We);
  }

  // decoder init from the masked mean of encoder states
  Matrix mean_w(B, static_cast<Eigen::Index>(Ls));
  for (Eigen::Index b = 0; b < B; ++b) {
    double len = static_cast<double>(batch.src[b].size());
    for (std::size_t j = 0; j < Ls; ++j)
      mean_w(b, static_cast<Eigen::Index>(j)) = j < batch.src[b].size() ? 1.0 / len : 0.0;
  }
  Var enc_mean = ad::weighted_context(g, g.leaf(std::move(mean_w), false), enc);
  Var s_state = ad::tanh_v(
      g, ad::add_rowwise(g, ad::matmul(g, enc_mean, P("init.Wh")), P("init.bh")));
  Var c_state = ad::tanh_v(
      g, ad::add_rowwise(g, ad::matmul(g, enc_mean, P("init.Wc")), P("init.bc")));

  Var att_Wd = P("att.Wd"), att_b = P("att.b"), att_v = P("att.v");
  Var readout_W = P("readout.W"), readout_b = P("readout.b");
  Var out_table = cfg.tie_output_embeddings ? E : P("out_proj");
  Var out_bias = P("out_bias");

  Var total_nll;
  long tokens = 0;
  for (std::size_t t = 0; t < Lt; ++t) {
    std::vector<int> prev(B), tgt_ev(B, Vocab::kEosId);
    Eigen::VectorXd loss_mask(B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto& tb = batch.tgt[b];
      prev[b] = t == 0 ? Vocab::kBosId : (t - 1 < tb.size() ? tb[t - 1] : Vocab::kEosId);
      if (t < tb.size()) {
        tgt_ev[b] = tb[t];
        loss_mask(b) = 1.0;
      } else if (t == tb.size()) {
        tgt_ev[b] = Vocab::kEosId;
        loss_mask(b) = 1.0;
      } else {
        loss_mask(b) = 0.0;
      }
      if (loss_mask(b) != 0.0) tokens++;
    }
    Var prev_emb = dropout_var(g, ad::gather_rows(g, E, prev), cfg.dropout_p, train_mode, rng);
    Var q = ad::matmul(g, s_state, att_Wd);
    std::vector<Var> scores(Ls);
    for (std::size_t j = 0; j < Ls; ++j)
      scores[j] =
          ad::matmul(g, ad::tanh_v(g, ad::add_rowwise(g, ad::add(g, U[j], q), att_b)), att_v);
    Var alpha = ad::softmax_rows(g, ad::concat_cols(g, scores), &att_mask);
    Var ctx = ad::weighted_context(g, alpha, enc);
    Var x = ad::concat_cols(g, {prev_emb, ctx});
    auto [s2, c2] = dec.step(g, x, s_state, c_state);
    s_state = s2;
    c_state = c2;
    Var s_drop = dropout_var(g, s_state, cfg.dropout_p, train_mode, rng);
    Var r = ad::tanh_v(
        g, ad::add_rowwise(
               g, ad::matmul(g, ad::concat_cols(g, {s_drop, ctx, prev_emb}), readout_W),
               readout_b));
    Var logits = ad::add_rowwise(g, ad::matmul_nt(g, r, out_table), out_bias);
    Var nll = ad::softmax_xent(g, logits, tgt_ev, loss_mask);
    total_nll = total_nll ? ad::add(g, total_nll, nll) : nll;
    if (inspect) {
      inspect->attention.push_back(alpha->val);
      Var probs = ad::softmax_rows(g, logits);
      inspect->output_probs.push_back(probs->val);
    }
  }

  Var loss = ad::scale(g, total_nll, 1.0 / static_cast<double>(tokens));
  ForwardResult res;
  res.loss = loss->val(0, 0);
  res.tokens = tokens;
  if (!std::isfinite(res.loss)) throw std::runtime_error("forward_loss: non-finite loss");
  if (train_mode) {
    g.backward(loss);
    P.collect_grads(res.grads);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Beam decoding

namespace {

// Per-model encoder context and decoder stepping for beam search (eval mode;
// graph nodes never require gradients).
struct DecoderCtx {
  const ModelConfig* cfg;
  Graph* g;
  ParamLeaves P;
  LstmCell dec;
  std::vector<Var> enc, U;
  Var att_Wd, att_b, att_v, readout_W, readout_b, out_table, out_bias, E;

  DecoderCtx(const ModelConfig& c, const ModelParams& params, Graph& graph,
             const std::vector<int>& src)
      : cfg(&c), g(&graph), P(graph, params, false), dec(LstmCell::fetch(P, "dec", c.layer_norm, c.hidden_dim)) {
    const Eigen::Index h = c.hidden_dim;
    E = P("embedding");
    LstmCell enc_fw = LstmCell::fetch(P, "enc_fw", c.layer_norm, h);
    LstmCell enc_bw = LstmCell::fetch(P, "enc_bw", c.layer_norm, h);
    std::size_t Ls = src.size();
    std::vector<Var> emb(Ls);
    for (std::size_t j = 0; j < Ls; ++j) emb[j] = ad::gather_rows(*g, E, {src[j]});
    Var zero = g->leaf(Matrix::Zero(1, h), false);
    std::vector<Var> fw(Ls), bw(Ls);
    {
      Var hs = zero, cs = zero;
      for (std::size_t j = 0; j < Ls; ++j) {
        std::tie(hs, cs) = enc_fw.step(*g, emb[j], hs, cs);
        fw[j] = hs;
      }
    }
    {
      Var hs = zero, cs = zero;
      for (std::size_t j = Ls; j-- > 0;) {
        std::tie(hs, cs) = enc_bw.step(*g, emb[j], hs, cs);
        bw[j] = hs;
      }
    }
    enc.resize(Ls);
    U.resize(Ls);
    Var att_We = P("att.We");
    for (std::size_t j = 0; j < Ls; ++j) {
      enc[j] = ad::concat_cols(*g, {fw[j], bw[j]});
      U[j] = ad::matmul(*g, enc[j], att_We);
    }
    att_Wd = P("att.Wd");
    att_b = P("att.b");
    att_v = P("att.v");
    readout_W = P("readout.W");
    readout_b = P("readout.b");
    out_table = c.tie_output_embeddings ? E : P("out_proj");
    out_bias = P("out_bias");
  }

  std::pair<Var, Var> init_state() {
    Matrix w(1, static_cast<Eigen::Index>(enc.size()));
    w.setConstant(1.0 / static_cast<double>(enc.size()));
    Var mean = ad::weighted_context(*g, g->leaf(std::move(w), false), enc);
    Var s = ad::tanh_v(*g, ad::add_rowwise(*g, ad::matmul(*g, mean, P("init.Wh")), P("init.bh")));
    Var c = ad::tanh_v(*g, ad::add_rowwise(*g, ad::matmul(*g, mean, P("init.Wc")), P("init.bc")));
    return {s, c};
  }

  // Returns the next-token probability row and the updated (s, c).
  std::tuple<Eigen::RowVectorXd, Var, Var> step(int prev, const Var& s_prev, const Var& c_prev) {
    Var prev_emb = ad::gather_rows(*g, E, {prev});
    Var q = ad::matmul(*g, s_prev, att_Wd);
    std::vector<Var> scores(enc.size());
    for (std::size_t j = 0; j < enc.size(); ++j)
      scores[j] = ad::matmul(
          *g, ad::tanh_v(*g, ad::add_rowwise(*g, ad::add(*g, U[j], q), att_b)), att_v);
    Var alpha = ad::softmax_rows(*g, ad::concat_cols(*g, scores));
    Var ctx = ad::weighted_context(*g, alpha, enc);
    Var x = ad::concat_cols(*g, {prev_emb, ctx});
    auto [s2, c2] = dec.step(*g, x, s_prev, c_prev);
    Var r = ad::tanh_v(
        *g, ad::add_rowwise(
                *g, ad::matmul(*g, ad::concat_cols(*g, {s2, ctx, prev_emb}), readout_W),
                readout_b));
    Var logits = ad::add_rowwise(*g, ad::matmul_nt(*g, r, out_table), out_bias);
    Var probs = ad::softmax_rows(*g, logits);
    return {probs->val.row(0), s2, c2};
  }
};

struct BeamHyp {
  std::vector<int> tokens;
  double log_prob = 0;
  bool completed = false;
  std::vector<std::pair<Var, Var>> states;  // per model (s, c)

  double normalized() const {
    return log_prob / static_cast<double>(tokens.size() + 1);  // +1 for </s>
  }
};

}  // namespace

Hypothesis beam_decode(const ModelConfig& cfg, const std::vector<const ModelParams*>& models,
                       const std::vector<int>& src, int beam, double max_len_factor,
                       int max_len_const) {
  if (models.empty()) throw std::runtime_error("beam_decode: no models");
  if (beam < 1) throw std::runtime_error("beam_decode: beam must be >= 1");
  if (src.empty()) throw std::runtime_error("beam_decode: empty source");
  Graph g;
  std::vector<DecoderCtx> ctxs;
  ctxs.reserve(models.size());
  for (const ModelParams* m : models) ctxs.emplace_back(cfg, *m, g, src);

  const std::size_t max_len =
      static_cast<std::size_t>(max_len_factor * static_cast<double>(src.size())) +
      static_cast<std::size_t>(max_len_const);

  std::vector<BeamHyp> hyps(1);
  for (auto& ctx : ctxs) hyps[0].states.push_back(ctx.init_state());

  for (std::size_t step = 0; step < max_len; ++step) {
    bool any_open = std::any_of(hyps.begin(), hyps.end(),
                                [](const BeamHyp& h) { return !h.completed; });
    if (!any_open) break;
    std::vector<BeamHyp> candidates;
    for (const auto& hyp : hyps) {
      if (hyp.completed) {
        candidates.push_back(hyp);
        continue;
      }
      int prev = hyp.tokens.empty() ? Vocab::kBosId : hyp.tokens.back();
      Eigen::RowVectorXd mean_probs;
      std::vector<std::pair<Var, Var>> new_states;
      for (std::size_t m = 0; m < ctxs.size(); ++m) {
        auto [p, s2, c2] = ctxs[m].step(prev, hyp.states[m].first, hyp.states[m].second);
        if (m == 0)
          mean_probs = p;
        else
          mean_probs += p;
        new_states.emplace_back(s2, c2);
      }
      mean_probs /= static_cast<double>(ctxs.size());
      // expand only the top `beam` tokens of this hypothesis
      std::vector<int> order(mean_probs.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return mean_probs(a) > mean_probs(b); });
      int taken = 0;
      for (std::size_t r = 0; r < order.size() && taken < beam; ++r) {
        int tok = order[r];
        if (tok == Vocab::kBosId) continue;  // never emit <s>
        ++taken;
        BeamHyp next;
        next.log_prob = hyp.log_prob + std::log(std::max(mean_probs(tok), 1e-300));
        next.states = new_states;
        next.tokens = hyp.tokens;
        if (tok == Vocab::kEosId) {
          next.completed = true;
        } else {
          next.tokens.push_back(tok);
        }
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const BeamHyp& a, const BeamHyp& b) { return a.log_prob > b.log_prob; });
    if (static_cast<int>(candidates.size()) > beam) candidates.resize(beam);
    hyps = std::move(candidates);
  }

  // best completed hypothesis by length-normalized score; best partial if none
  const BeamHyp* best = nullptr;
  for (const auto& h : hyps)
    if (h.completed && (!best || h.normalized() > best->normalized())) best = &h;
  bool completed = best != nullptr;
  if (!best) {
    for (const auto& h : hyps)
      if (!best || h.normalized() > best->normalized()) best = &h;
  }
  Hypothesis out;
  out.tokens = best->tokens;
  out.log_prob = best->log_prob;
  out.completed = completed;
  return out;
}

}  // namespace binmt

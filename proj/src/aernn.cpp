#include "dpdp/aernn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dpdp/matrix_io.hpp"

namespace dpdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void sigmoidInPlace(Eigen::MatrixXd& a) {
  a = (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

// Row-wise log-sum-exp, max-stabilized.
Eigen::VectorXd logSumExpRows(const Eigen::MatrixXd& logits) {
  const Eigen::VectorXd m = logits.rowwise().maxCoeff();
  return m.array() +
         (logits.colwise() - m).array().exp().rowwise().sum().log();
}

struct SortedBatch {
  std::vector<const std::vector<int>*> seqs;  // length-descending
  std::vector<Index> lens;
  Index maxLen() const { return lens.empty() ? 0 : lens.front(); }
  // Number of sequences longer than t symbols.
  Index active(Index t) const {
    return static_cast<Index>(
        std::lower_bound(lens.begin(), lens.end(), t,
                         [](Index len, Index v) { return len > v; }) -
        lens.begin());
  }
};

SortedBatch sortBatch(const std::vector<const std::vector<int>*>& batch) {
  std::vector<size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return batch[a]->size() > batch[b]->size();
  });
  SortedBatch s;
  for (size_t i : order) {
    s.seqs.push_back(batch[i]);
    s.lens.push_back(static_cast<Index>(batch[i]->size()));
  }
  return s;
}

void checkSymbols(const AernnHyper& hyper, const std::vector<int>& symbols) {
  for (int s : symbols)
    if (s < 1 || s > hyper.alphabet_size)
      throw std::invalid_argument("alphabet mismatch: symbol out of range");
}

}  // namespace

AernnHyper AernnHyper::chainedSpeech(int alphabet_size) {
  AernnHyper h;
  h.alphabet_size = alphabet_size;
  h.embedding_dim = 10;
  h.encoder_dim = 500;
  h.encoder_layers = 1;
  h.latent_dim = 50;
  h.decoder_dim = 500;
  return h;
}

AernnHyper AernnHyper::phonemic(int alphabet_size) {
  AernnHyper h;
  h.alphabet_size = alphabet_size;
  h.embedding_dim = 10;
  h.encoder_dim = 200;
  h.encoder_layers = 3;
  h.latent_dim = 25;
  h.decoder_dim = 200;
  return h;
}

void visitTensors(AernnParams& p,
                  const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  fn("embedding", p.embedding);
  for (size_t l = 0; l < p.encoder.size(); ++l) {
    const std::string pre = "enc" + std::to_string(l) + ".";
    GruLayerParams& g = p.encoder[l];
    fn(pre + "wz", g.wz);
    fn(pre + "wr", g.wr);
    fn(pre + "wn", g.wn);
    fn(pre + "uz", g.uz);
    fn(pre + "ur", g.ur);
    fn(pre + "un", g.un);
    fn(pre + "bz", g.bz);
    fn(pre + "br", g.br);
    fn(pre + "bn", g.bn);
  }
  fn("dec.wz", p.decoder.wz);
  fn("dec.wr", p.decoder.wr);
  fn("dec.wn", p.decoder.wn);
  fn("dec.uz", p.decoder.uz);
  fn("dec.ur", p.decoder.ur);
  fn("dec.un", p.decoder.un);
  fn("dec.bz", p.decoder.bz);
  fn("dec.br", p.decoder.br);
  fn("dec.bn", p.decoder.bn);
  fn("latent.w", p.w_latent);
  fn("latent.b", p.b_latent);
  fn("dec_init.w", p.w_dec_init);
  fn("dec_init.b", p.b_dec_init);
  fn("out.w", p.w_out);
  fn("out.b", p.b_out);
}

void visitTensors(const AernnParams& p,
                  const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) {
  visitTensors(const_cast<AernnParams&>(p),
               [&](const std::string& name, Eigen::MatrixXd& t) { fn(name, t); });
}

AernnParams zeroParams(const AernnHyper& h) {
  if (h.alphabet_size < 1) throw std::invalid_argument("alphabet_size must be >= 1");
  AernnParams p;
  p.embedding = Eigen::MatrixXd::Zero(h.alphabet_size + 1, h.embedding_dim);
  for (int l = 0; l < h.encoder_layers; ++l)
    p.encoder.push_back(GruLayerParams::zeros(
        l == 0 ? h.embedding_dim : h.encoder_dim, h.encoder_dim));
  p.decoder = GruLayerParams::zeros(h.embedding_dim, h.decoder_dim);
  p.w_latent = Eigen::MatrixXd::Zero(h.latent_dim, h.encoder_dim);
  p.b_latent = Eigen::MatrixXd::Zero(1, h.latent_dim);
  p.w_dec_init = Eigen::MatrixXd::Zero(h.decoder_dim, h.latent_dim);
  p.b_dec_init = Eigen::MatrixXd::Zero(1, h.decoder_dim);
  p.w_out = Eigen::MatrixXd::Zero(h.numClasses(), h.decoder_dim);
  p.b_out = Eigen::MatrixXd::Zero(1, h.numClasses());
  return p;
}

AernnParams makeParams(const AernnHyper& h, uint64_t seed) {
  AernnParams p = zeroParams(h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-h.init_range, h.init_range);
  visitTensors(p, [&](const std::string& name, Eigen::MatrixXd& t) {
    // Biases stay zero.
    const size_t dot = name.rfind('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    if (!leaf.empty() && leaf[0] == 'b') return;
    for (Index r = 0; r < t.rows(); ++r)
      for (Index c = 0; c < t.cols(); ++c) t(r, c) = dist(rng);
  });
  return p;
}

double aernnLossAndGrad(const AernnHyper& hyper, const AernnParams& params,
                        const std::vector<const std::vector<int>*>& batch,
                        AernnParams* grads) {
  if (batch.empty()) throw std::invalid_argument("empty input");
  for (const auto* s : batch) {
    if (s->empty()) throw std::invalid_argument("empty input");
    checkSymbols(hyper, *s);
  }
  const SortedBatch sb = sortBatch(batch);
  const Index n = static_cast<Index>(sb.seqs.size());
  const Index max_len = sb.maxLen();
  const int n_layers = hyper.encoder_layers;
  const bool train = grads != nullptr;

  auto symbolAt = [&](Index row, Index t) { return (*sb.seqs[static_cast<size_t>(row)])[static_cast<size_t>(t)]; };

  // ---- Encoder forward ----
  std::vector<std::vector<GruStepCache>> enc_cache;
  std::vector<std::vector<Eigen::MatrixXd>> enc_h;  // [layer][t], n_t rows
  std::vector<Eigen::MatrixXd> enc_inputs;          // embedded, per t (train only)
  if (train) {
    enc_cache.assign(static_cast<size_t>(n_layers), std::vector<GruStepCache>(static_cast<size_t>(max_len)));
    enc_h.assign(static_cast<size_t>(n_layers), std::vector<Eigen::MatrixXd>(static_cast<size_t>(max_len)));
    enc_inputs.resize(static_cast<size_t>(max_len));
  }
  std::vector<Eigen::MatrixXd> rolling(static_cast<size_t>(n_layers));
  for (auto& h : rolling) h = Eigen::MatrixXd::Zero(n, hyper.encoder_dim);
  Eigen::MatrixXd enc_final(n, hyper.encoder_dim);

  for (Index t = 0; t < max_len; ++t) {
    const Index nt = sb.active(t);
    Eigen::MatrixXd x(nt, hyper.embedding_dim);
    for (Index i = 0; i < nt; ++i)
      x.row(i) = params.embedding.row(symbolAt(i, t) - 1);
    if (train) enc_inputs[static_cast<size_t>(t)] = x;
    Eigen::MatrixXd cur = std::move(x);
    for (int l = 0; l < n_layers; ++l) {
      GruStepCache* cache =
          train ? &enc_cache[static_cast<size_t>(l)][static_cast<size_t>(t)] : nullptr;
      Eigen::MatrixXd h_new = gruStep(params.encoder[static_cast<size_t>(l)], cur,
                                      rolling[static_cast<size_t>(l)].topRows(nt), cache);
      rolling[static_cast<size_t>(l)].topRows(nt) = h_new;
      if (train) enc_h[static_cast<size_t>(l)][static_cast<size_t>(t)] = h_new;
      cur = std::move(h_new);
    }
    // Rows whose sequence ends here retire; capture their final state.
    const Index nt_next = t + 1 < max_len ? sb.active(t + 1) : 0;
    for (Index i = nt_next; i < nt; ++i)
      enc_final.row(i) = rolling[static_cast<size_t>(n_layers - 1)].row(i);
  }

  const Eigen::MatrixXd latent =
      (enc_final * params.w_latent.transpose()).rowwise() + params.b_latent.row(0);
  const Eigen::MatrixXd h0 =
      (latent * params.w_dec_init.transpose()).rowwise() + params.b_dec_init.row(0);

  // ---- Decoder forward ----
  const Index eos_extra = hyper.append_eos ? 1 : 0;
  const Index max_dec = max_len + eos_extra;
  auto decActive = [&](Index t) { return sb.active(t - eos_extra); };  // = #dec_len > t
  std::vector<GruStepCache> dec_cache;
  std::vector<Eigen::MatrixXd> dec_h, dec_probs, dec_inputs;
  std::vector<std::vector<int>> dec_targets(static_cast<size_t>(max_dec));
  if (train) {
    dec_cache.resize(static_cast<size_t>(max_dec));
    dec_h.resize(static_cast<size_t>(max_dec));
    dec_probs.resize(static_cast<size_t>(max_dec));
    dec_inputs.resize(static_cast<size_t>(max_dec));
  }
  Eigen::MatrixXd h_prev = h0;
  double loss = 0.0;
  for (Index t = 0; t < max_dec; ++t) {
    const Index mt = decActive(t);
    Eigen::MatrixXd x(mt, hyper.embedding_dim);
    for (Index i = 0; i < mt; ++i)
      x.row(i) = t == 0 ? params.embedding.row(hyper.bosRow())
                        : params.embedding.row(symbolAt(i, t - 1) - 1);
    if (train) dec_inputs[static_cast<size_t>(t)] = x;
    GruStepCache* cache = train ? &dec_cache[static_cast<size_t>(t)] : nullptr;
    Eigen::MatrixXd h = gruStep(params.decoder, x, h_prev.topRows(mt), cache);
    Eigen::MatrixXd logits =
        (h * params.w_out.transpose()).rowwise() + params.b_out.row(0);
    const Eigen::VectorXd lse = logSumExpRows(logits);
    std::vector<int>& targets = dec_targets[static_cast<size_t>(t)];
    targets.resize(static_cast<size_t>(mt));
    for (Index i = 0; i < mt; ++i) {
      const int target = t < sb.lens[static_cast<size_t>(i)]
                             ? symbolAt(i, t) - 1
                             : hyper.eosClass();
      targets[static_cast<size_t>(i)] = target;
      loss += lse(i) - logits(i, target);
    }
    if (train) {
      dec_probs[static_cast<size_t>(t)] =
          (logits.colwise() - lse).array().exp().matrix();
      dec_h[static_cast<size_t>(t)] = h;
    }
    h_prev = std::move(h);
  }
  loss /= static_cast<double>(n);
  if (!train) return loss;

  // ---- Decoder backward ----
  AernnParams& g = *grads;
  const double scale = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd carry;  // d h_prev from the step after the current one
  for (Index t = max_dec - 1; t >= 0; --t) {
    const Index mt = decActive(t);
    Eigen::MatrixXd d_logits = dec_probs[static_cast<size_t>(t)];
    const std::vector<int>& targets = dec_targets[static_cast<size_t>(t)];
    for (Index i = 0; i < mt; ++i) d_logits(i, targets[static_cast<size_t>(i)]) -= 1.0;
    d_logits *= scale;
    g.w_out.noalias() += d_logits.transpose() * dec_h[static_cast<size_t>(t)];
    g.b_out.row(0) += d_logits.colwise().sum();
    Eigen::MatrixXd d_h = d_logits * params.w_out;
    if (carry.rows() > 0) d_h.topRows(carry.rows()) += carry;
    Eigen::MatrixXd d_x, d_h_prev;
    gruStepBackward(params.decoder, dec_cache[static_cast<size_t>(t)], d_h,
                    g.decoder, d_x, d_h_prev);
    for (Index i = 0; i < mt; ++i) {
      const Index row = t == 0 ? hyper.bosRow() : symbolAt(i, t - 1) - 1;
      g.embedding.row(row) += d_x.row(i);
    }
    carry = std::move(d_h_prev);
  }
  const Eigen::MatrixXd d_h0 = std::move(carry);  // n rows
  const Eigen::MatrixXd d_latent = d_h0 * params.w_dec_init;
  g.w_dec_init.noalias() += d_h0.transpose() * latent;
  g.b_dec_init.row(0) += d_h0.colwise().sum();
  const Eigen::MatrixXd d_enc_final = d_latent * params.w_latent;
  g.w_latent.noalias() += d_latent.transpose() * enc_final;
  g.b_latent.row(0) += d_latent.colwise().sum();

  // ---- Encoder backward ----
  std::vector<Eigen::MatrixXd> layer_carry(static_cast<size_t>(n_layers));
  for (Index t = max_len - 1; t >= 0; --t) {
    const Index nt = sb.active(t);
    const Index nt_next = t + 1 < max_len ? sb.active(t + 1) : 0;
    Eigen::MatrixXd d_from_above;
    for (int l = n_layers - 1; l >= 0; --l) {
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nt, hyper.encoder_dim);
      Eigen::MatrixXd& lc = layer_carry[static_cast<size_t>(l)];
      if (lc.rows() > 0) d.topRows(lc.rows()) += lc;
      if (l == n_layers - 1) {
        for (Index i = nt_next; i < nt; ++i) d.row(i) += d_enc_final.row(i);
      } else {
        d += d_from_above;
      }
      Eigen::MatrixXd d_x, d_h_prev;
      gruStepBackward(params.encoder[static_cast<size_t>(l)],
                      enc_cache[static_cast<size_t>(l)][static_cast<size_t>(t)], d,
                      g.encoder[static_cast<size_t>(l)], d_x, d_h_prev);
      lc = std::move(d_h_prev);
      d_from_above = std::move(d_x);
    }
    for (Index i = 0; i < nt; ++i)
      g.embedding.row(symbolAt(i, t) - 1) += d_from_above.row(i);
  }
  return loss;
}

namespace {

std::vector<Eigen::MatrixXd*> tensorPtrs(AernnParams& p) {
  std::vector<Eigen::MatrixXd*> out;
  visitTensors(p, [&](const std::string&, Eigen::MatrixXd& t) { out.push_back(&t); });
  return out;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> m, v;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(const AernnParams& params) {
    visitTensors(params, [&](const std::string&, const Eigen::MatrixXd& tensor) {
      m.push_back(Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols()));
      v.push_back(Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols()));
    });
  }

  void step(AernnParams& params, AernnParams& grads, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    const std::vector<Eigen::MatrixXd*> ps = tensorPtrs(params);
    const std::vector<Eigen::MatrixXd*> gs = tensorPtrs(grads);
    for (size_t i = 0; i < ps.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * (*gs[i]);
      v[i] = (beta2 * v[i].array() + (1.0 - beta2) * gs[i]->array().square()).matrix();
      ps[i]->array() -=
          lr * (m[i].array() / bc1) / ((v[i].array() / bc2).sqrt() + eps);
    }
  }
};

double corpusLoss(const AernnHyper& hyper, const AernnParams& params,
                  const std::vector<const std::vector<int>*>& seqs) {
  double total = 0.0;
  const size_t chunk = 64;
  for (size_t i = 0; i < seqs.size(); i += chunk) {
    const size_t end = std::min(seqs.size(), i + chunk);
    std::vector<const std::vector<int>*> part(seqs.begin() + static_cast<long>(i),
                                              seqs.begin() + static_cast<long>(end));
    total += aernnLossAndGrad(hyper, params, part, nullptr) *
             static_cast<double>(part.size());
  }
  return total / static_cast<double>(seqs.size());
}

void zeroGrads(AernnParams& g) {
  visitTensors(g, [](const std::string&, Eigen::MatrixXd& t) { t.setZero(); });
}

}  // namespace

AernnScorer trainAernn(const std::vector<SymbolSequence>& corpus,
                       const AernnHyper& hyper, uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("empty input");
  int max_symbol = 0;
  for (const SymbolSequence& s : corpus) {
    if (s.symbols.empty()) throw std::invalid_argument("empty input");
    for (int sym : s.symbols) max_symbol = std::max(max_symbol, sym);
  }
  if (max_symbol > hyper.alphabet_size)
    throw std::invalid_argument("alphabet mismatch: corpus exceeds alphabet_size");

  AernnScorer scorer;
  scorer.hyper = hyper;
  scorer.params = makeParams(hyper, seed);
  scorer.meta.seed = seed;

  // Length buckets: consecutive batches after a length sort keep batch
  // members near-uniform in length.
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return corpus[a].symbols.size() < corpus[b].symbols.size();
  });
  std::vector<std::vector<const std::vector<int>*>> batches;
  for (size_t i = 0; i < order.size(); i += static_cast<size_t>(hyper.batch_size)) {
    std::vector<const std::vector<int>*> batch;
    for (size_t j = i;
         j < std::min(order.size(), i + static_cast<size_t>(hyper.batch_size)); ++j)
      batch.push_back(&corpus[order[j]].symbols);
    batches.push_back(std::move(batch));
  }

  std::vector<const std::vector<int>*> eval_set;
  for (size_t i = 0; i < std::min<size_t>(corpus.size(), 512); ++i)
    eval_set.push_back(&corpus[i].symbols);
  scorer.meta.initial_loss = corpusLoss(hyper, scorer.params, eval_set);

  std::mt19937_64 rng(seed + 1);
  std::vector<size_t> batch_order(batches.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);
  std::shuffle(batch_order.begin(), batch_order.end(), rng);

  AernnParams grads = zeroParams(hyper);
  AdamState adam(scorer.params);
  size_t cursor = 0;
  for (int step = 0; step < hyper.steps; ++step) {
    if (cursor == batch_order.size()) {
      std::shuffle(batch_order.begin(), batch_order.end(), rng);
      cursor = 0;
    }
    zeroGrads(grads);
    const double loss = aernnLossAndGrad(hyper, scorer.params,
                                         batches[batch_order[cursor++]], &grads);
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "non-finite training loss at step " << step << " (loss " << loss
         << ", seed " << seed << ")";
      throw std::runtime_error(os.str());
    }
    scorer.meta.step_losses.push_back(loss);
    adam.step(scorer.params, grads, hyper.learning_rate);
    ++scorer.meta.steps_run;
  }

  scorer.meta.final_loss = corpusLoss(hyper, scorer.params, eval_set);
  return scorer;
}

double aernnSpanNll(const AernnHyper& hyper, const AernnParams& params,
                    const std::vector<int>& span,
                    std::vector<double>* per_position) {
  if (span.empty()) throw std::invalid_argument("empty input");
  checkSymbols(hyper, span);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, hyper.encoder_dim);
  std::vector<Eigen::MatrixXd> hs(static_cast<size_t>(hyper.encoder_layers),
                                  Eigen::MatrixXd::Zero(1, hyper.encoder_dim));
  for (int sym : span) {
    Eigen::MatrixXd cur = params.embedding.row(sym - 1);
    for (int l = 0; l < hyper.encoder_layers; ++l) {
      hs[static_cast<size_t>(l)] =
          gruStep(params.encoder[static_cast<size_t>(l)], cur, hs[static_cast<size_t>(l)]);
      cur = hs[static_cast<size_t>(l)];
    }
  }
  const Eigen::MatrixXd latent =
      (hs.back() * params.w_latent.transpose()).rowwise() + params.b_latent.row(0);
  Eigen::MatrixXd hd =
      (latent * params.w_dec_init.transpose()).rowwise() + params.b_dec_init.row(0);
  const Index steps = static_cast<Index>(span.size()) + (hyper.append_eos ? 1 : 0);
  double nll = 0.0;
  if (per_position) per_position->clear();
  for (Index t = 0; t < steps; ++t) {
    const Eigen::MatrixXd x =
        t == 0 ? params.embedding.row(hyper.bosRow())
               : params.embedding.row(span[static_cast<size_t>(t - 1)] - 1);
    hd = gruStep(params.decoder, x, hd);
    Eigen::MatrixXd logits =
        (hd * params.w_out.transpose()).rowwise() + params.b_out.row(0);
    const double lse = logSumExpRows(logits)(0);
    const int target = t < static_cast<Index>(span.size())
                           ? span[static_cast<size_t>(t)] - 1
                           : hyper.eosClass();
    const double term = lse - logits(0, target);
    if (per_position) per_position->push_back(term);
    nll += term;
  }
  return nll;
}

Eigen::MatrixXd aernnSpanCosts(const AernnScorer& scorer,
                               const std::vector<int>& symbols,
                               Index max_seg_len) {
  const AernnHyper& hyper = scorer.hyper;
  const AernnParams& params = scorer.params;
  if (symbols.empty()) throw std::invalid_argument("empty input");
  checkSymbols(hyper, symbols);
  const Index t_len = static_cast<Index>(symbols.size());
  const Index max_l = std::min(max_seg_len, t_len);
  Eigen::MatrixXd costs = Eigen::MatrixXd::Constant(t_len, max_l, kInf);

  // One encoder pass per start position, batched: row a carries the prefix
  // of the span starting at a.  After step s, row a holds the encoding of
  // the span (a, a+s).
  std::vector<Eigen::MatrixXd> rolling(static_cast<size_t>(hyper.encoder_layers));
  for (auto& h : rolling) h = Eigen::MatrixXd::Zero(t_len, hyper.encoder_dim);
  Eigen::MatrixXd span_enc = Eigen::MatrixXd::Zero(t_len * max_l, hyper.encoder_dim);
  for (Index s = 0; s < t_len; ++s) {
    const Index n = t_len - s;  // active starts
    Eigen::MatrixXd x(n, hyper.embedding_dim);
    for (Index a = 0; a < n; ++a)
      x.row(a) = params.embedding.row(symbols[static_cast<size_t>(a + s)] - 1);
    Eigen::MatrixXd cur = std::move(x);
    for (int l = 0; l < hyper.encoder_layers; ++l) {
      Eigen::MatrixXd h_new = gruStep(params.encoder[static_cast<size_t>(l)], cur,
                                      rolling[static_cast<size_t>(l)].topRows(n));
      rolling[static_cast<size_t>(l)].topRows(n) = h_new;
      cur = std::move(h_new);
    }
    if (s < max_l)
      for (Index a = 0; a < n; ++a) span_enc.row(a * max_l + s) = cur.row(a);
  }

  Eigen::MatrixXd latent =
      (span_enc * params.w_latent.transpose()).rowwise() + params.b_latent.row(0);
  Eigen::MatrixXd h0_all =
      (latent * params.w_dec_init.transpose()).rowwise() + params.b_dec_init.row(0);

  // Decode all spans of one length together; lengths are uniform within a
  // group so no masking is needed.
  for (Index len = 1; len <= max_l; ++len) {
    const Index m = t_len - len + 1;  // starts 0..t_len-len
    Eigen::MatrixXd h(m, hyper.decoder_dim);
    for (Index a = 0; a < m; ++a) h.row(a) = h0_all.row(a * max_l + (len - 1));
    Eigen::VectorXd nll = Eigen::VectorXd::Zero(m);
    const Index steps = len + (hyper.append_eos ? 1 : 0);
    for (Index t = 0; t < steps; ++t) {
      Eigen::MatrixXd x(m, hyper.embedding_dim);
      for (Index a = 0; a < m; ++a)
        x.row(a) = t == 0
                       ? params.embedding.row(hyper.bosRow())
                       : params.embedding.row(symbols[static_cast<size_t>(a + t - 1)] - 1);
      h = gruStep(params.decoder, x, h);
      Eigen::MatrixXd logits =
          (h * params.w_out.transpose()).rowwise() + params.b_out.row(0);
      const Eigen::VectorXd lse = logSumExpRows(logits);
      for (Index a = 0; a < m; ++a) {
        const int target = t < len ? symbols[static_cast<size_t>(a + t)] - 1
                                   : hyper.eosClass();
        nll(a) += lse(a) - logits(a, target);
      }
    }
    for (Index a = 0; a < m; ++a) costs(a, len - 1) = nll(a);
  }
  return costs;
}

double aernnSegmentCost(const AernnScorer& scorer, const SymbolSequence& seq,
                        Index a, Index b, std::vector<double>* per_position,
                        Index max_seg_len) {
  const Index t_len = seq.length();
  if (a < 1 || b < a || b > t_len)
    throw std::invalid_argument("invalid span indices");
  if (b - a + 1 > max_seg_len) {
    if (per_position) per_position->clear();
    return kInf;
  }
  std::vector<int> span(seq.symbols.begin() + (a - 1), seq.symbols.begin() + b);
  return aernnSpanNll(scorer.hyper, scorer.params, span, per_position);
}

Eigen::MatrixXd decoderDistributions(const AernnHyper& hyper,
                                     const AernnParams& params,
                                     const std::vector<int>& span) {
  if (span.empty()) throw std::invalid_argument("empty input");
  checkSymbols(hyper, span);
  std::vector<Eigen::MatrixXd> hs(static_cast<size_t>(hyper.encoder_layers),
                                  Eigen::MatrixXd::Zero(1, hyper.encoder_dim));
  for (int sym : span) {
    Eigen::MatrixXd cur = params.embedding.row(sym - 1);
    for (int l = 0; l < hyper.encoder_layers; ++l) {
      hs[static_cast<size_t>(l)] = gruStep(params.encoder[static_cast<size_t>(l)],
                                           cur, hs[static_cast<size_t>(l)]);
      cur = hs[static_cast<size_t>(l)];
    }
  }
  const Eigen::MatrixXd latent =
      (hs.back() * params.w_latent.transpose()).rowwise() + params.b_latent.row(0);
  Eigen::MatrixXd hd =
      (latent * params.w_dec_init.transpose()).rowwise() + params.b_dec_init.row(0);
  const Index steps = static_cast<Index>(span.size()) + (hyper.append_eos ? 1 : 0);
  Eigen::MatrixXd dists(steps, hyper.numClasses());
  for (Index t = 0; t < steps; ++t) {
    const Eigen::MatrixXd x =
        t == 0 ? params.embedding.row(hyper.bosRow())
               : params.embedding.row(span[static_cast<size_t>(t - 1)] - 1);
    hd = gruStep(params.decoder, x, hd);
    Eigen::MatrixXd logits =
        (hd * params.w_out.transpose()).rowwise() + params.b_out.row(0);
    const double lse = logSumExpRows(logits)(0);
    dists.row(t) = (logits.row(0).array() - lse).exp();
  }
  return dists;
}

double reconstructionAccuracy(const AernnScorer& scorer,
                              const std::vector<SymbolSequence>& corpus) {
  long correct = 0, total = 0;
  for (const SymbolSequence& seq : corpus) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, scorer.hyper.encoder_dim);
    std::vector<Eigen::MatrixXd> hs(
        static_cast<size_t>(scorer.hyper.encoder_layers),
        Eigen::MatrixXd::Zero(1, scorer.hyper.encoder_dim));
    for (int sym : seq.symbols) {
      Eigen::MatrixXd cur = scorer.params.embedding.row(sym - 1);
      for (int l = 0; l < scorer.hyper.encoder_layers; ++l) {
        hs[static_cast<size_t>(l)] = gruStep(scorer.params.encoder[static_cast<size_t>(l)],
                                             cur, hs[static_cast<size_t>(l)]);
        cur = hs[static_cast<size_t>(l)];
      }
    }
    Eigen::MatrixXd latent = (hs.back() * scorer.params.w_latent.transpose()).rowwise() +
                             scorer.params.b_latent.row(0);
    Eigen::MatrixXd hd = (latent * scorer.params.w_dec_init.transpose()).rowwise() +
                         scorer.params.b_dec_init.row(0);
    const Index steps =
        seq.length() + (scorer.hyper.append_eos ? 1 : 0);
    for (Index t = 0; t < steps; ++t) {
      const Eigen::MatrixXd x =
          t == 0 ? scorer.params.embedding.row(scorer.hyper.bosRow())
                 : scorer.params.embedding.row(seq.symbols[static_cast<size_t>(t - 1)] - 1);
      hd = gruStep(scorer.params.decoder, x, hd);
      Eigen::MatrixXd logits =
          (hd * scorer.params.w_out.transpose()).rowwise() + scorer.params.b_out.row(0);
      Index argmax = 0;
      logits.row(0).maxCoeff(&argmax);
      const int target = t < seq.length() ? seq.symbols[static_cast<size_t>(t)] - 1
                                          : scorer.hyper.eosClass();
      correct += argmax == target ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

uint64_t parameterHash(const AernnParams& params) {
  uint64_t h = 1469598103934665603ull;
  visitTensors(params, [&](const std::string&, const Eigen::MatrixXd& t) {
    for (Index r = 0; r < t.rows(); ++r)
      for (Index c = 0; c < t.cols(); ++c) {
        uint64_t bits;
        const double v = t(r, c);
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
          h ^= bits >> (8 * b) & 0xffull;
          h *= 1099511628211ull;
        }
      }
  });
  return h;
}

void saveScorer(const std::filesystem::path& dir, const AernnScorer& scorer) {
  std::filesystem::create_directories(dir / "tensors");
  std::map<std::string, std::string> manifest;
  const AernnHyper& h = scorer.hyper;
  manifest["alphabet_size"] = std::to_string(h.alphabet_size);
  manifest["embedding_dim"] = std::to_string(h.embedding_dim);
  manifest["encoder_dim"] = std::to_string(h.encoder_dim);
  manifest["encoder_layers"] = std::to_string(h.encoder_layers);
  manifest["latent_dim"] = std::to_string(h.latent_dim);
  manifest["decoder_dim"] = std::to_string(h.decoder_dim);
  manifest["append_eos"] = h.append_eos ? "1" : "0";
  manifest["steps"] = std::to_string(h.steps);
  manifest["batch_size"] = std::to_string(h.batch_size);
  manifest["learning_rate"] = std::to_string(h.learning_rate);
  manifest["seed"] = std::to_string(scorer.meta.seed);
  manifest["steps_run"] = std::to_string(scorer.meta.steps_run);
  manifest["initial_loss"] = std::to_string(scorer.meta.initial_loss);
  manifest["final_loss"] = std::to_string(scorer.meta.final_loss);
  std::string names;
  visitTensors(scorer.params,
               [&](const std::string& name, const Eigen::MatrixXd& t) {
                 if (!names.empty()) names += ",";
                 names += name + ":" + std::to_string(t.rows()) + "x" +
                          std::to_string(t.cols());
                 writeMatrix(dir / "tensors" / (name + ".dpdpf"), t);
               });
  manifest["tensors"] = names;
  writeManifest(dir / "manifest.txt", manifest);
}

AernnScorer loadScorer(const std::filesystem::path& dir) {
  const auto manifest = readManifest(dir / "manifest.txt");
  auto get = [&](const std::string& key) {
    auto it = manifest.find(key);
    if (it == manifest.end())
      throw std::runtime_error("scorer manifest missing key: " + key);
    return it->second;
  };
  AernnScorer scorer;
  AernnHyper& h = scorer.hyper;
  h.alphabet_size = std::stoi(get("alphabet_size"));
  h.embedding_dim = std::stoi(get("embedding_dim"));
  h.encoder_dim = std::stoi(get("encoder_dim"));
  h.encoder_layers = std::stoi(get("encoder_layers"));
  h.latent_dim = std::stoi(get("latent_dim"));
  h.decoder_dim = std::stoi(get("decoder_dim"));
  h.append_eos = get("append_eos") == "1";
  h.steps = std::stoi(get("steps"));
  h.batch_size = std::stoi(get("batch_size"));
  h.learning_rate = std::stod(get("learning_rate"));
  scorer.meta.seed = std::stoull(get("seed"));
  scorer.meta.steps_run = std::stoi(get("steps_run"));
  scorer.meta.initial_loss = std::stod(get("initial_loss"));
  scorer.meta.final_loss = std::stod(get("final_loss"));
  scorer.params = zeroParams(h);
  visitTensors(scorer.params, [&](const std::string& name, Eigen::MatrixXd& t) {
    const Eigen::MatrixXd loaded = readMatrix(dir / "tensors" / (name + ".dpdpf"));
    if (loaded.rows() != t.rows() || loaded.cols() != t.cols())
      throw std::runtime_error("tensor shape mismatch for " + name);
    t = loaded;
  });
  return scorer;
}

}  // namespace dpdp

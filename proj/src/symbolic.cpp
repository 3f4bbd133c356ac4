#include "dpdp/symbolic.hpp"

#include <cmath>
#include <stdexcept>

namespace dpdp {

SymbolicSegConfig SymbolicSegConfig::linear(double lambda) {
  SymbolicSegConfig c;
  c.variant = Variant::kLinear;
  c.lambda = lambda;
  return c;
}

SymbolicSegConfig SymbolicSegConfig::hsmm(double gamma_shape, double gamma_scale,
                                          int truncation,
                                          double geometric_continue_prob) {
  if (geometric_continue_prob <= 0.0 || geometric_continue_prob >= 1.0)
    throw std::invalid_argument("geometric prior parameter must be in (0, 1)");
  SymbolicSegConfig c;
  c.variant = Variant::kHsmm;
  c.lambda = 1.0;
  c.gamma_shape = gamma_shape;
  c.gamma_scale = gamma_scale;
  c.truncation = truncation;
  c.geometric_continue_prob = geometric_continue_prob;
  return c;
}

DurationPenalty SymbolicSegConfig::penalty() const {
  if (variant == Variant::kLinear) return DurationPenalty::linear(lambda);
  DurationPenalty p = DurationPenalty::gammaPmf(1.0, gamma_shape, gamma_scale,
                                                truncation);
  p.segment_constant = -std::log(geometric_continue_prob);
  return p;
}

Index SymbolicSegConfig::effectiveMaxSegLen() const {
  if (variant == Variant::kHsmm)
    return std::min<Index>(max_seg_len, truncation);
  return max_seg_len;
}

Segmentation segmentSymbols(const AernnScorer& scorer, const SymbolSequence& seq,
                            const SymbolicSegConfig& config) {
  validate(seq);
  const Index max_len = config.effectiveMaxSegLen();
  const Eigen::MatrixXd costs = aernnSpanCosts(scorer, seq.symbols, max_len);
  const SegmentCostFn cost = [&costs](Index a, Index b) {
    return costs(a - 1, b - a);
  };
  return dpdpSegment(seq.length(), cost, config.penalty(), max_len);
}

BigramModel fitBigrams(const std::vector<SymbolSequence>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty input");
  int alphabet = 0;
  for (const SymbolSequence& seq : corpus)
    alphabet = std::max(alphabet, seq.alphabet_size);
  if (alphabet < 1) throw std::invalid_argument("alphabet_size must be set");
  BigramModel model;
  model.alphabet_size = alphabet;
  // Add-one smoothing.
  Eigen::MatrixXd counts = Eigen::MatrixXd::Ones(alphabet, alphabet);
  for (const SymbolSequence& seq : corpus) {
    validate(seq);
    for (size_t t = 0; t + 1 < seq.symbols.size(); ++t)
      counts(seq.symbols[t] - 1, seq.symbols[t + 1] - 1) += 1.0;
  }
  model.prob = counts.array().colwise() / counts.rowwise().sum().array();
  return model;
}

Segmentation transitionProbSegment(const BigramModel& model,
                                   const SymbolSequence& seq) {
  validate(seq);
  if (seq.alphabet_size > model.alphabet_size)
    throw std::invalid_argument("alphabet mismatch");
  const Index t_len = seq.length();
  Segmentation seg;
  if (t_len == 1) {
    seg.spans.push_back({1, 1});
    return seg;
  }
  std::vector<double> p(static_cast<size_t>(t_len - 1));
  for (Index t = 0; t + 1 < t_len; ++t)
    p[static_cast<size_t>(t)] = model.transition(
        seq.symbols[static_cast<size_t>(t)], seq.symbols[static_cast<size_t>(t + 1)]);
  const double inf = std::numeric_limits<double>::infinity();
  Index start = 1;
  for (Index t = 0; t + 1 < t_len; ++t) {
    const double left = t == 0 ? inf : p[static_cast<size_t>(t - 1)];
    const double right = t + 2 < t_len ? p[static_cast<size_t>(t + 1)] : inf;
    const double cur = p[static_cast<size_t>(t)];
    if (cur < left && cur < right) {
      seg.spans.push_back({start, t + 1});
      start = t + 2;
    }
  }
  seg.spans.push_back({start, t_len});
  return seg;
}

std::vector<double> interiorBoundaries(const Segmentation& seg) {
  std::vector<double> out;
  for (size_t i = 0; i + 1 < seg.spans.size(); ++i)
    out.push_back(static_cast<double>(seg.spans[i].end));
  return out;
}

}  // namespace dpdp

#include "dpdp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpdp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool isExactCover(const Segmentation& seg, Index length) {
  if (seg.spans.empty()) return false;
  if (seg.spans.front().start != 1) return false;
  if (seg.spans.back().end != length) return false;
  for (size_t i = 0; i < seg.spans.size(); ++i) {
    if (seg.spans[i].end < seg.spans[i].start) return false;
    if (i > 0 && seg.spans[i].start != seg.spans[i - 1].end + 1) return false;
  }
  return true;
}

DurationPenalty DurationPenalty::none() { return DurationPenalty{}; }

DurationPenalty DurationPenalty::linear(double lambda) {
  DurationPenalty p;
  p.kind = DurationKind::kLinear;
  p.lambda = lambda;
  return p;
}

DurationPenalty DurationPenalty::gammaPmf(double lambda, double shape,
                                          double scale, int truncation) {
  if (shape <= 0.0 || scale <= 0.0 || truncation < 1)
    throw std::invalid_argument("gamma penalty needs positive parameters");
  DurationPenalty p;
  p.kind = DurationKind::kGammaPmf;
  p.lambda = lambda;
  p.gamma_shape = shape;
  p.gamma_scale = scale;
  p.truncation = truncation;
  return p;
}

double DurationPenalty::durationCost(Index length) const {
  switch (kind) {
    case DurationKind::kNone:
      return 0.0;
    case DurationKind::kLinear:
      return 1.0 - static_cast<double>(length);
    case DurationKind::kGammaPmf: {
      if (length > truncation) return kInf;
      // Unnormalized log density at the integer grid points, then the
      // log normalizer over {1..truncation}.
      auto logDensity = [&](double l) {
        return (gamma_shape - 1.0) * std::log(l) - l / gamma_scale;
      };
      double max_ld = -kInf;
      for (int l = 1; l <= truncation; ++l)
        max_ld = std::max(max_ld, logDensity(static_cast<double>(l)));
      double z = 0.0;
      for (int l = 1; l <= truncation; ++l)
        z += std::exp(logDensity(static_cast<double>(l)) - max_ld);
      double log_z = max_ld + std::log(z);
      return -(logDensity(static_cast<double>(length)) - log_z);
    }
  }
  return 0.0;
}

double DurationPenalty::combined(Index length) const {
  return lambda * durationCost(length) + segment_constant;
}

std::vector<double> DurationPenalty::table(Index max_length) const {
  std::vector<double> t(static_cast<size_t>(max_length) + 1, 0.0);
  for (Index l = 1; l <= max_length; ++l) t[static_cast<size_t>(l)] = combined(l);
  return t;
}

Segmentation dpdpSegment(Index length, const SegmentCostFn& cost,
                         const DurationPenalty& penalty, Index max_seg_len) {
  if (length < 1) throw std::invalid_argument("empty input");
  if (max_seg_len < 1) throw std::invalid_argument("max_seg_len must be >= 1");

  const std::vector<double> pen = penalty.table(std::min(max_seg_len, length));

  std::vector<double> alpha(static_cast<size_t>(length) + 1, kInf);
  std::vector<Index> back(static_cast<size_t>(length) + 1, -1);
  alpha[0] = 0.0;
  for (Index t = 1; t <= length; ++t) {
    const Index j_min = std::max<Index>(0, t - max_seg_len);
    double best = kInf;
    Index best_j = -1;
    // Ascending j with strict improvement keeps the smallest j on ties,
    // i.e. the longest final segment.
    for (Index j = j_min; j < t; ++j) {
      if (!std::isfinite(alpha[static_cast<size_t>(j)])) continue;
      const double c = alpha[static_cast<size_t>(j)] + cost(j + 1, t) +
                       pen[static_cast<size_t>(t - j)];
      if (c < best) {
        best = c;
        best_j = j;
      }
    }
    alpha[static_cast<size_t>(t)] = best;
    back[static_cast<size_t>(t)] = best_j;
  }
  if (!std::isfinite(alpha[static_cast<size_t>(length)]))
    throw std::runtime_error("no feasible segmentation");

  Segmentation seg;
  seg.total_cost = alpha[static_cast<size_t>(length)];
  for (Index t = length; t > 0; t = back[static_cast<size_t>(t)])
    seg.spans.push_back({back[static_cast<size_t>(t)] + 1, t});
  std::reverse(seg.spans.begin(), seg.spans.end());
  return seg;
}

Segmentation bruteForceSegment(Index length, const SegmentCostFn& cost,
                               const DurationPenalty& penalty,
                               Index max_seg_len) {
  if (length < 1) throw std::invalid_argument("empty input");
  if (length > 16) throw std::runtime_error("oracle size limit");

  const std::vector<double> pen = penalty.table(std::min(max_seg_len, length));

  double best_cost = kInf;
  std::vector<Span> best_spans;
  const uint32_t n_masks = 1u << (length - 1);  // bit i: boundary after i+1
  std::vector<Span> spans;
  for (uint32_t mask = 0; mask < n_masks; ++mask) {
    spans.clear();
    Index start = 1;
    bool feasible = true;
    double c = 0.0;
    for (Index t = 1; t <= length; ++t) {
      const bool boundary = (t == length) || (mask >> (t - 1) & 1u);
      if (!boundary) continue;
      if (t - start + 1 > max_seg_len) {
        feasible = false;
        break;
      }
      // Two separate additions, matching the DP's association order, so
      // equal minima compare exactly.
      c += cost(start, t);
      c += pen[static_cast<size_t>(t - start + 1)];
      spans.push_back({start, t});
      start = t + 1;
    }
    if (!feasible || !std::isfinite(c)) continue;
    if (c < best_cost) {
      best_cost = c;
      best_spans = spans;
    }
  }
  if (best_spans.empty()) throw std::runtime_error("no feasible segmentation");
  return Segmentation{std::move(best_spans), best_cost};
}

Segmentation constrainedKSegment(Index length, const SegmentCostFn& cost,
                                 Index k, Index max_seg_len) {
  if (length < 1) throw std::invalid_argument("empty input");
  if (k < 1 || k > length || k * max_seg_len < length)
    throw std::runtime_error("infeasible segment count");

  const size_t T = static_cast<size_t>(length);
  // alpha[m][t]: optimal cost covering 1..t with exactly m spans.
  std::vector<std::vector<double>> alpha(
      static_cast<size_t>(k) + 1, std::vector<double>(T + 1, kInf));
  std::vector<std::vector<Index>> back(
      static_cast<size_t>(k) + 1, std::vector<Index>(T + 1, -1));
  alpha[0][0] = 0.0;
  for (Index m = 1; m <= k; ++m) {
    for (Index t = m; t <= length; ++t) {
      const Index j_min = std::max<Index>(m - 1, t - max_seg_len);
      double best = kInf;
      Index best_j = -1;
      for (Index j = j_min; j < t; ++j) {
        const double prev = alpha[static_cast<size_t>(m - 1)][static_cast<size_t>(j)];
        if (!std::isfinite(prev)) continue;
        const double c = prev + cost(j + 1, t);
        if (c < best) {
          best = c;
          best_j = j;
        }
      }
      alpha[static_cast<size_t>(m)][static_cast<size_t>(t)] = best;
      back[static_cast<size_t>(m)][static_cast<size_t>(t)] = best_j;
    }
  }
  if (!std::isfinite(alpha[static_cast<size_t>(k)][T]))
    throw std::runtime_error("no feasible segmentation");

  Segmentation seg;
  seg.total_cost = alpha[static_cast<size_t>(k)][T];
  Index t = length;
  for (Index m = k; m > 0; --m) {
    const Index j = back[static_cast<size_t>(m)][static_cast<size_t>(t)];
    seg.spans.push_back({j + 1, t});
    t = j;
  }
  std::reverse(seg.spans.begin(), seg.spans.end());
  return seg;
}

}  // namespace dpdp

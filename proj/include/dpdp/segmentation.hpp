#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace dpdp {

using Index = Eigen::Index;

// One segment, 1-based inclusive indices into the underlying sequence.
struct Span {
  Index start = 0;
  Index end = 0;

  Index length() const { return end - start + 1; }
  friend bool operator==(const Span&, const Span&) = default;
};

// An exact cover of a sequence: spans[0].start == 1, spans[i+1].start ==
// spans[i].end + 1, spans.back().end == T.
struct Segmentation {
  std::vector<Span> spans;
  double total_cost = 0.0;

  Index size() const { return static_cast<Index>(spans.size()); }
};

bool isExactCover(const Segmentation& seg, Index length);

enum class DurationKind { kNone, kLinear, kGammaPmf };

// Duration penalty w_dur(l) plus a per-segment additive constant.  The
// combined per-segment weight handed to the DP is
//   lambda * w_dur(l) + segment_constant.
// Kinds:
//   kNone:     w_dur(l) = 0
//   kLinear:   w_dur(l) = -l + 1
//   kGammaPmf: w_dur(l) = -log p(l) with p a gamma density evaluated on
//              {1..truncation} and renormalized; infinite past truncation.
struct DurationPenalty {
  DurationKind kind = DurationKind::kNone;
  double lambda = 0.0;
  double gamma_shape = 7.0;
  double gamma_scale = 1.0;
  int truncation = 50;
  // Implements a geometric prior over the number of segments as an additive
  // per-segment cost; 0 disables it.
  double segment_constant = 0.0;

  static DurationPenalty none();
  static DurationPenalty linear(double lambda);
  static DurationPenalty gammaPmf(double lambda, double shape, double scale,
                                  int truncation = 50);

  // w_dur(length), before the lambda weight.
  double durationCost(Index length) const;
  // lambda * w_dur(length) + segment_constant.
  double combined(Index length) const;
  // combined() tabulated for lengths 1..max_length (index 0 unused).
  std::vector<double> table(Index max_length) const;
};

// Segment cost provider contract: deterministic, side-effect free, finite
// unless the provider documents an infinite-cost region.  Indices are
// 1-based inclusive.
using SegmentCostFn = std::function<double(Index a, Index b)>;

// Minimum-cost exact-cover segmentation via the forward recursion
// alpha_t = min_j { alpha_j + w(x_{j+1:t}) } with backtracking.  Ties in the
// argmin prefer the smaller j (longer final segment).  Spans never exceed
// max_seg_len.
Segmentation dpdpSegment(Index length, const SegmentCostFn& cost,
                         const DurationPenalty& penalty, Index max_seg_len);

// Exhaustive oracle for dpdpSegment; enumerates all 2^(T-1) covers.
// Guarded at T <= 16.
Segmentation bruteForceSegment(Index length, const SegmentCostFn& cost,
                               const DurationPenalty& penalty,
                               Index max_seg_len);

// Minimum-cost exact cover with exactly k spans and no duration term
// (pure segment costs), via a DP over (position, segments used).
Segmentation constrainedKSegment(Index length, const SegmentCostFn& cost,
                                 Index k, Index max_seg_len);

}  // namespace dpdp

#pragma once

#include <vector>

#include "dpdp/aernn.hpp"
#include "dpdp/features.hpp"
#include "dpdp/segmentation.hpp"

namespace dpdp {

inline constexpr double kDefaultWordLambda = 3.0;
inline constexpr Index kDefaultSymbolMaxSegLen = 50;

// Penalty configuration for symbolic word segmentation.
//   kLinear: w_dur(l) = -l + 1 at weight lambda (default 3).
//   kHsmm:   truncated-gamma duration pmf plus a geometric segment-count
//            prior as a per-segment constant; lambda is fixed at 1 so the
//            combined weight stays a valid negative log probability.
struct SymbolicSegConfig {
  enum class Variant { kLinear, kHsmm };

  Variant variant = Variant::kLinear;
  double lambda = kDefaultWordLambda;
  double gamma_shape = 7.0;
  double gamma_scale = 1.0;
  int truncation = 50;
  double geometric_continue_prob = 0.95;
  Index max_seg_len = kDefaultSymbolMaxSegLen;

  static SymbolicSegConfig linear(double lambda = kDefaultWordLambda);
  static SymbolicSegConfig hsmm(double gamma_shape = 7.0, double gamma_scale = 1.0,
                                int truncation = 50,
                                double geometric_continue_prob = 0.95);

  DurationPenalty penalty() const;
  Index effectiveMaxSegLen() const;
};

// dpdpSegment with AE-RNN reconstruction NLL segment costs; all admissible
// span costs are computed once per utterance.
Segmentation segmentSymbols(const AernnScorer& scorer, const SymbolSequence& seq,
                            const SymbolicSegConfig& config);

// Add-one-smoothed bigram transition model P(next | prev) over the alphabet.
struct BigramModel {
  Eigen::MatrixXd prob;  // alphabet x alphabet, rows sum to 1
  int alphabet_size = 0;

  double transition(int prev, int next) const {
    return prob(prev - 1, next - 1);
  }
};

BigramModel fitBigrams(const std::vector<SymbolSequence>& corpus);

// Boundary after position t when the transition probability into t+1 is a
// strict local minimum relative to both neighboring transitions (a missing
// neighbor at the utterance edge counts as infinitely high).
Segmentation transitionProbSegment(const BigramModel& model,
                                   const SymbolSequence& seq);

// Segmentation boundaries as symbol positions (span ends except the last),
// packaged for the metrics module.
std::vector<double> interiorBoundaries(const Segmentation& seg);

}  // namespace dpdp

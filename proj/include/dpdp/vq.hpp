#pragma once

#include <vector>

#include "dpdp/features.hpp"
#include "dpdp/segmentation.hpp"

namespace dpdp {

// w_seg(x_{a:b}) = min_k sum_t ||x_t - e_k||^2, served from cumulative sums
// of x_t and ||x_t||^2 so each query is O(K*D).
class VqSegmentCost {
 public:
  VqSegmentCost(const Eigen::MatrixXd& frames, const Eigen::MatrixXd& codes);

  double operator()(Index a, Index b) const;
  // 1-based index of the argmin code for the span.
  int bestCode(Index a, Index b) const;
  Index length() const { return cum_.rows() - 1; }

 private:
  Eigen::VectorXd perCode(Index a, Index b) const;

  Eigen::MatrixXd codes_;
  Eigen::VectorXd code_sq_;
  Eigen::MatrixXd cum_;      // (T+1) x D prefix sums, row 0 zero
  Eigen::VectorXd cum_sq_;   // (T+1) prefix sums of squared norms
};

// Reference implementation of the same cost by direct summation; used as
// the oracle for the cumulative-sum path.
double vqSegmentCostNaive(const Eigen::MatrixXd& frames,
                          const Eigen::MatrixXd& codes, Index a, Index b);

inline constexpr double kDefaultUnitLambda = 2.0;
inline constexpr double kVqVaeUnitLambda = 3.0;
inline constexpr Index kDefaultUnitMaxSegLen = 100;

// Joint segmentation and quantization: dpdpSegment with the VQ cost and the
// linear duration penalty at weight lambda; each span takes its argmin code.
UnitTokenization encodeUtterance(const FeatureSequence& seq,
                                 const Codebook& codebook, double lambda,
                                 Index max_seg_len = kDefaultUnitMaxSegLen);

// Nearest code id (1-based) for every frame.
std::vector<int> nearestCodes(const FeatureSequence& seq,
                              const Codebook& codebook);

// Run-length merge of a per-frame code sequence (the no-DP baseline).
UnitTokenization mergeRepeats(const std::vector<int>& frame_codes,
                              const std::string& utterance_id = {});

// Combined DP objective value of a tokenization: sum of span VQ costs plus
// the duration penalty at the given weight.
double tokenizationObjective(const UnitTokenization& units,
                             const VqSegmentCost& cost, double lambda);

}  // namespace dpdp

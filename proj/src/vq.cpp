#include "dpdp/vq.hpp"

#include <stdexcept>

namespace dpdp {

VqSegmentCost::VqSegmentCost(const Eigen::MatrixXd& frames,
                             const Eigen::MatrixXd& codes)
    : codes_(codes), code_sq_(codes.rowwise().squaredNorm()) {
  if (frames.cols() != codes.cols())
    throw std::invalid_argument("feature/codebook dimension mismatch");
  const Index t = frames.rows(), d = frames.cols();
  cum_ = Eigen::MatrixXd::Zero(t + 1, d);
  cum_sq_ = Eigen::VectorXd::Zero(t + 1);
  for (Index i = 0; i < t; ++i) {
    cum_.row(i + 1) = cum_.row(i) + frames.row(i);
    cum_sq_(i + 1) = cum_sq_(i) + frames.row(i).squaredNorm();
  }
}

Eigen::VectorXd VqSegmentCost::perCode(Index a, Index b) const {
  const Eigen::RowVectorXd s = cum_.row(b) - cum_.row(a - 1);
  const double sq = cum_sq_(b) - cum_sq_(a - 1);
  const double len = static_cast<double>(b - a + 1);
  // sum_t ||x_t - e||^2 = sum ||x_t||^2 - 2 e . sum x_t + len ||e||^2
  return (sq - 2.0 * (codes_ * s.transpose()).array() + len * code_sq_.array())
      .matrix();
}

double VqSegmentCost::operator()(Index a, Index b) const {
  return std::max(0.0, perCode(a, b).minCoeff());
}

int VqSegmentCost::bestCode(Index a, Index b) const {
  Index k = 0;
  perCode(a, b).minCoeff(&k);
  return static_cast<int>(k) + 1;
}

double vqSegmentCostNaive(const Eigen::MatrixXd& frames,
                          const Eigen::MatrixXd& codes, Index a, Index b) {
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < codes.rows(); ++k) {
    double c = 0.0;
    for (Index t = a - 1; t < b; ++t)
      c += (frames.row(t) - codes.row(k)).squaredNorm();
    best = std::min(best, c);
  }
  return best;
}

UnitTokenization encodeUtterance(const FeatureSequence& seq,
                                 const Codebook& codebook, double lambda,
                                 Index max_seg_len) {
  validate(seq);
  const VqSegmentCost cost(seq.frames, codebook.codes);
  const Segmentation seg =
      dpdpSegment(seq.length(), std::cref(cost), DurationPenalty::linear(lambda),
                  max_seg_len);
  UnitTokenization units;
  units.utterance_id = seq.utterance_id;
  for (const Span& s : seg.spans) {
    units.codes.push_back(cost.bestCode(s.start, s.end));
    units.boundaries.push_back(s.end);
  }
  return units;
}

std::vector<int> nearestCodes(const FeatureSequence& seq,
                              const Codebook& codebook) {
  validate(seq);
  if (seq.dim() != codebook.dim())
    throw std::invalid_argument("feature/codebook dimension mismatch");
  const Eigen::VectorXd code_sq = codebook.codes.rowwise().squaredNorm();
  const Eigen::MatrixXd cross = seq.frames * codebook.codes.transpose();
  std::vector<int> out(static_cast<size_t>(seq.length()));
  for (Index t = 0; t < seq.length(); ++t) {
    Index k = 0;
    (code_sq.transpose() - 2.0 * cross.row(t)).minCoeff(&k);
    out[static_cast<size_t>(t)] = static_cast<int>(k) + 1;
  }
  return out;
}

UnitTokenization mergeRepeats(const std::vector<int>& frame_codes,
                              const std::string& utterance_id) {
  if (frame_codes.empty()) throw std::invalid_argument("empty input");
  UnitTokenization units;
  units.utterance_id = utterance_id;
  for (size_t t = 0; t < frame_codes.size(); ++t) {
    if (t + 1 == frame_codes.size() || frame_codes[t + 1] != frame_codes[t]) {
      units.codes.push_back(frame_codes[t]);
      units.boundaries.push_back(static_cast<Index>(t) + 1);
    }
  }
  return units;
}

double tokenizationObjective(const UnitTokenization& units,
                             const VqSegmentCost& cost, double lambda) {
  const DurationPenalty pen = DurationPenalty::linear(lambda);
  double total = 0.0;
  Index start = 1;
  for (Index b : units.boundaries) {
    total += cost(start, b) + pen.combined(b - start + 1);
    start = b + 1;
  }
  return total;
}

}  // namespace dpdp

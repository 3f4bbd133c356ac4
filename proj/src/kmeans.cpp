#include "dpdp/kmeans.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace dpdp {

namespace {

Eigen::MatrixXd stackFrames(const std::vector<FeatureSequence>& features) {
  if (features.empty()) throw std::invalid_argument("empty input");
  const Index dim = features.front().dim();
  Index total = 0;
  for (const FeatureSequence& f : features) {
    validate(f);
    if (f.dim() != dim) throw std::invalid_argument("feature dimension mismatch");
    total += f.length();
  }
  Eigen::MatrixXd x(total, dim);
  Index row = 0;
  for (const FeatureSequence& f : features) {
    x.middleRows(row, f.length()) = f.frames;
    row += f.length();
  }
  return x;
}

// Nearest centroid per frame; returns inertia.  dist2(i,k) is expanded as
// ||x_i||^2 - 2 x_i.e_k + ||e_k||^2.
double assign(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_sq,
              const Eigen::MatrixXd& centroids, std::vector<Index>& labels,
              Eigen::VectorXd* min_dist2 = nullptr) {
  const Eigen::VectorXd c_sq = centroids.rowwise().squaredNorm();
  double inertia = 0.0;
  Eigen::MatrixXd cross = x * centroids.transpose();  // N x K
  for (Index i = 0; i < x.rows(); ++i) {
    Index best = 0;
    const double d =
        (c_sq.transpose() - 2.0 * cross.row(i)).minCoeff(&best) + x_sq(i);
    labels[static_cast<size_t>(i)] = best;
    const double d2 = std::max(0.0, d);
    if (min_dist2) (*min_dist2)(i) = d2;
    inertia += d2;
  }
  return inertia;
}

}  // namespace

KmeansResult kmeansFit(const std::vector<FeatureSequence>& features, Index k,
                       int iters, uint64_t seed) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (iters < 1) throw std::invalid_argument("iters must be positive");
  const Eigen::MatrixXd x = stackFrames(features);
  const Index n = x.rows(), dim = x.cols();
  if (n < k) throw std::invalid_argument("fewer frames than clusters");
  const Eigen::VectorXd x_sq = x.rowwise().squaredNorm();

  // Seeded init from distinct frames (distinct as vectors, not just rows).
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centroids(k, dim);
  {
    std::vector<Index> order(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Index picked = 0;
    for (Index idx : order) {
      bool dup = false;
      for (Index j = 0; j < picked && !dup; ++j)
        dup = (centroids.row(j) - x.row(idx)).squaredNorm() == 0.0;
      if (dup) continue;
      centroids.row(picked++) = x.row(idx);
      if (picked == k) break;
    }
    if (picked < k)
      throw std::invalid_argument("fewer distinct frames than clusters");
  }

  KmeansResult result;
  std::vector<Index> labels(static_cast<size_t>(n));
  Eigen::VectorXd min_dist2(n);
  for (int it = 0; it < iters; ++it) {
    result.inertia.push_back(assign(x, x_sq, centroids, labels, &min_dist2));

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<size_t>(i)]) += x.row(i);
      counts(labels[static_cast<size_t>(i)]) += 1.0;
    }
    for (Index c = 0; c < k; ++c) {
      if (counts(c) > 0.0) {
        centroids.row(c) = sums.row(c) / counts(c);
      } else {
        // Re-seed from the farthest frame so no cluster stays empty.
        Index far = 0;
        min_dist2.maxCoeff(&far);
        centroids.row(c) = x.row(far);
        min_dist2(far) = 0.0;
      }
    }
  }

  result.codebook.codes = centroids;
  result.codebook.trained_on = "kmeans";
  validate(result.codebook);
  return result;
}

}  // namespace dpdp

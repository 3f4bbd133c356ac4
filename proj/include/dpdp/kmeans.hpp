#pragma once

#include <cstdint>
#include <vector>

#include "dpdp/features.hpp"

namespace dpdp {

struct KmeansResult {
  Codebook codebook;
  // Inertia (sum of squared distances to the assigned centroid) after each
  // assignment pass; non-increasing under Lloyd updates.
  std::vector<double> inertia;
};

// Lloyd's algorithm with seeded random-frame initialization.  Empty clusters
// are re-seeded from the frame farthest from its assigned centroid.
KmeansResult kmeansFit(const std::vector<FeatureSequence>& features, Index k,
                       int iters, uint64_t seed);

}  // namespace dpdp

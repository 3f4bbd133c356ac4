#pragma once

#include <functional>

#include <Eigen/Core>

namespace dpdp {

// Runs fn(0..n-1) on a small worker pool.  Work items must be independent;
// results should be written to pre-sized slots so output order does not
// depend on scheduling.
void parallelFor(Eigen::Index n, int workers,
                 const std::function<void(Eigen::Index)>& fn);

}  // namespace dpdp

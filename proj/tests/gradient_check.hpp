#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dpdp/aernn.hpp"

namespace dpdp::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  std::string worst;
};

// Central finite differences against the analytic gradient on randomly
// sampled parameters, at a freshly initialized network.
inline GradCheckResult gradientCheck(const AernnHyper& hyper, uint64_t seed,
                                     int n_samples,
                                     const std::vector<std::vector<int>>& corpus,
                                     double h = 1e-4) {
  AernnParams params = makeParams(hyper, seed);
  std::vector<const std::vector<int>*> batch;
  for (const auto& seq : corpus) batch.push_back(&seq);

  AernnParams grads = zeroParams(hyper);
  aernnLossAndGrad(hyper, params, batch, &grads);

  std::vector<Eigen::MatrixXd*> p_tensors, g_tensors;
  std::vector<std::string> names;
  visitTensors(params, [&](const std::string& name, Eigen::MatrixXd& t) {
    p_tensors.push_back(&t);
    names.push_back(name);
  });
  visitTensors(grads, [&](const std::string&, Eigen::MatrixXd& t) {
    g_tensors.push_back(&t);
  });

  Eigen::Index total = 0;
  for (const auto* t : p_tensors) total += t->size();

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  GradCheckResult result;
  for (int s = 0; s < n_samples; ++s) {
    Eigen::Index flat = static_cast<Eigen::Index>(rng() % static_cast<uint64_t>(total));
    size_t ti = 0;
    while (flat >= p_tensors[ti]->size()) flat -= p_tensors[ti++]->size();
    double& entry = p_tensors[ti]->data()[flat];
    const double saved = entry;
    entry = saved + h;
    const double up = aernnLossAndGrad(hyper, params, batch, nullptr);
    entry = saved - h;
    const double down = aernnLossAndGrad(hyper, params, batch, nullptr);
    entry = saved;
    const double fd = (up - down) / (2.0 * h);
    const double an = g_tensors[ti]->data()[flat];
    // Central differences bottom out at eps*|loss|/h (~1e-9 absolute here),
    // so entries below the floor are held to an absolute 1e-7 instead of a
    // meaningless ratio of two noise-level numbers.
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
    const double rel = std::abs(fd - an) / denom;
    ++result.checked;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst = names[ti] + "[" + std::to_string(flat) + "]";
    }
  }
  return result;
}

}  // namespace dpdp::testing

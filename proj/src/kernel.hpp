#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "estimator.hpp"

namespace vfwave {

// Comparison estimator: Nadaraya-Watson smoothing of the squared
// differences with an Epanechnikov kernel, bandwidth picked by
// leave-one-out cross-validation on a geometric grid.
struct KernelConfig {
  std::size_t bandwidth_count = 30;  // H

  // Geometric grid in [2/n, 0.5] with H points; n is the sample count.
  std::vector<double> bandwidth_grid(std::size_t n) const;
};

// Nadaraya-Watson estimate at each x in x_eval from data (u_i, dsq_i) with
// u_i = i/len(dsq); weights K(t) = 0.75 (1 - t^2)_+, renormalized so they
// sum to 1 at every evaluation point. Throws when some evaluation point has
// no kernel mass.
std::vector<double> nw_smooth(std::span<const double> dsq, double h,
                              std::span<const double> x_eval);

// Leave-one-out CV over config's grid; returns the minimizing bandwidth,
// ties toward the smaller one. Bandwidths whose LOO fit is undefined
// somewhere are skipped; throws when all of them are.
double select_bandwidth(std::span<const double> dsq, const KernelConfig& config,
                        std::size_t n);

// Full baseline: both difference halves smoothed with their CV bandwidths
// and averaged on the n/2 grid. The returned pyramid is empty.
VarianceEstimate kernel_estimate(std::span<const double> y, const KernelConfig& config);

}  // namespace vfwave

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wavelet.hpp"

namespace vfwave {

enum class Parity { even, odd };
enum class Truncation { all_levels, theoretical };
enum class OddBoundary { wrap, drop };
enum class Half { even, odd, combined };

// Every tunable of the variance-function estimator. Natural logarithms are
// used throughout; threshold_scale is the knob for experimenting with other
// conventions.
struct EstimatorConfig {
  std::string filter_name = "symmlet8";
  int j0 = 3;                   // coarsest resolution level
  double block_exponent = 0.5;  // r in (0,1), block length floor((n/2)^r)
  Truncation truncation = Truncation::all_levels;
  double threshold_scale = 1.0;
  OddBoundary odd_boundary = OddBoundary::wrap;
  bool clamp_nonnegative = false;  // clamp the reported estimate at 0

  void validate() const;  // throws std::invalid_argument
};

// First-order differences D_i = (y_{2i-1} - y_{2i})/sqrt(2) (even parity)
// or D'_i = (y_{2i} - y_{2i+1})/sqrt(2) (odd parity). The odd half needs
// y_{n+1}: under wrap it reuses y_1, under drop the sequence is truncated
// to the largest power of two that fits.
std::vector<double> pair_differences(std::span<const double> y, Parity parity,
                                     OddBoundary boundary);

// Piecewise-constant estimate of Var(D_i^2) from second-order differences
// of the squared differences, deliberately inflated by 1/(1 - 1/(2 log n)).
struct VarD2Table {
  std::vector<double> values;       // one entry per index, constant on blocks
  std::size_t block_length = 0;     // floor((n/2)^r)
  std::size_t block_count = 0;      // K; a partial tail is merged into block K
  std::vector<std::size_t> bounds;  // K+1 ascending block offsets
};

VarD2Table block_var_d2(std::span<const double> dsq, double r, std::size_t n);

// Builds a conforming table from externally supplied per-block values
// (testing / experimentation); validates block constancy.
VarD2Table make_var_d2_table(std::vector<double> values, std::size_t block_length);

// Standard deviations of the empirical wavelet coefficients:
// sd(j,k) = sqrt((2/n) * sum_i W^2_{(j,k),i} * Var(D_i^2)), in the flat
// coefficient order of the pyramid.
std::vector<double> coefficient_sds(const VarD2Table& table,
                                    const RowEnergyTable& rows, std::size_t n);

// sgn(y) * (|y| - t)_+
double soft_threshold(double y, double t);

// Soft-thresholds the detail coefficients with per-coefficient thresholds
// sd(j,k) * sqrt(2 log(n/2)) * threshold_scale, zeroing levels above the
// truncation cut. The scaling block is left untouched (it goes through
// berger_shrink instead).
CoefficientPyramid threshold_pyramid(const CoefficientPyramid& pyramid,
                                     std::span<const double> sds, std::size_t n,
                                     const EstimatorConfig& config);

// Largest level j with 2^j <= 2^J / J^3 where J = log2(n); -1 when none.
int theoretical_cut(std::size_t n);

struct SymMatrix {
  std::size_t dim = 0;
  std::vector<double> data;  // row-major dim x dim

  static SymMatrix zero(std::size_t dim) { return {dim, std::vector<double>(dim * dim, 0.0)}; }
  double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
};

// Estimated covariance of the coarse scaling coefficients:
// cov_{ab} = (2/n) * sum_i W_{(j0,a),i} W_{(j0,b),i} * Var(D_i^2).
SymMatrix coarse_covariance(const RowEnergyTable& rows, const VarD2Table& table,
                            std::size_t n);

// Covariance-weighted shrinkage of the coarse coefficient vector (Berger
// 1976): d - min{d'C^-1 d, m-2} / (d'C^-1 C^-1 d) * C^-1 d, evaluated with
// linear solves. A singular or ill-conditioned C (condition > 1e12) gets
// eps * trace/m added to its diagonal first, eps = 1e-10.
std::vector<double> berger_shrink(std::span<const double> coarse,
                                  const SymMatrix& cov);

struct VarianceEstimate {
  std::vector<double> grid_values;  // estimate at x = 2i/n
  CoefficientPyramid pyramid;       // denoised coefficients (halves: own;
                                    // combined: average of the two halves)
  Half half = Half::combined;
  EstimatorConfig config;
  std::size_t n = 0;  // original sample count

  std::vector<double> grid() const;  // the x values matching grid_values
};

// One half of the estimator: difference, square, transform, threshold,
// shrink, invert. The odd half under drop boundary covers only the first
// quarter of the sample and is shorter.
VarianceEstimate estimate_half(std::span<const double> y, Parity parity,
                               const EstimatorConfig& config);

// Final estimator: pointwise average of the even and odd halves on the
// n/2-point grid. Under drop boundary the odd half is averaged in on the
// indices it covers and the even half is used alone elsewhere.
VarianceEstimate estimate(std::span<const double> y, const EstimatorConfig& config);

// Value at the grid point nearest to x_star, ties toward the smaller index.
double point_estimate(const VarianceEstimate& est, double x_star);

}  // namespace vfwave

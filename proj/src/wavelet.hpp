#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace vfwave {

// Orthonormal conjugate-quadrature filter pair. Only the lowpass half is
// stored; the highpass is always derived as g_k = (-1)^k h_{L-1-k}.
struct WaveletFilter {
  std::string name;
  std::vector<double> lowpass;  // even length, sum = sqrt(2)
  int nvanish = 0;              // vanishing moments of the wavelet
  bool coiflet = false;         // scaling function also has vanishing moments

  std::vector<double> highpass() const;
};

// Supported: haar, daub4, daub8, symmlet8, coiflet3 (standard published
// coefficient tables, refined to full double precision).
WaveletFilter build_filter(const std::string& name);
const std::vector<std::string>& supported_filters();

// Multi-level coefficient layout of the periodized orthonormal DWT of a
// signal of dyadic length. details[l] holds level j0+l with 2^(j0+l)
// entries; the finest level is log2(n_signal) - 1. In the flat layout the
// scaling block occupies [0, 2^j0) and detail (j,k) sits at index 2^j + k.
struct CoefficientPyramid {
  int j0 = 0;
  std::size_t n_signal = 0;
  std::vector<double> scaling;
  std::vector<std::vector<double>> details;

  int jmax() const { return j0 + static_cast<int>(details.size()) - 1; }
  std::size_t coefficient_count() const;
  void validate() const;

  std::vector<double> flatten() const;
  static CoefficientPyramid unflatten(std::span<const double> flat, int j0);
};

// Pyramid analysis/synthesis with circular (periodic) boundary handling at
// every level. inverse_dwt is the exact left inverse of forward_dwt.
CoefficientPyramid forward_dwt(std::span<const double> signal,
                               const WaveletFilter& filter, int j0);
std::vector<double> inverse_dwt(const CoefficientPyramid& pyramid,
                                const WaveletFilter& filter);

// Squared rows of the transform matrix W (every row sums to 1), plus the
// signed coarse rows, built by transforming canonical basis vectors. Used
// to propagate per-point variances of the input into coefficient variances.
class RowEnergyTable {
 public:
  RowEnergyTable() = default;
  RowEnergyTable(RowEnergyTable&&) = default;
  RowEnergyTable& operator=(RowEnergyTable&&) = default;

  std::size_t n_signal = 0;
  int j0 = 0;
  std::vector<std::vector<double>> squared;      // flat row index -> length n_signal
  std::vector<std::vector<double>> coarse_rows;  // signed, 2^j0 rows

  // Sums of squared-row entries over the contiguous index blocks described
  // by `bounds` (K+1 ascending offsets). Memoized per partition; safe for
  // concurrent callers.
  const std::vector<std::vector<double>>& block_sums(
      std::span<const std::size_t> bounds) const;

 private:
  struct SumCache {
    std::mutex mu;
    std::map<std::vector<std::size_t>, std::vector<std::vector<double>>> by_bounds;
  };
  mutable std::unique_ptr<SumCache> sums_ = std::make_unique<SumCache>();
};

RowEnergyTable row_energy_table(const WaveletFilter& filter,
                                std::size_t n_signal, int j0);

// Process-wide table cache keyed by (filter, n_signal, j0); concurrent
// lookups are safe, the first caller for a key builds the table.
std::shared_ptr<const RowEnergyTable> cached_row_table(
    const WaveletFilter& filter, std::size_t n_signal, int j0);

bool is_power_of_two(std::size_t n);
int log2_exact(std::size_t n);

}  // namespace vfwave

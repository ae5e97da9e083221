#include "selftest.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "estimator.hpp"
#include "harness.hpp"
#include "kernel.hpp"
#include "synthesize.hpp"
#include "wavelet.hpp"

namespace vfwave {

namespace {

struct Runner {
  const std::function<void(const std::string&)>& emit;
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::ostringstream line;
    line << (ok ? "PASS " : "FAIL ") << name;
    if (!ok && !detail.empty()) line << " (" << detail << ")";
    emit(line.str());
    if (!ok) ++failures;
  }
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int selftest(const std::function<void(const std::string&)>& emit) {
  Runner t{emit};
  std::mt19937_64 rng(20250810);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // filter invariants
  for (const auto& name : supported_filters()) {
    const auto f = build_filter(name);
    const auto& h = f.lowpass;
    double sum = 0.0;
    for (const double v : h) sum += v;
    double worst = std::abs(sum - std::numbers::sqrt2);
    for (std::size_t m = 0; 2 * m < h.size(); ++m) {
      double dot = 0.0;
      for (std::size_t k = 0; k + 2 * m < h.size(); ++k) dot += h[k] * h[k + 2 * m];
      worst = std::max(worst, std::abs(dot - (m == 0 ? 1.0 : 0.0)));
    }
    t.check("filter invariants: " + name, worst < 1e-12);
  }

  // round trip + energy on random signals
  for (const auto& name : supported_filters()) {
    const auto f = build_filter(name);
    double worst_rt = 0.0, worst_energy = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> x(256);
      double energy = 0.0;
      for (auto& v : x) {
        v = gauss(rng);
        energy += v * v;
      }
      const auto pyr = forward_dwt(x, f, 3);
      const auto back = inverse_dwt(pyr, f);
      worst_rt = std::max(worst_rt, max_abs_diff(x, back));
      double cenergy = 0.0;
      for (const double c : pyr.flatten()) cenergy += c * c;
      worst_energy = std::max(worst_energy, std::abs(cenergy - energy) / energy);
    }
    t.check("perfect reconstruction: " + name, worst_rt < 1e-9);
    t.check("energy preservation: " + name, worst_energy < 1e-9);
  }

  {  // haar hand cases
    const auto haar = build_filter("haar");
    const std::vector<double> ones{1, 1, 1, 1};
    auto pyr = forward_dwt(ones, haar, 0);
    bool ok = std::abs(pyr.scaling[0] - 2.0) < 1e-12;
    for (const auto& lvl : pyr.details)
      for (const double d : lvl) ok = ok && std::abs(d) < 1e-12;
    t.check("haar constant signal", ok);

    const std::vector<double> pm{1, -1};
    pyr = forward_dwt(pm, haar, 0);
    t.check("haar antisymmetric signal",
            std::abs(pyr.scaling[0]) < 1e-12 &&
                std::abs(pyr.details[0][0] - std::numbers::sqrt2) < 1e-12);
  }

  {  // row energies
    const auto f = build_filter("symmlet8");
    const auto table = row_energy_table(f, 64, 3);
    double worst = 0.0;
    for (const auto& row : table.squared) {
      double s = 0.0;
      for (const double v : row) s += v;
      worst = std::max(worst, std::abs(s - 1.0));
    }
    t.check("row energies sum to one", worst < 1e-10);
  }

  {  // soft threshold
    t.check("soft threshold",
            soft_threshold(2.5, 1.0) == 1.5 && soft_threshold(-0.5, 1.0) == 0.0 &&
                soft_threshold(-3.0, 1.0) == -2.0 && soft_threshold(0.7, 0.0) == 0.7);
  }

  {  // pair differences
    const std::vector<double> y{3, 1, 5, 5, 3, 1, 5, 5};
    const auto even = pair_differences(y, Parity::even, OddBoundary::wrap);
    const auto odd = pair_differences(y, Parity::odd, OddBoundary::wrap);
    const double rt2 = std::numbers::sqrt2;
    t.check("pair differences",
            std::abs(even[0] - rt2) < 1e-12 && std::abs(even[1]) < 1e-12 &&
                std::abs(odd[0] + 2 * rt2) < 1e-12 &&
                std::abs(odd.back() - (5.0 - 3.0) / rt2) < 1e-12);
  }

  {  // block variance hand case
    const std::vector<double> dsq{1, 3, 1, 3, 1, 3, 1, 3};
    const auto table = block_var_d2(dsq, 2.0 / 3.0, 16);
    const double expect = 2.0 * 8.0 / (4.0 * (2.0 - 1.0 / std::log(16.0)));
    t.check("block variance hand case",
            table.block_length == 4 && table.block_count == 2 &&
                std::abs(table.values[0] - expect) < 1e-12 &&
                std::abs(table.values[7] - expect) < 1e-12);

    const std::vector<double> flat(32, 2.5);
    const auto zero_table = block_var_d2(flat, 0.5, 64);
    double worst = 0.0;
    for (const double v : zero_table.values) worst = std::max(worst, std::abs(v));
    t.check("block variance on constant squares", worst == 0.0);
  }

  {  // shrinkage of coarse coefficients, identity covariance cases
    auto cov = SymMatrix::zero(8);
    for (std::size_t i = 0; i < 8; ++i) cov.at(i, i) = 1.0;
    const std::vector<double> big(8, 2.0);
    const auto shrunk = berger_shrink(big, cov);
    bool ok = true;
    for (const double v : shrunk) ok = ok && std::abs(v - 1.625) < 1e-12;
    const std::vector<double> small(8, 0.1);
    const auto zeroed = berger_shrink(small, cov);
    for (const double v : zeroed) ok = ok && std::abs(v) < 1e-12;
    t.check("coarse shrinkage identity-covariance cases", ok);
  }

  {  // variance oracles
    const auto f0 = [](double) { return 0.0; };
    const auto v1c = [](double) { return 1.0; };
    const NoiseModel gaussian{NoiseName::gaussian};
    t.check("chi-square variance oracle",
            std::abs(oracle_var_d2(f0, v1c, 4096, 7, gaussian) - 2.0) < 1e-12);
    const NoiseModel rademacher{NoiseName::rademacher};
    const double mc = oracle_var_d2_mc(f0, v1c, 4096, 7, rademacher, 200000, 99);
    t.check("rademacher MC oracle near 1", std::abs(mc - 1.0) < 0.02);
  }

  {  // estimator equivariance on one synthetic sample
    const NoiseModel gaussian{NoiseName::gaussian};
    const auto sample = synthesize(MeanId::sin20, VarId::v2, 512, gaussian, 424242);
    EstimatorConfig config;
    const auto base = estimate(sample.y, config);

    std::vector<double> shifted = sample.y;
    for (auto& v : shifted) v += 3.25;
    const auto shifted_est = estimate(shifted, config);
    t.check("mean-shift invariance",
            max_abs_diff(base.grid_values, shifted_est.grid_values) < 1e-12);

    std::vector<double> scaled = sample.y;
    for (auto& v : scaled) v *= 2.0;
    const auto scaled_est = estimate(scaled, config);
    double worst = 0.0;
    for (std::size_t i = 0; i < scaled_est.grid_values.size(); ++i)
      worst = std::max(worst, std::abs(scaled_est.grid_values[i] -
                                       4.0 * base.grid_values[i]));
    const double scale_ref = 1.0 + std::abs(4.0 * base.wavelet_scale_ref());
    t.check("scale equivariance (c^2 law)", worst / scale_ref < 1e-9);

    const auto rerun = estimate(sample.y, config);
    t.check("determinism", max_abs_diff(base.grid_values, rerun.grid_values) == 0.0);
  }

  {  // kernel smoother basics
    const std::vector<double> flat(64, 3.5);
    std::vector<double> grid(64);
    for (std::size_t i = 0; i < 64; ++i) grid[i] = (i + 1) / 64.0;
    const auto smooth = nw_smooth(flat, 0.1, grid);
    double worst = 0.0;
    for (const double v : smooth) worst = std::max(worst, std::abs(v - 3.5));
    t.check("kernel smoother reproduces constants", worst < 1e-12);

    KernelConfig kc;
    const double h = select_bandwidth(flat, kc, 128);
    const auto bw = kc.bandwidth_grid(128);
    double smallest_feasible = bw[1];
    t.check("cv tie-break on constant data", std::abs(h - smallest_feasible) < 1e-15);
  }

  {  // risk metrics
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{1, 2, 3, 4};
    std::vector<double> c{2, 3, 4, 5};
    t.check("mise trivial cases",
            mise(a, b) == 0.0 && std::abs(mise(c, a) - 1.0) < 1e-15);
  }

  return t.failures;
}

}  // namespace vfwave

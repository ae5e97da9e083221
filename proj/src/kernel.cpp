#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vfwave {

namespace {

// Window sums of {1, u, u^2} * y over the data indices covered by
// [x - h, x + h]. Two evaluation strategies with identical results: direct
// summation for narrow windows, prefix sums for wide ones (the prefix
// expansion loses ~eps/h^3 relative accuracy, harmless once windows are
// hundreds of points wide).
struct SmoothPlan {
  std::span<const double> y;
  double h = 0.0;
  std::size_t count = 0;  // data length
  std::vector<double> p0, p1, p2;  // prefix sums of y, u*y, u^2*y
  bool use_prefix = false;

  SmoothPlan(std::span<const double> data, double bandwidth)
      : y(data), h(bandwidth), count(data.size()) {
    use_prefix = h * static_cast<double>(count) >= 128.0;
    if (!use_prefix) return;
    p0.assign(count + 1, 0.0);
    p1.assign(count + 1, 0.0);
    p2.assign(count + 1, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = static_cast<double>(i + 1) / static_cast<double>(count);
      p0[i + 1] = p0[i] + y[i];
      p1[i + 1] = p1[i] + u * y[i];
      p2[i + 1] = p2[i] + u * u * y[i];
    }
  }

  // numerator sum K((u-x)/h) y_i and denominator sum K((u-x)/h), with an
  // optional excluded index (for leave-one-out)
  void sums(double x, double* num, double* den,
            std::size_t skip = std::numeric_limits<std::size_t>::max()) const {
    const double nn = static_cast<double>(count);
    auto lo_f = std::ceil((x - h) * nn);
    auto hi_f = std::floor((x + h) * nn);
    std::size_t lo = lo_f < 1.0 ? 1 : static_cast<std::size_t>(lo_f);
    std::size_t hi = hi_f > nn ? count : (hi_f < 1.0 ? 0 : static_cast<std::size_t>(hi_f));
    if (hi < lo) {
      *num = 0.0;
      *den = 0.0;
      return;
    }
    const double inv_h2 = 1.0 / (h * h);
    double sn = 0.0, sd = 0.0;
    if (use_prefix) {
      const double s0 = p0[hi] - p0[lo - 1];
      const double s1 = p1[hi] - p1[lo - 1];
      const double s2 = p2[hi] - p2[lo - 1];
      sn = 0.75 * ((1.0 - x * x * inv_h2) * s0 + 2.0 * x * inv_h2 * s1 - inv_h2 * s2);
      // sum of i and i^2 over [lo, hi] in closed form (exact below 2^53)
      const auto t1 = [](double m) { return m * (m + 1.0) / 2.0; };
      const auto t2 = [](double m) { return m * (m + 1.0) * (2.0 * m + 1.0) / 6.0; };
      const double cnt = static_cast<double>(hi - lo + 1);
      const double su = (t1(static_cast<double>(hi)) - t1(static_cast<double>(lo) - 1.0)) / nn;
      const double su2 =
          (t2(static_cast<double>(hi)) - t2(static_cast<double>(lo) - 1.0)) / (nn * nn);
      sd = 0.75 * ((1.0 - x * x * inv_h2) * cnt + 2.0 * x * inv_h2 * su - inv_h2 * su2);
    } else {
      for (std::size_t i = lo; i <= hi; ++i) {
        const double u = static_cast<double>(i) / nn;
        const double t = (u - x) / h;
        const double w = 0.75 * (1.0 - t * t);
        sn += w * y[i - 1];
        sd += w;
      }
    }
    if (skip + 1 >= lo && skip + 1 <= hi && skip < count) {
      const double u = static_cast<double>(skip + 1) / nn;
      const double t = (u - x) / h;
      const double w = 0.75 * (1.0 - t * t);
      sn -= w * y[skip];
      sd -= w;
    }
    *num = sn;
    *den = sd;
  }
};

}  // namespace

std::vector<double> KernelConfig::bandwidth_grid(std::size_t n) const {
  if (bandwidth_count < 2)
    throw std::invalid_argument("kernel config: need at least 2 bandwidths");
  const double lo = 2.0 / static_cast<double>(n);
  const double hi = 0.5;
  if (lo >= hi) throw std::invalid_argument("kernel config: n too small for the grid");
  std::vector<double> grid(bandwidth_count);
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(bandwidth_count - 1));
  double h = lo;
  for (std::size_t t = 0; t < bandwidth_count; ++t, h *= ratio) grid[t] = h;
  grid.back() = hi;
  return grid;
}

std::vector<double> nw_smooth(std::span<const double> dsq, double h,
                              std::span<const double> x_eval) {
  if (!(h > 0.0)) throw std::invalid_argument("nw_smooth: bandwidth must be positive");
  if (dsq.empty()) throw std::invalid_argument("nw_smooth: empty data");
  SmoothPlan plan(dsq, h);
  std::vector<double> out(x_eval.size());
  for (std::size_t j = 0; j < x_eval.size(); ++j) {
    double num = 0.0, den = 0.0;
    plan.sums(x_eval[j], &num, &den);
    if (!(den > 0.0))
      throw std::runtime_error("nw_smooth: no kernel mass at evaluation point");
    out[j] = num / den;
  }
  return out;
}

namespace {

// LOO score for one bandwidth; false when some point loses all kernel mass.
bool loo_score(std::span<const double> dsq, double h, double* score) {
  SmoothPlan plan(dsq, h);
  const std::size_t count = dsq.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(count);
    double num = 0.0, den = 0.0;
    plan.sums(x, &num, &den, i);
    if (!(den > 0.0)) return false;
    const double resid = dsq[i] - num / den;
    acc += resid * resid;
  }
  *score = acc;
  return true;
}

}  // namespace

double select_bandwidth(std::span<const double> dsq, const KernelConfig& config,
                        std::size_t n) {
  if (dsq.size() < 16)
    throw std::invalid_argument("select_bandwidth: need at least 16 observations");
  const auto grid = config.bandwidth_grid(n);
  double best_h = -1.0, best_score = 0.0;
  for (const double h : grid) {
    double score = 0.0;
    if (!loo_score(dsq, h, &score)) continue;
    if (best_h < 0.0 || score < best_score) {  // strict: ties keep the smaller h
      best_h = h;
      best_score = score;
    }
  }
  if (best_h < 0.0)
    throw std::runtime_error("select_bandwidth: every bandwidth in the grid is infeasible");
  return best_h;
}

VarianceEstimate kernel_estimate(std::span<const double> y, const KernelConfig& config) {
  const std::size_t n = y.size();
  if (!is_power_of_two(n))
    throw std::invalid_argument("kernel_estimate: sample size must be a power of two");

  std::vector<double> combined;
  for (const Parity parity : {Parity::even, Parity::odd}) {
    const auto diffs = pair_differences(y, parity, OddBoundary::wrap);
    std::vector<double> dsq(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) dsq[i] = diffs[i] * diffs[i];
    const double h = select_bandwidth(dsq, config, n);
    std::vector<double> grid(dsq.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = static_cast<double>(i + 1) / static_cast<double>(grid.size());
    auto smooth = nw_smooth(dsq, h, grid);
    if (combined.empty()) {
      combined = std::move(smooth);
    } else {
      for (std::size_t i = 0; i < combined.size(); ++i)
        combined[i] = 0.5 * (combined[i] + smooth[i]);
    }
  }

  VarianceEstimate est;
  est.grid_values = std::move(combined);
  est.half = Half::combined;
  est.n = n;
  return est;
}

}  // namespace vfwave

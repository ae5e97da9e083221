#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "testfuncs.hpp"

namespace vfwave {

enum class NoiseName { gaussian, rademacher, uniform };

// Zero-mean unit-variance noise families with their third/fourth moments.
struct NoiseModel {
  NoiseName name = NoiseName::gaussian;

  double u3() const;
  double u4() const;
  double draw(std::mt19937_64& rng) const;
};

NoiseModel parse_noise(const std::string& name);
std::string to_string(NoiseName name);

// Substream derivation: master seed, a canonical cell label, and the
// replication index map to one generator seed via splitmix64 mixing. The
// rule is fixed so that runs are reproducible and replications never share
// a stream.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view cell_id,
                                 std::uint64_t rep);

struct RegressionSample {
  std::size_t n = 0;
  MeanId mean_id = MeanId::zero;
  VarId var_id = VarId::v1;
  std::uint64_t stream_seed = 0;
  std::vector<double> y;  // y_i at x_i = i/n, i = 1..n
};

// y_i = f(i/n) + sqrt(V(i/n)) z_i with the normalized variance function.
RegressionSample synthesize(MeanId mean_id, VarId var_id, std::size_t n,
                            const NoiseModel& noise, std::uint64_t stream_seed);

// Low-level hook: arbitrary mean/variance functions and injected z draws.
std::vector<double> synthesize_with_z(const std::function<double(double)>& f,
                                      const std::function<double(double)>& v,
                                      std::span<const double> z);

// Exact Var(D_i^2) for gaussian noise: 2 Vi^2 + 2 delta_i^2 Vi with
// Vi = (V(x_{2i-1}) + V(x_{2i}))/2 and delta_i = f(x_{2i-1}) - f(x_{2i});
// i is the 1-based pair index. Throws for non-gaussian noise (use the MC
// oracle there).
double oracle_var_d2(const std::function<double(double)>& f,
                     const std::function<double(double)>& v, std::size_t n,
                     std::size_t i, const NoiseModel& noise);

// Empirical variance of D_i^2 over `reps` independent draws; se_out, when
// given, receives the Monte Carlo standard error of the variance estimate.
double oracle_var_d2_mc(const std::function<double(double)>& f,
                        const std::function<double(double)>& v, std::size_t n,
                        std::size_t i, const NoiseModel& noise, std::size_t reps,
                        std::uint64_t seed, double* se_out = nullptr);

}  // namespace vfwave

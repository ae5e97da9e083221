#include "synthesize.hpp"

#include "wavelet.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vfwave {

namespace {
const double kRoot3 = std::sqrt(3.0);
}

double NoiseModel::u3() const { return 0.0; }

double NoiseModel::u4() const {
  switch (name) {
    case NoiseName::gaussian: return 3.0;
    case NoiseName::rademacher: return 1.0;
    case NoiseName::uniform: return 9.0 / 5.0;
  }
  return 3.0;
}

double NoiseModel::draw(std::mt19937_64& rng) const {
  switch (name) {
    case NoiseName::gaussian: {
      std::normal_distribution<double> dist(0.0, 1.0);
      return dist(rng);
    }
    case NoiseName::rademacher:
      return (rng() & 1u) ? 1.0 : -1.0;
    case NoiseName::uniform: {
      std::uniform_real_distribution<double> dist(-kRoot3, kRoot3);
      return dist(rng);
    }
  }
  return 0.0;
}

NoiseModel parse_noise(const std::string& name) {
  if (name == "gaussian") return {NoiseName::gaussian};
  if (name == "rademacher") return {NoiseName::rademacher};
  if (name == "uniform") return {NoiseName::uniform};
  throw std::invalid_argument("unknown noise model '" + name +
                              "'; supported: gaussian rademacher uniform");
}

std::string to_string(NoiseName name) {
  switch (name) {
    case NoiseName::gaussian: return "gaussian";
    case NoiseName::rademacher: return "rademacher";
    case NoiseName::uniform: return "uniform";
  }
  return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view cell_id,
                                 std::uint64_t rep) {
  // FNV-1a over the cell label, then two splitmix rounds folding in the
  // master seed and the replication index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : cell_id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(splitmix64(master) ^ h) ^ rep);
}

RegressionSample synthesize(MeanId mean_id, VarId var_id, std::size_t n,
                            const NoiseModel& noise, std::uint64_t stream_seed) {
  if (!is_power_of_two(n))
    throw std::invalid_argument("synthesize: n must be a power of two");
  RegressionSample sample;
  sample.n = n;
  sample.mean_id = mean_id;
  sample.var_id = var_id;
  sample.stream_seed = stream_seed;
  sample.y.resize(n);

  std::mt19937_64 rng(stream_seed);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    const double var = normalized_variance(var_id, x);
    if (var < 0.0)
      throw std::logic_error("synthesize: normalized variance went negative");
    sample.y[i - 1] = eval_mean(mean_id, x) + std::sqrt(var) * noise.draw(rng);
  }
  return sample;
}

std::vector<double> synthesize_with_z(const std::function<double(double)>& f,
                                      const std::function<double(double)>& v,
                                      std::span<const double> z) {
  const std::size_t n = z.size();
  std::vector<double> y(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    const double var = v(x);
    if (var < 0.0) throw std::invalid_argument("synthesize_with_z: negative variance");
    y[i - 1] = f(x) + std::sqrt(var) * z[i - 1];
  }
  return y;
}

double oracle_var_d2(const std::function<double(double)>& f,
                     const std::function<double(double)>& v, std::size_t n,
                     std::size_t i, const NoiseModel& noise) {
  if (noise.name != NoiseName::gaussian)
    throw std::invalid_argument(
        "oracle_var_d2: closed form holds for gaussian noise only; use the MC oracle");
  if (i < 1 || 2 * i > n) throw std::invalid_argument("oracle_var_d2: pair index out of range");
  const double x1 = static_cast<double>(2 * i - 1) / static_cast<double>(n);
  const double x2 = static_cast<double>(2 * i) / static_cast<double>(n);
  const double vi = 0.5 * (v(x1) + v(x2));
  const double delta = f(x1) - f(x2);
  return 2.0 * vi * vi + 2.0 * delta * delta * vi;
}

double oracle_var_d2_mc(const std::function<double(double)>& f,
                        const std::function<double(double)>& v, std::size_t n,
                        std::size_t i, const NoiseModel& noise, std::size_t reps,
                        std::uint64_t seed, double* se_out) {
  if (reps < 10000) throw std::invalid_argument("oracle_var_d2_mc: need reps >= 10^4");
  if (i < 1 || 2 * i > n) throw std::invalid_argument("oracle_var_d2_mc: pair index out of range");
  const double x1 = static_cast<double>(2 * i - 1) / static_cast<double>(n);
  const double x2 = static_cast<double>(2 * i) / static_cast<double>(n);
  const double f1 = f(x1), f2 = f(x2);
  const double s1 = std::sqrt(v(x1)), s2 = std::sqrt(v(x2));

  std::mt19937_64 rng(seed);
  // moments of D^2 up to the fourth, for the variance and its own error bar
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double d = (f1 + s1 * noise.draw(rng) - f2 - s2 * noise.draw(rng)) * inv_sqrt2;
    const double d2 = d * d;
    m1 += d2;
    m2 += d2 * d2;
    m3 += d2 * d2 * d2;
    m4 += d2 * d2 * d2 * d2;
  }
  const double count = static_cast<double>(reps);
  m1 /= count; m2 /= count; m3 /= count; m4 /= count;
  const double var = m2 - m1 * m1;
  if (se_out) {
    // Var of the sample variance ~ (mu4 - var^2)/reps with the central mu4
    const double mu4 =
        m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
    *se_out = std::sqrt(std::max(mu4 - var * var, 0.0) / count);
  }
  return var;
}

}  // namespace vfwave

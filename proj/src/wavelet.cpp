#include "wavelet.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace vfwave {

namespace {

// Scaling (lowpass) filters, sum = sqrt(2). Daubechies filters from
// spectral factorization of the half-band polynomial (minimal phase);
// symmlet/coiflet tables are the standard published ones refined against
// the defining orthonormality + vanishing-moment equations, so the stated
// invariants hold to double precision rather than table precision.
const double kHaar[2] = {
    std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};

const double kDaub4[8] = {
    0.2303778133088965,     0.71484657055291565,
    0.63088076792985891,    -0.027983769416859854,
    -0.18703481171909308,   0.030841381835560764,
    0.0328830116668852,     -0.010597401785069032};

const double kDaub8[16] = {
    0.05441584224310401,    0.31287159091429997,
    0.67563073629728981,    0.58535468365420671,
    -0.015829105256349306,  -0.28401554296154693,
    0.00047248457391328277, 0.12874742662047846,
    -0.017369301001807546,  -0.044088253930794752,
    0.013981027917398282,   0.0087460940474057767,
    -0.0048703529934515743, -0.00039174037337694705,
    0.00067544940645056937, -0.00011747678412476953};

const double kSymmlet8[16] = {
    0.0018899503327676892,  -0.00030292051472413308,
    -0.014952258337062199,  0.0038087520138944895,
    0.049137179673730287,   -0.027219029917103486,
    -0.051945838107881801,  0.36444189483617894,
    0.77718575169962803,    0.48135965125905339,
    -0.061273359067811078,  -0.14329423835127266,
    0.0076074873249766082,  0.031695087811525991,
    -0.00054213233180001069, -0.0033824159510050026};

const double kCoiflet3[18] = {
    -3.4599773196389288e-5, -7.0983302505783845e-5,
    0.00046621695981357996, 0.0011175187708459197,
    -0.0025745176881551131, -0.0090079761368436382,
    0.015880544863806783,   0.034555027573782628,
    -0.082301927105118795,  -0.07179982161590966,
    0.4284834763810114,     0.79377722262592884,
    0.40517690240566217,    -0.061123390006042064,
    -0.065771911282974525,  0.023452696141619535,
    0.0077825964256984161,  -0.0037935128643282559};

struct FilterEntry {
  const char* name;
  const double* taps;
  std::size_t len;
  int nvanish;
  bool coiflet;
};

const FilterEntry kFilters[] = {
    {"haar", kHaar, 2, 1, false},
    {"daub4", kDaub4, 8, 4, false},
    {"daub8", kDaub8, 16, 8, false},
    {"symmlet8", kSymmlet8, 16, 8, false},
    {"coiflet3", kCoiflet3, 18, 6, true},
};

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("length is not a power of two");
  int m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  return m;
}

std::vector<double> WaveletFilter::highpass() const {
  const std::size_t len = lowpass.size();
  std::vector<double> g(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    g[k] = sign * lowpass[len - 1 - k];
  }
  return g;
}

const std::vector<std::string>& supported_filters() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kFilters) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

WaveletFilter build_filter(const std::string& name) {
  for (const auto& e : kFilters) {
    if (name == e.name) {
      WaveletFilter f;
      f.name = e.name;
      f.lowpass.assign(e.taps, e.taps + e.len);
      f.nvanish = e.nvanish;
      f.coiflet = e.coiflet;
      return f;
    }
  }
  std::ostringstream msg;
  msg << "unknown wavelet filter '" << name << "'; supported:";
  for (const auto& e : kFilters) msg << ' ' << e.name;
  throw std::invalid_argument(msg.str());
}

std::size_t CoefficientPyramid::coefficient_count() const {
  std::size_t total = scaling.size();
  for (const auto& d : details) total += d.size();
  return total;
}

void CoefficientPyramid::validate() const {
  if (j0 < 0) throw std::invalid_argument("pyramid: negative coarsest level");
  if (scaling.size() != (std::size_t{1} << j0))
    throw std::invalid_argument("pyramid: scaling block size does not match j0");
  for (std::size_t l = 0; l < details.size(); ++l) {
    if (details[l].size() != (std::size_t{1} << (j0 + l)))
      throw std::invalid_argument("pyramid: detail level size mismatch");
  }
  if (coefficient_count() != n_signal || !is_power_of_two(n_signal))
    throw std::invalid_argument("pyramid: coefficient count does not match signal length");
}

std::vector<double> CoefficientPyramid::flatten() const {
  std::vector<double> flat;
  flat.reserve(n_signal);
  flat.insert(flat.end(), scaling.begin(), scaling.end());
  for (const auto& d : details) flat.insert(flat.end(), d.begin(), d.end());
  return flat;
}

CoefficientPyramid CoefficientPyramid::unflatten(std::span<const double> flat, int j0) {
  if (!is_power_of_two(flat.size()))
    throw std::invalid_argument("unflatten: length is not a power of two");
  const int m = log2_exact(flat.size());
  if (j0 < 0 || j0 >= m)
    throw std::invalid_argument("unflatten: j0 out of range for this length");
  CoefficientPyramid p;
  p.j0 = j0;
  p.n_signal = flat.size();
  std::size_t pos = std::size_t{1} << j0;
  p.scaling.assign(flat.begin(), flat.begin() + pos);
  for (int j = j0; j < m; ++j) {
    const std::size_t w = std::size_t{1} << j;
    p.details.emplace_back(flat.begin() + pos, flat.begin() + pos + w);
    pos += w;
  }
  return p;
}

CoefficientPyramid forward_dwt(std::span<const double> signal,
                               const WaveletFilter& filter, int j0) {
  const std::size_t n = signal.size();
  if (!is_power_of_two(n))
    throw std::invalid_argument("forward_dwt: signal length must be a power of two");
  const int m_top = log2_exact(n);
  if (j0 < 0) throw std::invalid_argument("forward_dwt: j0 must be nonnegative");
  if (m_top < j0 + 1)
    throw std::invalid_argument("forward_dwt: j0 too large for this signal length");

  const auto& h = filter.lowpass;
  const auto g = filter.highpass();
  const std::size_t taps = h.size();

  CoefficientPyramid pyr;
  pyr.j0 = j0;
  pyr.n_signal = n;
  pyr.details.resize(m_top - j0);

  std::vector<double> cur(signal.begin(), signal.end());
  std::vector<double> approx;
  for (int m = m_top; m > j0; --m) {
    const std::size_t len = std::size_t{1} << m;
    const std::size_t half = len >> 1;
    const std::size_t mask = len - 1;
    approx.assign(half, 0.0);
    std::vector<double> det(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
      double sa = 0.0, sd = 0.0;
      const std::size_t base = 2 * k;
      for (std::size_t l = 0; l < taps; ++l) {
        const double v = cur[(base + l) & mask];
        sa += h[l] * v;
        sd += g[l] * v;
      }
      approx[k] = sa;
      det[k] = sd;
    }
    pyr.details[m - 1 - j0] = std::move(det);
    cur.swap(approx);
  }
  pyr.scaling = std::move(cur);
  return pyr;
}

std::vector<double> inverse_dwt(const CoefficientPyramid& pyramid,
                                const WaveletFilter& filter) {
  pyramid.validate();
  const int m_top = log2_exact(pyramid.n_signal);
  const auto& h = filter.lowpass;
  const auto g = filter.highpass();
  const std::size_t taps = h.size();

  std::vector<double> cur = pyramid.scaling;
  for (int m = pyramid.j0 + 1; m <= m_top; ++m) {
    const std::size_t len = std::size_t{1} << m;
    const std::size_t half = len >> 1;
    const std::size_t mask = len - 1;
    const auto& det = pyramid.details[m - 1 - pyramid.j0];
    std::vector<double> next(len, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
      const std::size_t base = 2 * k;
      const double ak = cur[k];
      const double dk = det[k];
      for (std::size_t l = 0; l < taps; ++l)
        next[(base + l) & mask] += h[l] * ak + g[l] * dk;
    }
    cur.swap(next);
  }
  return cur;
}

const std::vector<std::vector<double>>& RowEnergyTable::block_sums(
    std::span<const std::size_t> bounds) const {
  if (bounds.size() < 2 || bounds.front() != 0 || bounds.back() != n_signal)
    throw std::invalid_argument("block_sums: bounds must partition [0, n_signal)");
  std::vector<std::size_t> key(bounds.begin(), bounds.end());
  std::lock_guard<std::mutex> lock(sums_->mu);
  auto it = sums_->by_bounds.find(key);
  if (it != sums_->by_bounds.end()) return it->second;

  const std::size_t nblocks = bounds.size() - 1;
  std::vector<std::vector<double>> sums(squared.size());
  for (std::size_t r = 0; r < squared.size(); ++r) {
    sums[r].assign(nblocks, 0.0);
    const auto& row = squared[r];
    for (std::size_t b = 0; b < nblocks; ++b) {
      double s = 0.0;
      for (std::size_t i = bounds[b]; i < bounds[b + 1]; ++i) s += row[i];
      sums[r][b] = s;
    }
  }
  return sums_->by_bounds.emplace(std::move(key), std::move(sums)).first->second;
}

RowEnergyTable row_energy_table(const WaveletFilter& filter,
                                std::size_t n_signal, int j0) {
  if (!is_power_of_two(n_signal))
    throw std::invalid_argument("row_energy_table: length must be a power of two");
  RowEnergyTable table;
  table.n_signal = n_signal;
  table.j0 = j0;
  table.squared.assign(n_signal, std::vector<double>(n_signal, 0.0));
  const std::size_t ncoarse = std::size_t{1} << j0;
  table.coarse_rows.assign(ncoarse, std::vector<double>(n_signal, 0.0));

  std::vector<double> basis(n_signal, 0.0);
  for (std::size_t i = 0; i < n_signal; ++i) {
    basis[i] = 1.0;
    const auto flat = forward_dwt(basis, filter, j0).flatten();
    basis[i] = 0.0;
    for (std::size_t r = 0; r < n_signal; ++r)
      table.squared[r][i] = flat[r] * flat[r];
    for (std::size_t r = 0; r < ncoarse; ++r)
      table.coarse_rows[r][i] = flat[r];
  }
  return table;
}

std::shared_ptr<const RowEnergyTable> cached_row_table(
    const WaveletFilter& filter, std::size_t n_signal, int j0) {
  using Key = std::tuple<std::string, std::size_t, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const RowEnergyTable>> cache;

  Key key{filter.name, n_signal, j0};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const RowEnergyTable>(
      row_energy_table(filter, n_signal, j0));
  cache.emplace(std::move(key), table);
  return table;
}

}  // namespace vfwave

#include "testfuncs.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace vfwave {

namespace {

#ifndef VFWAVE_DATA_DIR
#define VFWAVE_DATA_DIR "data"
#endif

std::mutex g_data_mu;
std::string g_data_dir = VFWAVE_DATA_DIR;
std::vector<Knot> g_bumps, g_blocks;
bool g_loaded = false;

std::vector<Knot> load_knots(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open knot table: " + path);
  std::vector<Knot> knots;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    Knot k;
    if (row >> k.t >> k.h >> k.w) knots.push_back(k);
  }
  if (knots.empty()) throw std::runtime_error("knot table is empty: " + path);
  return knots;
}

void ensure_loaded() {
  std::lock_guard<std::mutex> lock(g_data_mu);
  if (g_loaded) return;
  g_bumps = load_knots(g_data_dir + "/bumps.knots");
  g_blocks = load_knots(g_data_dir + "/blocks.knots");
  g_loaded = true;
}

void check_domain(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("test function evaluated outside [0, 1]");
}

double bumps_fn(double x) {
  double s = 0.0;
  for (const auto& k : bumps_knots()) {
    const double t = (x - k.t) / k.w;
    const double b = 1.0 + std::abs(t);
    s += k.h / (b * b * b * b);
  }
  return s;
}

double blocks_fn(double x) {
  double s = 0.0;
  for (const auto& k : blocks_knots())
    s += k.h * (1.0 + (x >= k.t ? 1.0 : -1.0)) / 2.0;
  return s;
}

double doppler_fn(double x) {
  const double eps = 0.05;
  return std::sqrt(x * (1.0 - x)) * std::sin(2.0 * std::numbers::pi_v<double> * (1.0 + eps) / (x + eps));
}

double v1_fn(double x) {
  if (x < 0.1) return 3.0 - 30.0 * x;
  if (x <= 0.25) return 20.0 * x - 1.0;
  if (x <= 0.725) return 4.0 + (1.0 - 4.0 * x) * 18.0 / 19.0;
  if (x <= 0.89) return 2.2 + 10.0 * (x - 0.725);
  return 3.85 - 85.0 * (x - 0.89) / 11.0;
}

double v2_fn(double x) {
  const double a = x - 0.2, b = x - 0.8;
  return 1.0 + 4.0 * (std::exp(-550.0 * a * a) + std::exp(-200.0 * b * b) +
                      std::exp(-950.0 * b * b));
}

constexpr std::size_t kNormGrid = 10000;

double grid_rms(VarId id, double offset) {
  double acc = 0.0;
  for (std::size_t i = 1; i <= kNormGrid; ++i) {
    const double v = eval_variance(id, static_cast<double>(i) / kNormGrid) + offset;
    acc += v * v;
  }
  return std::sqrt(acc / kNormGrid);
}

Normalization compute_normalization(VarId id) {
  Normalization norm;
  if (id == VarId::bumps || id == VarId::doppler) {
    double lo = 0.0, mean = 0.0;
    for (std::size_t i = 1; i <= kNormGrid; ++i) {
      const double v = eval_variance(id, static_cast<double>(i) / kNormGrid);
      lo = (i == 1) ? v : std::min(lo, v);
      mean += v;
    }
    mean /= kNormGrid;
    // offset a with min + a = 0.1 * (mean + a)
    norm.offset = (0.1 * mean - lo) / 0.9;
  }
  norm.target_norm = grid_rms(VarId::v1, 0.0);
  norm.scale = norm.target_norm / grid_rms(id, norm.offset);
  return norm;
}

}  // namespace

MeanId parse_mean_id(const std::string& name) {
  if (name == "zero") return MeanId::zero;
  if (name == "sin20") return MeanId::sin20;
  if (name == "bumps") return MeanId::bumps;
  if (name == "blocks") return MeanId::blocks;
  if (name == "doppler") return MeanId::doppler;
  throw std::invalid_argument("unknown mean function '" + name +
                              "'; supported: zero sin20 bumps blocks doppler");
}

VarId parse_var_id(const std::string& name) {
  if (name == "v1") return VarId::v1;
  if (name == "v2") return VarId::v2;
  if (name == "bumps") return VarId::bumps;
  if (name == "doppler") return VarId::doppler;
  throw std::invalid_argument("unknown variance function '" + name +
                              "'; supported: v1 v2 bumps doppler");
}

std::string to_string(MeanId id) {
  switch (id) {
    case MeanId::zero: return "zero";
    case MeanId::sin20: return "sin20";
    case MeanId::bumps: return "bumps";
    case MeanId::blocks: return "blocks";
    case MeanId::doppler: return "doppler";
  }
  return "?";
}

std::string to_string(VarId id) {
  switch (id) {
    case VarId::v1: return "v1";
    case VarId::v2: return "v2";
    case VarId::bumps: return "bumps";
    case VarId::doppler: return "doppler";
  }
  return "?";
}

double eval_mean(MeanId id, double x) {
  check_domain(x);
  switch (id) {
    case MeanId::zero: return 0.0;
    case MeanId::sin20: return std::sin(20.0 * x);
    case MeanId::bumps: return bumps_fn(x);
    case MeanId::blocks: return blocks_fn(x);
    case MeanId::doppler: return doppler_fn(x);
  }
  return 0.0;
}

double eval_variance(VarId id, double x) {
  check_domain(x);
  switch (id) {
    case VarId::v1: return v1_fn(x);
    case VarId::v2: return v2_fn(x);
    case VarId::bumps: return bumps_fn(x);
    case VarId::doppler: return doppler_fn(x);
  }
  return 0.0;
}

const Normalization& variance_normalization(VarId id) {
  static std::once_flag flags[4];
  static Normalization norms[4];
  const auto idx = static_cast<std::size_t>(id);
  std::call_once(flags[idx], [&] { norms[idx] = compute_normalization(id); });
  return norms[idx];
}

double normalized_variance(VarId id, double x) {
  const auto& norm = variance_normalization(id);
  return norm.scale * (eval_variance(id, x) + norm.offset);
}

const std::vector<Knot>& bumps_knots() {
  ensure_loaded();
  return g_bumps;
}

const std::vector<Knot>& blocks_knots() {
  ensure_loaded();
  return g_blocks;
}

void set_knot_data_dir(const std::string& dir) {
  std::lock_guard<std::mutex> lock(g_data_mu);
  if (g_loaded && dir != g_data_dir)
    throw std::logic_error("knot tables already loaded; set the data dir first");
  g_data_dir = dir;
}

}  // namespace vfwave

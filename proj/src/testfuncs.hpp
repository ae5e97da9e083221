#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vfwave {

enum class MeanId { zero, sin20, bumps, blocks, doppler };
enum class VarId { v1, v2, bumps, doppler };

MeanId parse_mean_id(const std::string& name);
VarId parse_var_id(const std::string& name);
std::string to_string(MeanId id);
std::string to_string(VarId id);

// Pointwise evaluation on [0, 1], before any normalization.
double eval_mean(MeanId id, double x);
double eval_variance(VarId id, double x);

// Positive-affine + scale record making a test function usable as a
// variance: functions that touch or cross zero are offset so the minimum
// over a 10^4-point grid equals 0.1x the grid mean, then every function is
// scaled to share the discrete L2 norm of the piecewise-linear reference.
struct Normalization {
  double offset = 0.0;
  double scale = 1.0;
  double target_norm = 0.0;  // shared discrete L2 (root mean square) norm
};

const Normalization& variance_normalization(VarId id);
double normalized_variance(VarId id, double x);

// Knot tables for the bumps/blocks signals, loaded from the plain-text
// data files (`t h w` per line, `#` comments).
struct Knot {
  double t = 0.0;
  double h = 0.0;
  double w = 0.0;
};

const std::vector<Knot>& bumps_knots();
const std::vector<Knot>& blocks_knots();

// Overrides the compiled-in data directory; call before first evaluation.
void set_knot_data_dir(const std::string& dir);

}  // namespace vfwave

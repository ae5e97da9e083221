#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "kernel.hpp"
#include "synthesize.hpp"
#include "testfuncs.hpp"

namespace vfwave {

// One Monte Carlo cell: a (mean, variance, n, config) combination.
struct SimulationSpec {
  MeanId mean_id = MeanId::zero;
  VarId var_id = VarId::v1;
  std::size_t n = 4096;
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  EstimatorConfig estimator;
  std::optional<KernelConfig> baseline;

  void validate() const;

  // Canonical substream label. Deliberately excludes reps and the estimator
  // tunables, so cells differing only there are paired on the same draws.
  std::string cell_id() const;

  static SimulationSpec from_json(const std::string& text);
  std::string to_json() const;
};

// Grid average of squared deviations over the n/2 estimation grid.
double mise(std::span<const double> estimate, std::span<const double> truth);

// Squared deviation at the grid point nearest to x_star.
double mse_at_point(const VarianceEstimate& est, double truth_value, double x_star);

struct EstimatorRisk {
  double mise_mean = 0.0;
  double mise_se = 0.0;
  std::vector<double> per_rep;
};

struct RiskReport {
  SimulationSpec spec;
  EstimatorRisk wavelet;
  std::optional<EstimatorRisk> kernel;
  double wallclock_sec = 0.0;

  // schema: table,mean,var,n,reps,r,estimator,mise,se,paper_ref_value
  // (one row per estimator; wallclock is reported in the summary only so
  // identical specs produce identical bytes)
  std::string csv(const std::string& table_label = "",
                  const std::string& wavelet_ref = "",
                  const std::string& kernel_ref = "") const;
  std::string summary() const;
};

extern const char* const kRiskCsvHeader;

// Runs every replication of a cell; substreams are pre-assigned from
// (seed, cell_id, rep), so any thread count gives identical reports.
RiskReport run_cell(const SimulationSpec& spec, unsigned threads = 1);

// Truth values V(2i/n), i = 1..n/2, for the normalized variance function.
std::vector<double> truth_on_grid(VarId id, std::size_t n);

struct TableArtifact {
  int which = 0;
  std::string csv;
  std::string markdown;
};

// Reproduces one of the three study tables at the requested replication
// count, with the published values alongside: 1 = variance x mean grid,
// 2 = variance x block exponent, 3 = wavelet vs kernel.
TableArtifact reproduce_table(int which, std::size_t reps, std::uint64_t seed,
                              unsigned threads = 1);

// Two-column gnuplot data (x value per line) for overlay plots.
std::string gnuplot_columns(std::span<const double> x, std::span<const double> v);

}  // namespace vfwave

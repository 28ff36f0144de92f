#pragma once

#include <cstdint>
#include <vector>

#include "brw/spectral.hpp"

namespace brw {

struct SimulationConfig {
  WalkSpec walk;
  SourceConfig sources;
  BranchingLaw branching = BranchingLaw::binary_fission(0.0);
  double t_max = 0.0;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  Site start;
  std::size_t population_cap = 1000000;
  /// Output times; empty selects 0, 1, ..., floor(t_max) and t_max.
  std::vector<double> times;
  std::vector<Site> probes;

  /// InvalidArgument unless t_max > 0, replicates >= 1, branching.beta1()
  /// matches sources.beta and all sites have the walk's dimension.
  void validate() const;
};

struct MomentSeries {
  std::vector<double> times;
  std::vector<double> m1_total;
  std::vector<double> stderr;
  std::vector<Site> probes;
  std::vector<std::vector<double>> m1_at;  // [probe][time]
  /// Replicates still uncensored at each time.
  std::vector<std::size_t> used;
  /// Smallest and largest per-replicate population at each time.
  std::vector<double> count_min;
  std::vector<double> count_max;
  double censored_fraction = 0.0;  // at the final time
  /// Per-replicate populations [replicate][time], NaN once censored. Empty for
  /// deterministic series.
  std::vector<std::vector<double>> replicate_totals;
};

/// 0, 1, 2, ... below t_max, then t_max; the grid used when none is given.
std::vector<double> default_times(double t_max);

/// Event-level Monte Carlo of the branching random walk. Replicate r uses a
/// generator seeded from (seed, r), so output does not depend on threading.
/// A replicate whose population exceeds population_cap at a grid time is
/// dropped from that time on. CapExceededEverywhere when no replicate
/// survives to t_max.
MomentSeries simulate(const SimulationConfig& config);

/// m1(t, start, .) = exp(t H_beta) delta_start on {-L..L}^d with absorbing
/// boundary, by Krylov steps with local error below 1e-8. BoxTooSmall when the
/// boundary carries more than 1e-4 of the total mass.
MomentSeries ode_m1(const WalkSpec& walk, const SourceConfig& sources, long L, const std::vector<double>& times,
                    const Site& start, const std::vector<Site>& probes = {});

struct GrowthRate {
  double rate = 0.0;
  double stderr = 0.0;
};

/// Least-squares slope of ln m1_total over [t0, t1]. The slope is linear in
/// ln m, so by the delta method its error is that of the replicate average of
/// sum_i w_i N_r(t_i) / m(t_i); without replicate data the points are treated
/// as independent with sigma(ln m) = stderr / m. NonPositiveValues when a mean
/// in the window is not positive.
GrowthRate estimate_growth_rate(const MomentSeries& series, double t0, double t1);

}  // namespace brw

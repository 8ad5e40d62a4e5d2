#pragma once

#include <string>
#include <vector>

#include "aimh/mixture.hpp"
#include "aimh/rng.hpp"

namespace aimh {

// Integrated autocorrelation time 1 + 2 sum rho_k, truncated where an
// adjacent pair of autocorrelations (starting the pairing at lag 0) first
// turns non-positive; floored at 1e-3.  Needs >= 100 points and a
// non-constant series.
double iact(const std::vector<double>& series);

struct EfficiencyReport {
  std::vector<std::string> parameter_names;
  std::vector<double> iact;
  double runtime_per_iteration = 0.0;  // seconds
};

struct RelativeInefficiency {
  std::vector<double> per_parameter;
  double average;
};

// (iact_b * time_b) / (iact_a * time_a), per parameter and averaged.
RelativeInefficiency relative_inefficiency(const EfficiencyReport& b,
                                           const EfficiencyReport& a);

// Moving acceptance rate with window min(i, width) at position i (1-based).
std::vector<double> acceptance_window(const std::vector<int>& accepts, int width = 500);

struct DominanceSummary {
  double max_ratio;
  std::vector<double> deciles;  // 10%..90% of the sampled ratio distribution
};

// Summarizes gbar(z)/g0(z) over test points; a stable, finite maximum
// indicates the fitted mixture stays dominated by the guard.  The point-list
// overload lets callers reuse one fixed panel across refits.
DominanceSummary dominance_monitor(const MixtureOfNormals& gbar,
                                   const MixtureOfNormals& g0,
                                   const std::vector<Eigen::VectorXd>& points);
DominanceSummary dominance_monitor(const MixtureOfNormals& gbar,
                                   const MixtureOfNormals& g0, int n_points, Rng& rng);

// sup over test points of |gbar_prev(z) - gbar_next(z)| / g0(z); a shrinking
// sequence across refits indicates the adaptation is settling.
double diminishing_monitor(const MixtureOfNormals& gbar_prev,
                           const MixtureOfNormals& gbar_next,
                           const MixtureOfNormals& g0,
                           const std::vector<Eigen::VectorXd>& points);
double diminishing_monitor(const MixtureOfNormals& gbar_prev,
                           const MixtureOfNormals& gbar_next,
                           const MixtureOfNormals& g0, int n_points, Rng& rng);

}  // namespace aimh

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aimh/mixture.hpp"
#include "aimh/rng.hpp"

namespace aimh {

enum class DistanceMetric { Euclidean, Mahalanobis };

// Euclidean means per-coordinate standardization by the sample standard
// deviation before measuring distances; Mahalanobis whitens by the global
// sample covariance.  Centers always live in the original coordinates.
struct KhmConfig {
  int max_components = 5;
  double distance_floor = 1e-8;
  int max_iterations = 200;
  double center_move_tolerance = 1e-6;
  DistanceMetric distance_metric = DistanceMetric::Euclidean;
  // <= 0 selects the cluster-count policy: exponent = max(#centers, 2).
  double fixed_exponent = 0.0;
  // Optional 3 EM steps updating weights and means only, covariances frozen.
  bool em_refine = false;
};

struct KhmScores {
  double weight;                // w(theta_t)
  Eigen::VectorXd memberships;  // m(c_i | theta_t), sums to 1
};

// Soft scores of one point against the current centers:
//   w = sum_i d_i^{-p-2} / (sum_i d_i^{-p})^2,  m_i = d_i^{-p-2} / sum_j d_j^{-p-2}
// with every distance floored at floor_eps.  Distances here are plain
// Euclidean in whatever coordinates the caller supplies.
KhmScores khm_scores(const Eigen::VectorXd& point,
                     const std::vector<Eigen::VectorXd>& centers, double exponent,
                     double floor_eps);

// One synchronous center update c_i = sum_t m*w*theta_t / sum_t m*w using
// scores from the pre-update centers.  A center whose accumulated mass is zero
// is left in place and counted in *stuck.
std::vector<Eigen::VectorXd> khm_iterate(const std::vector<Eigen::VectorXd>& data,
                                         const std::vector<Eigen::VectorXd>& centers,
                                         const KhmConfig& cfg, int* stuck = nullptr);

struct KhmRun {
  std::vector<Eigen::VectorXd> centers;
  int iterations;
};

// Iterates until the largest center displacement drops below
// center_move_tolerance or max_iterations is hit.
KhmRun khm_run(const std::vector<Eigen::VectorXd>& data,
               std::vector<Eigen::VectorXd> centers, const KhmConfig& cfg);

// Harmonic-mean objective sum_t p / sum_i d_it^{-p}; lower is better.
double khm_objective(const std::vector<Eigen::VectorXd>& data,
                     const std::vector<Eigen::VectorXd>& centers,
                     const KhmConfig& cfg);

// Subsample-and-pool initialization: cluster 10 random subsamples of 10% of
// the data, pool the resulting centers, re-cluster the pool once per candidate
// start, and keep the candidate with the best pool objective.
std::vector<Eigen::VectorXd> bradley_fayyad_init(const std::vector<Eigen::VectorXd>& data,
                                                 int p, const KhmConfig& cfg, Rng& rng);

// Mixture from converged centers: means are the centers, covariances and
// weights are membership*weight moments over the data.  Non-SPD covariances
// are repaired and counted in *repairs.
MixtureOfNormals estimate_mixture_params(const std::vector<Eigen::VectorXd>& data,
                                         const std::vector<Eigen::VectorXd>& centers,
                                         const KhmConfig& cfg, int* repairs = nullptr);

// True when the Cholesky factorization fails or the smallest eigenvalue is
// below 1e-10 times the trace.
bool is_degenerate_covariance(const Eigen::MatrixXd& covariance);

// Fallback for a non-SPD component covariance: 0.25 * sample covariance of
// the full data, with floor_eps*I added (escalating) until SPD.
Eigen::MatrixXd repair_degenerate(const Eigen::MatrixXd& covariance,
                                  const std::vector<Eigen::VectorXd>& data,
                                  double floor_eps);

struct ClusterFit {
  std::vector<Eigen::VectorXd> centers;
  MixtureOfNormals mixture;
  double bic;
  int iterations_used;
  int degenerate_repairs;
};

// Fits candidates with 1..max_components components and keeps the BIC
// minimizer; BIC = -2 loglik + n_params ln n with
// n_params = (p-1) + p d + p d(d+1)/2.  Fewer than 2d points fall back to a
// single moment-matched normal.
ClusterFit fit_with_bic(const std::vector<Eigen::VectorXd>& data, const KhmConfig& cfg,
                        Rng& rng);

}  // namespace aimh

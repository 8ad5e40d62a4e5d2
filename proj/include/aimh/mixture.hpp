#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "aimh/rng.hpp"

namespace aimh {

// One weighted multivariate normal.  The covariance must be symmetric positive
// definite; the lower Cholesky factor and log-determinant are cached at
// construction so evaluation and sampling never refactorize.
class GaussianComponent {
 public:
  GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  double weight() const { return weight_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::MatrixXd& chol_factor() const { return chol_; }
  double log_det() const { return log_det_; }
  Eigen::Index dimension() const { return mean_.size(); }

  // log of the normal density, weight not included.
  double log_pdf(const Eigen::VectorXd& z) const;

  Eigen::VectorXd sample(Rng& rng) const;

  GaussianComponent reweighted(double new_weight) const;
  // Same mean and weight, covariance scaled by k.
  GaussianComponent inflated(double k) const;

 private:
  double weight_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  double log_det_;
};

class MixtureOfNormals {
 public:
  // Validates: non-empty, equal dimensions, weights positive and summing to 1
  // within 1e-6; weights are then normalized exactly.
  explicit MixtureOfNormals(std::vector<GaussianComponent> components);

  Eigen::Index dimension() const { return dim_; }
  const std::vector<GaussianComponent>& components() const { return comps_; }
  std::size_t size() const { return comps_.size(); }

  // log Sum_i w_i phi(z; mu_i, Sigma_i), via log-sum-exp.
  double log_density(const Eigen::VectorXd& z) const;
  double density(const Eigen::VectorXd& z) const;

  // Pr(component i | z), one entry per component.
  Eigen::VectorXd responsibilities(const Eigen::VectorXd& z) const;

  Eigen::VectorXd sample(Rng& rng) const;

  // Exact mixture mean and covariance.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> moments() const;

  // 1-D marginal along one coordinate.
  MixtureOfNormals marginal(Eigen::Index coord) const;

 private:
  std::vector<GaussianComponent> comps_;
  Eigen::Index dim_;
};

// Tail thickening: keeps every component and adds a copy with covariance
// scaled by k; originals carry total weight 1-heavy_weight, copies
// heavy_weight.  Requires k > 1 and heavy_weight in (0,1).
MixtureOfNormals fatten(const MixtureOfNormals& mix, double k, double heavy_weight);

// Layered proposal: g0 components scaled by omega1, gbar components by
// 1-omega1.  Requires equal dimensions and omega1 in (0,1).
MixtureOfNormals defensive_combine(const MixtureOfNormals& g0,
                                   const MixtureOfNormals& gbar, double omega1);

// Union mixture (1-beta)*next + beta*prev.  beta == 0 returns next unchanged,
// beta == 1 returns prev.  If the union exceeds max_components the
// lowest-weight components are dropped and weights renormalized.
MixtureOfNormals blend(const MixtureOfNormals& prev, const MixtureOfNormals& next,
                       double beta, std::size_t max_components = 64);

}  // namespace aimh

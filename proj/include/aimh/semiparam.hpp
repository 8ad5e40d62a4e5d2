#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "aimh/targets.hpp"

namespace aimh {

struct SplineDesign {
  Eigen::MatrixXd columns;    // n x (1 + #knots): linear column, then (x-k)^2_+
  std::vector<double> knots;  // strictly increasing, strictly inside (min, max)
  bool reduced;               // fewer knots than requested (too few distinct x)
};

// Knots are midpoints of the order statistics at equally spaced ranks so the
// knot intervals hold (nearly) equal observation counts.
SplineDesign build_spline_design(const Eigen::VectorXd& x, int n_knots = 30);

enum class TauPrior { LogNormal, InverseGamma };

struct SemiparamConfig {
  int n_knots = 30;
  double v_gamma = 100.0;  // prior sd of the unpenalized coefficients
  TauPrior tau_prior = TauPrior::LogNormal;
  double lognormal_sd = 5.0;  // sd of ln tau^2 under the log-normal prior
  double tau_ig_mode = 0.01;  // 0.1^2, mode of the inverse-gamma option
  bool include_intercept = true;
};

// Additive Gaussian regression with spline blocks integrated out:
//   y | theta ~ N(0, sigma2 I + Z V(tau) Z'),
//   V = diag(v_gamma^2 I, tau_1^2 I, ..., tau_H^2 I),
// sampled on theta = (ln sigma2_eps, ln tau2_1, ..., ln tau2_H).
class SemiparamModel : public TargetModel {
 public:
  // linear_covariates may have zero columns; flexible covariates each get a
  // linear column (unpenalized) plus a truncated-quadratic block.
  SemiparamModel(Eigen::VectorXd y, Eigen::MatrixXd linear_covariates,
                 std::vector<Eigen::VectorXd> flexible_covariates,
                 SemiparamConfig cfg = {});

  Eigen::Index dimension() const override { return 1 + flexible_count(); }
  double log_unnormalized_density(const Eigen::VectorXd& theta) const override;
  std::vector<std::string> parameter_names() const override;

  // Gaussian marginal via the q x q system Z'Z + sigma2 V^-1 (the n x n
  // covariance is never formed).  Returns -inf and sets *failed when the
  // inner factorization breaks down.
  double marginal_loglik(double sigma2, const std::vector<double>& tau2,
                         bool* failed = nullptr) const;

  Eigen::Index flexible_count() const { return static_cast<Eigen::Index>(blocks_.size()); }
  const Eigen::MatrixXd& design() const { return z_; }
  const Eigen::VectorXd& response() const { return y_; }
  // Diagonal of V(tau) in design-column order; lets tests build the dense
  // covariance directly.
  Eigen::VectorXd prior_variance_diagonal(const std::vector<double>& tau2) const;
  double ols_sigma2() const { return ols_sigma2_; }
  const std::vector<SplineDesign>& spline_designs() const { return splines_; }
  const SemiparamConfig& config() const { return cfg_; }

 private:
  struct Block {
    Eigen::Index offset;
    Eigen::Index size;
  };

  Eigen::VectorXd y_;
  Eigen::MatrixXd z_;
  Eigen::Index unpenalized_;
  std::vector<Block> blocks_;
  std::vector<SplineDesign> splines_;
  SemiparamConfig cfg_;
  double ols_sigma2_;
  double b_sigma2_;  // IG scale, 2 * ols_sigma2
  // Precomputed Gram pieces.
  Eigen::MatrixXd ztz_;
  Eigen::VectorXd zty_;
  double yty_;
};

}  // namespace aimh

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "aimh/targets.hpp"

namespace aimh {

// Inverse-gamma scale parameters (shape 1 throughout); scale = 2 * prior
// mode because the IG(1, b) mode sits at b/2.
struct TvpPriors {
  double b_sigma2;
  double b_lambda0_sq;
  double b_lambda1_sq;
};

// First-order autoregression with random-walk intercept and slope:
//   y_t = c_t + rho_t y_{t-1} + sigma_eps e_t,
//   c_t = c_{t-1} + lambda_0 sigma_eps u_t,  rho_t = rho_{t-1} + lambda_1 v_t.
// The sampled parameters are theta = (ln sigma2_eps, ln lambda0^2,
// ln lambda1^2); (c_0, rho_0) are states with a N(0, 100 I) prior.
class TvpAr1Model : public TargetModel {
 public:
  // Prior modes from an OLS AR(1) fit: sigma2_OLS, 0.01 sigma2_OLS, 0.001^2.
  explicit TvpAr1Model(std::vector<double> y);
  TvpAr1Model(std::vector<double> y, TvpPriors priors);

  Eigen::Index dimension() const override { return 3; }
  double log_unnormalized_density(const Eigen::VectorXd& theta) const override;
  std::vector<std::string> parameter_names() const override;

  // Prediction-error-decomposition log-likelihood over t = 2..T; the first
  // observation only conditions the regressor.  Returns -inf (and sets
  // *overflow) when the recursion leaves the representable range.
  double kalman_loglik(double sigma2_eps, double lambda0_sq, double lambda1_sq,
                       bool* overflow = nullptr) const;

  const TvpPriors& priors() const { return priors_; }
  double ols_sigma2() const { return ols_sigma2_; }
  const std::vector<double>& series() const { return y_; }

  static constexpr double kInitStateVariance = 100.0;

 private:
  std::vector<double> y_;
  double ols_sigma2_;
  TvpPriors priors_;
};

struct TvpPath {
  std::vector<double> y;
  std::vector<double> c;
  std::vector<double> rho;
};

// Simulates the model forward from (c0, rho0) with seeded noise.
TvpPath tvp_synthetic(int T, double sigma2_eps, double lambda0_sq, double lambda1_sq,
                      unsigned long seed, double c0 = 0.0, double rho0 = 0.9,
                      double y0 = 0.0);

}  // namespace aimh

#include "aimh/tvp_ar1.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aimh/rng.hpp"

namespace aimh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;

double ols_residual_variance(const std::vector<double>& y) {
  const std::size_t n = y.size() - 1;  // observations 2..T
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd z(n);
  for (std::size_t t = 0; t < n; ++t) {
    x(static_cast<Eigen::Index>(t), 0) = 1.0;
    x(static_cast<Eigen::Index>(t), 1) = y[t];
    z[static_cast<Eigen::Index>(t)] = y[t + 1];
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(z);
  const double ssr = (z - x * beta).squaredNorm();
  const double dof = static_cast<double>(n) - 2.0;
  double s2 = dof > 0.0 ? ssr / dof : ssr / static_cast<double>(n);
  if (!(s2 > 0.0) || !std::isfinite(s2)) s2 = 1e-8;
  return s2;
}

}  // namespace

TvpAr1Model::TvpAr1Model(std::vector<double> y) : y_(std::move(y)) {
  if (y_.size() < 2)
    throw std::invalid_argument("TvpAr1Model needs at least 2 observations");
  for (double v : y_)
    if (!std::isfinite(v)) throw std::invalid_argument("TvpAr1Model series has NaN");
  ols_sigma2_ = ols_residual_variance(y_);
  priors_ = {2.0 * ols_sigma2_, 2.0 * 0.01 * ols_sigma2_, 2.0 * 0.001 * 0.001};
}

TvpAr1Model::TvpAr1Model(std::vector<double> y, TvpPriors priors) : y_(std::move(y)) {
  if (y_.size() < 2)
    throw std::invalid_argument("TvpAr1Model needs at least 2 observations");
  for (double v : y_)
    if (!std::isfinite(v)) throw std::invalid_argument("TvpAr1Model series has NaN");
  ols_sigma2_ = ols_residual_variance(y_);
  priors_ = priors;
}

std::vector<std::string> TvpAr1Model::parameter_names() const {
  return {"ln_sigma2_eps", "ln_lambda0_sq", "ln_lambda1_sq"};
}

double TvpAr1Model::kalman_loglik(double sigma2_eps, double lambda0_sq,
                                  double lambda1_sq, bool* overflow) const {
  if (overflow != nullptr) *overflow = false;
  if (!(sigma2_eps > 0.0) || lambda0_sq < 0.0 || lambda1_sq < 0.0) return kNegInf;

  Eigen::Vector2d a = Eigen::Vector2d::Zero();  // filtered mean of (c_t, rho_t)
  Eigen::Matrix2d p = kInitStateVariance * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d q =
      (Eigen::Vector2d() << lambda0_sq * sigma2_eps, lambda1_sq).finished().asDiagonal();

  double loglik = 0.0;
  for (std::size_t t = 1; t < y_.size(); ++t) {
    const Eigen::Vector2d zt(1.0, y_[t - 1]);
    const Eigen::Matrix2d p_pred = p + q;
    const double v = y_[t] - zt.dot(a);
    const double f = zt.dot(p_pred * zt) + sigma2_eps;
    if (!(f > 0.0) || !std::isfinite(f) || !std::isfinite(v)) {
      if (overflow != nullptr) *overflow = true;
      return kNegInf;
    }
    loglik += -0.5 * (kLogTwoPi + std::log(f) + v * v / f);
    const Eigen::Vector2d k = p_pred * zt / f;
    a += k * v;
    p = p_pred - k * (zt.transpose() * p_pred);
    p = 0.5 * (p + p.transpose().eval());
  }
  if (!std::isfinite(loglik)) {
    if (overflow != nullptr) *overflow = true;
    return kNegInf;
  }
  return loglik;
}

double TvpAr1Model::log_unnormalized_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != 3)
    throw std::invalid_argument("TvpAr1Model expects a 3-vector");
  for (Eigen::Index i = 0; i < 3; ++i) {
    if (std::isnan(theta[i]))
      throw std::invalid_argument("TvpAr1Model received NaN parameters");
    if (theta[i] > 500.0) return kNegInf;  // exp would overflow downstream
  }
  const double s2 = std::exp(theta[0]);
  const double l0 = std::exp(theta[1]);
  const double l1 = std::exp(theta[2]);
  const double ll = kalman_loglik(s2, l0, l1);
  if (ll == kNegInf) return kNegInf;
  // IG(1, b) on the variance plus the log-scale Jacobian: -theta - b e^-theta.
  const double prior = -theta[0] - priors_.b_sigma2 * std::exp(-theta[0]) -
                       theta[1] - priors_.b_lambda0_sq * std::exp(-theta[1]) -
                       theta[2] - priors_.b_lambda1_sq * std::exp(-theta[2]);
  const double out = ll + prior;
  return std::isfinite(out) ? out : kNegInf;
}

TvpPath tvp_synthetic(int T, double sigma2_eps, double lambda0_sq, double lambda1_sq,
                      unsigned long seed, double c0, double rho0, double y0) {
  if (T < 10) throw std::invalid_argument("tvp_synthetic needs T >= 10");
  if (!(sigma2_eps > 0.0) || lambda0_sq < 0.0 || lambda1_sq < 0.0)
    throw std::invalid_argument("tvp_synthetic needs valid variances");
  Rng rng(seed);
  const double sigma = std::sqrt(sigma2_eps);
  const double sd_c = std::sqrt(lambda0_sq) * sigma;
  const double sd_rho = std::sqrt(lambda1_sq);
  TvpPath out;
  out.y.reserve(static_cast<std::size_t>(T));
  out.c.reserve(static_cast<std::size_t>(T));
  out.rho.reserve(static_cast<std::size_t>(T));
  double c = c0, rho = rho0, prev = y0;
  for (int t = 0; t < T; ++t) {
    c += sd_c * rng.normal();
    rho += sd_rho * rng.normal();
    prev = c + rho * prev + sigma * rng.normal();
    out.y.push_back(prev);
    out.c.push_back(c);
    out.rho.push_back(rho);
  }
  return out;
}

}  // namespace aimh

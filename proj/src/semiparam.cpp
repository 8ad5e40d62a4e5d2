#include "aimh/semiparam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aimh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kLogScaleCap = 500.0;  // exp() overflow guard on log variances

}  // namespace

SplineDesign build_spline_design(const Eigen::VectorXd& x, int n_knots) {
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("build_spline_design: need at least 2 points");
  if (!x.allFinite()) throw std::invalid_argument("build_spline_design: non-finite covariate");
  if (n_knots < 0) throw std::invalid_argument("build_spline_design: negative knot count");

  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end());

  Eigen::Index distinct = 1;
  for (Eigen::Index i = 1; i < n; ++i)
    if (sorted[i] != sorted[i - 1]) ++distinct;

  // Each knot needs distinct values on both sides; shrink instead of failing.
  int k = n_knots;
  bool reduced = false;
  if (static_cast<Eigen::Index>(k) + 2 > distinct) {
    k = static_cast<int>(std::max<Eigen::Index>(distinct - 2, 0));
    reduced = true;
  }

  // Boundary j of k+1 equal-count intervals sits between the order statistics
  // straddling rank j*n/(k+1); the midpoint keeps it off the data values.
  std::vector<double> knots;
  knots.reserve(k);
  const double lo_bound = sorted.front();
  const double hi_bound = sorted.back();
  for (int j = 1; j <= k; ++j) {
    const double rank = static_cast<double>(j) * static_cast<double>(n) /
                        (static_cast<double>(k) + 1.0);
    Eigen::Index left = static_cast<Eigen::Index>(std::ceil(rank)) - 1;
    left = std::clamp<Eigen::Index>(left, 0, n - 1);
    const Eigen::Index right = std::min<Eigen::Index>(left + 1, n - 1);
    const double knot = 0.5 * (sorted[left] + sorted[right]);
    if (knot <= lo_bound || knot >= hi_bound) continue;
    if (!knots.empty() && knot <= knots.back()) continue;
    knots.push_back(knot);
  }
  if (static_cast<int>(knots.size()) < n_knots) reduced = true;

  SplineDesign design;
  design.knots = knots;
  design.reduced = reduced;
  design.columns.resize(n, 1 + static_cast<Eigen::Index>(knots.size()));
  design.columns.col(0) = x;
  for (std::size_t j = 0; j < knots.size(); ++j) {
    design.columns.col(1 + static_cast<Eigen::Index>(j)) =
        (x.array() - knots[j]).max(0.0).square();
  }
  return design;
}

SemiparamModel::SemiparamModel(Eigen::VectorXd y, Eigen::MatrixXd linear_covariates,
                               std::vector<Eigen::VectorXd> flexible_covariates,
                               SemiparamConfig cfg)
    : y_(std::move(y)), cfg_(cfg) {
  const Eigen::Index n = y_.size();
  if (n < 2) throw std::invalid_argument("SemiparamModel: need at least 2 observations");
  if (!y_.allFinite()) throw std::invalid_argument("SemiparamModel: non-finite response");
  if (linear_covariates.cols() > 0 && linear_covariates.rows() != n)
    throw std::invalid_argument("SemiparamModel: linear covariate row mismatch");
  for (const auto& x : flexible_covariates)
    if (x.size() != n) throw std::invalid_argument("SemiparamModel: flexible covariate length mismatch");
  if (cfg_.v_gamma <= 0.0) throw std::invalid_argument("SemiparamModel: v_gamma must be positive");
  if (cfg_.lognormal_sd <= 0.0) throw std::invalid_argument("SemiparamModel: lognormal_sd must be positive");
  if (cfg_.tau_ig_mode <= 0.0) throw std::invalid_argument("SemiparamModel: tau_ig_mode must be positive");

  splines_.reserve(flexible_covariates.size());
  for (const auto& x : flexible_covariates)
    splines_.push_back(build_spline_design(x, cfg_.n_knots));

  const Eigen::Index h_count = static_cast<Eigen::Index>(splines_.size());
  unpenalized_ = (cfg_.include_intercept ? 1 : 0) + linear_covariates.cols() + h_count;
  Eigen::Index q = unpenalized_;
  for (const auto& s : splines_) q += s.columns.cols() - 1;
  if (q == 0) throw std::invalid_argument("SemiparamModel: design has no columns");
  if (q >= n) throw std::invalid_argument("SemiparamModel: more design columns than observations");

  // Unpenalized head: intercept, linear covariates, then the linear column of
  // each flexible covariate.  Penalized spline blocks follow in the same
  // covariate order.
  z_.resize(n, q);
  Eigen::Index col = 0;
  if (cfg_.include_intercept) z_.col(col++).setOnes();
  for (Eigen::Index j = 0; j < linear_covariates.cols(); ++j)
    z_.col(col++) = linear_covariates.col(j);
  for (const auto& s : splines_) z_.col(col++) = s.columns.col(0);
  for (const auto& s : splines_) {
    const Eigen::Index width = s.columns.cols() - 1;
    blocks_.push_back({col, width});
    if (width > 0) z_.block(0, col, n, width) = s.columns.rightCols(width);
    col += width;
  }

  ztz_ = z_.transpose() * z_;
  zty_ = z_.transpose() * y_;
  yty_ = y_.squaredNorm();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z_);
  const Eigen::VectorXd residual = y_ - z_ * qr.solve(y_);
  const Eigen::Index dof = std::max<Eigen::Index>(n - qr.rank(), 1);
  ols_sigma2_ = std::max(residual.squaredNorm() / static_cast<double>(dof), 1e-12);
  b_sigma2_ = 2.0 * ols_sigma2_;
}

Eigen::VectorXd SemiparamModel::prior_variance_diagonal(const std::vector<double>& tau2) const {
  if (tau2.size() != blocks_.size())
    throw std::invalid_argument("prior_variance_diagonal: tau2 size mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Constant(z_.cols(), cfg_.v_gamma * cfg_.v_gamma);
  for (std::size_t h = 0; h < blocks_.size(); ++h)
    v.segment(blocks_[h].offset, blocks_[h].size).setConstant(tau2[h]);
  return v;
}

double SemiparamModel::marginal_loglik(double sigma2, const std::vector<double>& tau2,
                                       bool* failed) const {
  if (failed) *failed = false;
  const auto fail = [&]() {
    if (failed) *failed = true;
    return kNegInf;
  };
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return fail();
  for (double t : tau2)
    if (!(t > 0.0) || !std::isfinite(t)) return fail();

  const Eigen::Index n = y_.size();
  const Eigen::Index q = z_.cols();
  const Eigen::VectorXd v = prior_variance_diagonal(tau2);

  // A = Z'Z + sigma2 V^-1 is the q x q core of both the determinant lemma and
  // the Woodbury quadratic form.
  Eigen::MatrixXd a = ztz_;
  a.diagonal() += sigma2 * v.cwiseInverse();
  if (!a.allFinite()) return fail();

  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return fail();

  double log_det_a = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) log_det_a += std::log(llt.matrixL()(i, i));
  log_det_a *= 2.0;

  const double log_det_sigma = static_cast<double>(n - q) * std::log(sigma2) +
                               v.array().log().sum() + log_det_a;
  const double ss = std::max(yty_ - zty_.dot(llt.solve(zty_)), 0.0);
  const double loglik = -0.5 * static_cast<double>(n) * kLogTwoPi -
                        0.5 * log_det_sigma - 0.5 * ss / sigma2;
  if (!std::isfinite(loglik)) return fail();
  return loglik;
}

double SemiparamModel::log_unnormalized_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != dimension())
    throw std::invalid_argument("SemiparamModel: theta dimension mismatch");
  if (theta.hasNaN()) throw std::invalid_argument("SemiparamModel: NaN in theta");
  if ((theta.array() > kLogScaleCap).any()) return kNegInf;

  const double sigma2 = std::exp(theta[0]);
  std::vector<double> tau2(blocks_.size());
  for (std::size_t h = 0; h < blocks_.size(); ++h) tau2[h] = std::exp(theta[1 + h]);

  bool failed = false;
  const double loglik = marginal_loglik(sigma2, tau2, &failed);
  if (failed || !std::isfinite(loglik)) return kNegInf;

  // IG(1, b) density on sigma2 plus the d sigma2 / d theta0 Jacobian.
  double log_prior = -theta[0] - b_sigma2_ * std::exp(-theta[0]);
  for (std::size_t h = 0; h < blocks_.size(); ++h) {
    const double th = theta[1 + h];
    if (cfg_.tau_prior == TauPrior::LogNormal) {
      log_prior += -0.5 * th * th / (cfg_.lognormal_sd * cfg_.lognormal_sd);
    } else {
      log_prior += -th - 2.0 * cfg_.tau_ig_mode * std::exp(-th);
    }
  }
  const double value = loglik + log_prior;
  return std::isfinite(value) ? value : kNegInf;
}

std::vector<std::string> SemiparamModel::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(1 + blocks_.size());
  names.emplace_back("ln_sigma2_eps");
  for (std::size_t h = 0; h < blocks_.size(); ++h)
    names.push_back("ln_tau2_" + std::to_string(h + 1));
  return names;
}

}  // namespace aimh

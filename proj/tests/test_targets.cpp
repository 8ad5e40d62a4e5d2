#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "aimh/semiparam.hpp"
#include "aimh/targets.hpp"
#include "aimh/tvp_ar1.hpp"
#include "doctest.h"
#include "oracles.hpp"

using aimh::build_spline_design;
using aimh::laplace_approx;
using aimh::SemiparamConfig;
using aimh::SemiparamModel;
using aimh::TargetModel;
using aimh::toy_mixture_1d;
using aimh::toy_mixture_15d;
using aimh::tvp_synthetic;
using aimh::TvpAr1Model;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Central-difference gradient, independent of the optimizer's own step rule.
Eigen::VectorXd fd_gradient(const TargetModel& target, const Eigen::VectorXd& theta) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(theta[i]));
    Eigen::VectorXd hi = theta, lo = theta;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (target.log_unnormalized_density(hi) - target.log_unnormalized_density(lo)) /
           (2.0 * h);
  }
  return g;
}

// Quadratic bowl with a known optimum, used to pin the Newton step exactly.
class QuadraticBowl : public TargetModel {
 public:
  Eigen::Index dimension() const override { return 1; }
  double log_unnormalized_density(const Eigen::VectorXd& theta) const override {
    const double d = theta[0] - 3.0;
    return -0.5 * d * d;
  }
};

class CorrelatedGaussian : public TargetModel {
 public:
  CorrelatedGaussian() : mean_(vec({1.0, -2.0})), cov_(2, 2) {
    cov_ << 2.0, 0.6, 0.6, 1.0;
    inv_ = cov_.inverse();
  }
  Eigen::Index dimension() const override { return 2; }
  double log_unnormalized_density(const Eigen::VectorXd& theta) const override {
    const Eigen::VectorXd d = theta - mean_;
    return -0.5 * d.dot(inv_ * d);
  }
  const Eigen::MatrixXd& covariance() const { return cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd inv_;
};

Eigen::VectorXd uniform_draws(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = unif(gen);
  return x;
}

Eigen::VectorXd gaussian_draws(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = norm(gen);
  return x;
}

// Dense evaluation of the integrated-coefficients likelihood straight from
// the n x n covariance; the library never forms this matrix.
double dense_marginal(const SemiparamModel& model, double sigma2,
                      const std::vector<double>& tau2) {
  const Eigen::MatrixXd& z = model.design();
  const Eigen::VectorXd v = model.prior_variance_diagonal(tau2);
  const Eigen::MatrixXd cov =
      sigma2 * Eigen::MatrixXd::Identity(z.rows(), z.rows()) +
      z * v.asDiagonal() * z.transpose();
  return oracle::mvn_logpdf_dense(model.response(),
                                  Eigen::VectorXd::Zero(z.rows()), cov);
}

}  // namespace

TEST_CASE("scalar benchmark target has mean 0.3 and unit mass") {
  const auto target = toy_mixture_1d();
  const auto [mean, cov] = target.mixture().moments();
  CHECK(mean[0] == doctest::Approx(0.3).epsilon(1e-12));

  const auto density = [&](double z) {
    return std::exp(target.log_unnormalized_density(vec({z})));
  };
  CHECK(oracle::simpson(density, -30.0, 30.0) == doctest::Approx(1.0).epsilon(1e-6));
  const double q_mean =
      oracle::simpson([&](double z) { return z * density(z); }, -30.0, 30.0);
  CHECK(q_mean == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(cov(0, 0) > 0.0);
}

TEST_CASE("scalar benchmark target is taller near zero than near six") {
  const auto target = toy_mixture_1d();
  CHECK(target.log_unnormalized_density(vec({0.0})) >
        target.log_unnormalized_density(vec({6.0})));
}

TEST_CASE("fifteen dimensional target marginal moments") {
  const auto target = toy_mixture_15d();
  REQUIRE(target.dimension() == 15);
  const auto [mean, cov] = target.mixture().moments();
  CHECK(mean[14] == doctest::Approx(-0.9).epsilon(1e-12));
  for (int i = 0; i < 14; ++i) CHECK(mean[i] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cov(13, 13) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(cov(14, 14) == doctest::Approx(3.19).epsilon(1e-12));

  // A symmetric-component marginal has zero third central moment; the last
  // coordinate does not.
  const auto marginal_skew = [&](Eigen::Index coord) {
    const auto m = target.mixture().marginal(coord);
    const double mu =
        oracle::simpson([&](double z) { return z * std::exp(m.log_density(vec({z}))); },
                        -40.0, 40.0);
    return oracle::simpson(
        [&](double z) {
          const double d = z - mu;
          return d * d * d * std::exp(m.log_density(vec({z})));
        },
        -40.0, 40.0);
  };
  CHECK(std::abs(marginal_skew(4)) < 1e-8);
  CHECK(std::abs(marginal_skew(13)) < 1e-8);
  CHECK(marginal_skew(14) < -0.1);
}

TEST_CASE("target log densities are pure and never NaN") {
  const auto target = toy_mixture_1d();
  for (double z : {-1e8, -3.0, 0.0, 0.3, 6.0, 1e8}) {
    const double a = target.log_unnormalized_density(vec({z}));
    const double b = target.log_unnormalized_density(vec({z}));
    CHECK(a == b);
    CHECK_FALSE(std::isnan(a));
  }
}

TEST_CASE("newton finds the exact optimum of a quadratic bowl") {
  const QuadraticBowl bowl;
  const auto result = laplace_approx(bowl, vec({-7.0}));
  CHECK(result.converged);
  CHECK(result.mode[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(result.neg_inv_hessian(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("newton recovers the covariance of a correlated gaussian") {
  const CorrelatedGaussian target;
  const auto result = laplace_approx(target, vec({4.0, 4.0}));
  CHECK(result.converged);
  CHECK(result.mode[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.mode[1] == doctest::Approx(-2.0).epsilon(1e-6));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(result.neg_inv_hessian(i, j) - target.covariance()(i, j)) < 1e-4);
}

TEST_CASE("newton follows the slope into the basin that holds the start") {
  const auto target = toy_mixture_1d();

  // Grid scan maps the basins: the tallest peak sits just left of zero and a
  // shorter one near six.  The left tail rises monotonically into the central
  // peak (the wide middle component is too flat to raise a bump of its own),
  // so a start at -5 walks all the way to the global mode.
  double best_z = -8.0, best = -1e300;
  for (double z = -8.0; z <= 8.0; z += 0.01) {
    const double d = target.log_unnormalized_density(vec({z}));
    if (d > best) {
      best = d;
      best_z = z;
    }
  }
  REQUIRE(std::abs(best_z) < 1.0);

  const auto center = laplace_approx(target, vec({-5.0}));
  CHECK(center.converged);
  CHECK(std::abs(center.mode[0] - best_z) < 0.02);
  CHECK(fd_gradient(target, center.mode).lpNorm<Eigen::Infinity>() < 1e-4);

  // A start in the right basin stays on its shorter peak: a genuinely local
  // optimum, detected by comparing against the grid maximum.
  const auto side = laplace_approx(target, vec({7.0}));
  CHECK(side.converged);
  CHECK(side.mode[0] > 5.5);
  CHECK(side.mode[0] < 6.5);
  CHECK(side.log_density < best);
  CHECK(fd_gradient(target, side.mode).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("newton rejects a start outside the computable region") {
  const auto target = toy_mixture_1d();
  CHECK_THROWS_AS(laplace_approx(target, vec({std::nan("")})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      laplace_approx(target, vec({std::numeric_limits<double>::infinity()})),
      std::invalid_argument);
}

TEST_CASE("constant coefficient paths when innovation variances vanish") {
  const auto path = tvp_synthetic(50, 1.0, 0.0, 0.0, 7);
  REQUIRE(path.y.size() == 50);
  for (double c : path.c) CHECK(c == 0.0);
  for (double r : path.rho) CHECK(r == 0.9);
  // The observation noise still moves the series itself.
  CHECK(path.y.front() != path.y.back());
}

TEST_CASE("persistent series has variance above the innovation variance") {
  const auto path = tvp_synthetic(2000, 1.0, 0.0, 0.0, 21);
  double mean = 0.0;
  for (double v : path.y) mean += v;
  mean /= static_cast<double>(path.y.size());
  double var = 0.0;
  for (double v : path.y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(path.y.size() - 1);
  CHECK(var > 1.0);
}

TEST_CASE("synthetic series is seed deterministic") {
  const auto a = tvp_synthetic(40, 0.5, 0.01, 0.001, 99);
  const auto b = tvp_synthetic(40, 0.5, 0.01, 0.001, 99);
  const auto c = tvp_synthetic(40, 0.5, 0.01, 0.001, 100);
  CHECK(a.y == b.y);
  CHECK(a.c == b.c);
  CHECK(a.y != c.y);
}

TEST_CASE("filter likelihood matches a joint gaussian when coefficients are fixed") {
  const auto path = tvp_synthetic(30, 1.0, 0.0, 0.0, 11);
  const TvpAr1Model model(path.y);

  const Eigen::Index n = 29;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd obs(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = path.y[static_cast<std::size_t>(t)];
    obs[t] = path.y[static_cast<std::size_t>(t) + 1];
  }
  for (double sigma2 : {0.8, 2.5}) {
    const Eigen::MatrixXd cov =
        sigma2 * Eigen::MatrixXd::Identity(n, n) +
        TvpAr1Model::kInitStateVariance * x * x.transpose();
    const double dense = oracle::mvn_logpdf_dense(obs, Eigen::VectorXd::Zero(n), cov);
    CHECK(model.kalman_loglik(sigma2, 0.0, 0.0) == doctest::Approx(dense).epsilon(1e-8));
  }
}

TEST_CASE("single filtered observation matches the hand computed predictive") {
  const TvpAr1Model model({0.7, -1.3});
  const double s2 = 0.5, l0 = 0.2, l1 = 0.1;
  const double f = (100.0 + l0 * s2) + 0.7 * 0.7 * (100.0 + l1) + s2;
  const double hand = -0.5 * (std::log(2.0 * oracle::kPi) + std::log(f) + 1.3 * 1.3 / f);
  CHECK(model.kalman_loglik(s2, l0, l1) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("log posterior equals filter likelihood plus shrinkage terms") {
  const auto path = tvp_synthetic(60, 1.0, 0.01, 0.001, 3);
  const TvpAr1Model model(path.y);
  const Eigen::VectorXd theta = vec({0.3, -2.0, -6.0});
  const auto& b = model.priors();
  const double expected =
      model.kalman_loglik(std::exp(0.3), std::exp(-2.0), std::exp(-6.0)) +
      (-0.3 - b.b_sigma2 * std::exp(-0.3)) + (2.0 - b.b_lambda0_sq * std::exp(2.0)) +
      (6.0 - b.b_lambda1_sq * std::exp(6.0));
  CHECK(model.log_unnormalized_density(theta) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("filter flags a recursion that leaves the representable range") {
  const auto path = tvp_synthetic(20, 1.0, 0.0, 0.0, 5);
  const TvpAr1Model model(path.y);
  bool overflow = false;
  const double ll = model.kalman_loglik(1e300, 1e300, 1e300, &overflow);
  CHECK(overflow);
  CHECK(ll == -std::numeric_limits<double>::infinity());

  for (const auto& theta :
       {vec({600.0, 0.0, 0.0}), vec({-600.0, 0.0, 0.0}), vec({0.0, -800.0, 0.0})}) {
    const double d = model.log_unnormalized_density(theta);
    CHECK_FALSE(std::isnan(d));
  }
  CHECK(model.log_unnormalized_density(vec({600.0, 0.0, 0.0})) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(model.log_unnormalized_density(vec({std::nan(""), 0.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("prior scales follow the least squares fit of the series") {
  const auto path = tvp_synthetic(500, 1.0, 0.0, 0.0, 13, 0.0, 0.5);
  const TvpAr1Model model(path.y);
  CHECK(model.ols_sigma2() > 0.8);
  CHECK(model.ols_sigma2() < 1.25);
  CHECK(model.priors().b_sigma2 == doctest::Approx(2.0 * model.ols_sigma2()));
  CHECK(model.priors().b_lambda0_sq == doctest::Approx(0.02 * model.ols_sigma2()));
  CHECK(model.priors().b_lambda1_sq == doctest::Approx(2e-6));
}

TEST_CASE("filter posterior is smooth near its optimum") {
  const auto path = tvp_synthetic(150, 1.0, 0.01, 4e-4, 17);
  const TvpAr1Model model(path.y);
  const Eigen::VectorXd start = vec({std::log(model.ols_sigma2()),
                                     std::log(0.01 * model.ols_sigma2()),
                                     std::log(1e-6)});
  const auto result = laplace_approx(model, start);
  CHECK(result.converged);
  CHECK(fd_gradient(model, result.mode).lpNorm<Eigen::Infinity>() < 1e-4);

  const double at_mode = model.log_unnormalized_density(result.mode);
  const std::vector<Eigen::VectorXd> dirs = {
      vec({1.0, 0.0, 0.0}), vec({0.0, 1.0, 0.0}), vec({0.0, 0.0, 1.0}),
      vec({1.0, 1.0, 1.0}).normalized(), vec({1.0, -1.0, 0.0}).normalized()};
  for (const auto& d : dirs) {
    const double step = 1e-3;
    const double moved = model.log_unnormalized_density(result.mode + step * d);
    CHECK(std::abs(moved - at_mode) <= 10.0 * step);
  }
}

TEST_CASE("equal count knot construction balances every interval") {
  const Eigen::VectorXd x = uniform_draws(310, 42);
  const auto design = build_spline_design(x, 30);
  REQUIRE(design.knots.size() == 30);
  CHECK_FALSE(design.reduced);
  CHECK(design.columns.rows() == 310);
  CHECK(design.columns.cols() == 31);

  const double lo = x.minCoeff(), hi = x.maxCoeff();
  CHECK(design.knots.front() > lo);
  CHECK(design.knots.back() < hi);
  for (std::size_t j = 1; j < design.knots.size(); ++j)
    CHECK(design.knots[j] > design.knots[j - 1]);

  std::vector<double> edges;
  edges.push_back(lo - 1.0);
  edges.insert(edges.end(), design.knots.begin(), design.knots.end());
  edges.push_back(hi + 1.0);
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    int count = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] > edges[j] && x[i] < edges[j + 1]) ++count;
    CHECK(count == 10);
  }
}

TEST_CASE("basis rows below the first knot keep only the linear column") {
  const Eigen::VectorXd x = uniform_draws(310, 42);
  const auto design = build_spline_design(x, 30);
  Eigen::Index argmin = 0;
  x.minCoeff(&argmin);
  CHECK(design.columns(argmin, 0) == x[argmin]);
  for (Eigen::Index j = 1; j < design.columns.cols(); ++j)
    CHECK(design.columns(argmin, j) == 0.0);
  // Truncated columns are nonnegative everywhere.
  CHECK(design.columns.rightCols(design.columns.cols() - 1).minCoeff() >= 0.0);
}

TEST_CASE("truncated quadratic columns are smooth across the knot") {
  // Probe points at the center ranks make the knot land exactly between them.
  const Eigen::VectorXd x = vec(
      {0.1, 0.2, 0.3, 0.4, 0.5 - 1e-6, 0.5 + 1e-6, 0.6, 0.7, 0.8, 0.9});
  const auto design = build_spline_design(x, 1);
  REQUIRE(design.knots.size() == 1);
  const double knot = design.knots[0];
  CHECK(knot == doctest::Approx(0.5).epsilon(1e-12));

  const double left = design.columns(4, 1);
  const double right = design.columns(5, 1);
  CHECK(std::abs(right - left) < 1e-11);  // value continuity
  const double eps = 1e-6;
  const double left_slope = (0.0 - left) / eps;
  const double right_slope = (right - 0.0) / eps;
  CHECK(std::abs(right_slope - left_slope) < 1e-5);  // slope continuity
}

TEST_CASE("knot count shrinks and is flagged when distinct values run short") {
  Eigen::VectorXd x(100);
  for (Eigen::Index i = 0; i < 100; ++i) x[i] = 1.0 + static_cast<double>(i % 5);
  const auto design = build_spline_design(x, 30);
  CHECK(design.reduced);
  REQUIRE(design.knots.size() == 3);
  CHECK(design.knots[0] == doctest::Approx(2.0));
  CHECK(design.knots[1] == doctest::Approx(3.0));
  CHECK(design.knots[2] == doctest::Approx(4.0));

  Eigen::VectorXd heavy = Eigen::VectorXd::Ones(100);
  heavy[98] = 2.0;
  heavy[99] = 3.0;
  const auto degenerate = build_spline_design(heavy, 30);
  CHECK(degenerate.reduced);
  CHECK(degenerate.knots.empty());
  CHECK(degenerate.columns.cols() == 1);
}

TEST_CASE("spline design validates its inputs") {
  CHECK_THROWS_AS(build_spline_design(vec({1.0}), 5), std::invalid_argument);
  CHECK_THROWS_AS(build_spline_design(vec({0.0, std::nan(""), 1.0}), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_spline_design(uniform_draws(20, 1), -1),
                  std::invalid_argument);
}

TEST_CASE("two point marginal likelihood matches the dense bivariate normal") {
  SemiparamConfig cfg;
  cfg.include_intercept = false;
  cfg.v_gamma = 2.0;
  Eigen::MatrixXd covariate(2, 1);
  covariate << 1.0, 2.0;
  const SemiparamModel model(vec({0.3, -0.8}), covariate, {}, cfg);
  REQUIRE(model.dimension() == 1);

  const double sigma2 = 0.49;
  Eigen::MatrixXd cov = sigma2 * Eigen::MatrixXd::Identity(2, 2) +
                        4.0 * covariate * covariate.transpose();
  const double dense =
      oracle::mvn_logpdf_dense(vec({0.3, -0.8}), Eigen::VectorXd::Zero(2), cov);
  CHECK(model.marginal_loglik(sigma2, {}) == doctest::Approx(dense).epsilon(1e-10));

  const double theta0 = std::log(sigma2);
  const double expected = dense - theta0 - 2.0 * model.ols_sigma2() * std::exp(-theta0);
  CHECK(model.log_unnormalized_density(vec({theta0})) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("woodbury evaluation equals the dense covariance evaluation") {
  const Eigen::VectorXd x1 = uniform_draws(50, 8);
  const Eigen::VectorXd x2 = uniform_draws(50, 9);
  const Eigen::VectorXd noise = gaussian_draws(50, 10);
  Eigen::VectorXd y(50);
  for (Eigen::Index i = 0; i < 50; ++i)
    y[i] = std::sin(2.0 * oracle::kPi * x1[i]) + 0.5 * x2[i] + 0.3 * noise[i];

  SemiparamConfig cfg;
  cfg.n_knots = 3;
  Eigen::MatrixXd linear(50, 1);
  linear.col(0) = gaussian_draws(50, 11);
  const SemiparamModel model(y, linear, {x1, x2}, cfg);
  REQUIRE(model.design().cols() == 10);
  REQUIRE(model.dimension() == 3);

  const std::vector<std::pair<double, std::vector<double>>> points = {
      {0.09, {0.25, 1.0}}, {1.0, {1e-4, 4.0}}, {0.5, {2.0, 0.5}}};
  for (const auto& [sigma2, tau2] : points) {
    CHECK(model.marginal_loglik(sigma2, tau2) ==
          doctest::Approx(dense_marginal(model, sigma2, tau2)).epsilon(1e-8));
  }
}

TEST_CASE("woodbury agreement holds on a larger single block fixture") {
  const Eigen::VectorXd x = uniform_draws(200, 31);
  const Eigen::VectorXd noise = gaussian_draws(200, 32);
  Eigen::VectorXd y(200);
  for (Eigen::Index i = 0; i < 200; ++i)
    y[i] = std::cos(3.0 * x[i]) + 0.2 * noise[i];

  SemiparamConfig cfg;
  cfg.n_knots = 10;
  const SemiparamModel model(y, Eigen::MatrixXd(200, 0), {x}, cfg);
  for (double sigma2 : {0.04, 0.7}) {
    CHECK(model.marginal_loglik(sigma2, {0.3}) ==
          doctest::Approx(dense_marginal(model, sigma2, {0.3})).epsilon(1e-8));
  }
}

TEST_CASE("collapsing the spline block variance recovers the linear model") {
  const Eigen::VectorXd x = uniform_draws(60, 14);
  const Eigen::VectorXd noise = gaussian_draws(60, 15);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y[i] = 1.5 * x[i] + 0.4 * noise[i];

  SemiparamConfig cfg;
  cfg.n_knots = 8;
  const SemiparamModel full(y, Eigen::MatrixXd(60, 0), {x}, cfg);
  Eigen::MatrixXd as_linear(60, 1);
  as_linear.col(0) = x;
  const SemiparamModel reduced(y, as_linear, {}, cfg);

  for (double sigma2 : {0.16, 1.0}) {
    CHECK(full.marginal_loglik(sigma2, {1e-12}) ==
          doctest::Approx(reduced.marginal_loglik(sigma2, {})).epsilon(1e-6));
  }
}

TEST_CASE("inner factorization failures surface as flagged minus infinity") {
  const Eigen::VectorXd x = uniform_draws(30, 20);
  const Eigen::VectorXd y = gaussian_draws(30, 21);
  SemiparamConfig cfg;
  cfg.n_knots = 4;
  const SemiparamModel model(y, Eigen::MatrixXd(30, 0), {x}, cfg);

  bool failed = false;
  CHECK(model.marginal_loglik(1e308, {1e-300}, &failed) ==
        -std::numeric_limits<double>::infinity());
  CHECK(failed);
  failed = false;
  CHECK(model.marginal_loglik(0.0, {1.0}, &failed) ==
        -std::numeric_limits<double>::infinity());
  CHECK(failed);

  // The log-scale wrapper maps the same breakdowns to -inf, never NaN.
  CHECK(model.log_unnormalized_density(vec({400.0, -400.0})) ==
        -std::numeric_limits<double>::infinity());
  CHECK(model.log_unnormalized_density(vec({600.0, 0.0})) ==
        -std::numeric_limits<double>::infinity());
  CHECK_FALSE(std::isnan(model.log_unnormalized_density(vec({-600.0, 0.0}))));
  CHECK_THROWS_AS(model.log_unnormalized_density(vec({std::nan(""), 0.0})),
                  std::invalid_argument);
}

TEST_CASE("design assembles intercept linear and spline blocks in order") {
  const Eigen::VectorXd x = uniform_draws(12, 25);
  Eigen::MatrixXd w(12, 1);
  w.col(0) = gaussian_draws(12, 26);
  const Eigen::VectorXd y = gaussian_draws(12, 27);

  SemiparamConfig cfg;
  cfg.n_knots = 2;
  const SemiparamModel model(y, w, {x}, cfg);
  const auto& z = model.design();
  REQUIRE(z.cols() == 5);
  CHECK((z.col(0).array() == 1.0).all());
  CHECK(z.col(1) == w.col(0));
  CHECK(z.col(2) == x);
  const auto& spline = model.spline_designs()[0];
  CHECK(z.col(3) == spline.columns.col(1));
  CHECK(z.col(4) == spline.columns.col(2));

  const Eigen::VectorXd v = model.prior_variance_diagonal({0.3});
  for (int i = 0; i < 3; ++i) CHECK(v[i] == doctest::Approx(100.0 * 100.0));
  CHECK(v[3] == doctest::Approx(0.3));
  CHECK(v[4] == doctest::Approx(0.3));

  const auto names = model.parameter_names();
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "ln_sigma2_eps");
  CHECK(names[1] == "ln_tau2_1");
}

TEST_CASE("additive model validates its inputs") {
  const Eigen::VectorXd y = gaussian_draws(20, 1);
  const Eigen::VectorXd x = uniform_draws(20, 2);
  CHECK_THROWS_AS(SemiparamModel(y, Eigen::MatrixXd(19, 1), {x}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SemiparamModel(y, Eigen::MatrixXd(20, 0), {uniform_draws(19, 3)}, {}),
                  std::invalid_argument);
  SemiparamConfig bad;
  bad.v_gamma = 0.0;
  CHECK_THROWS_AS(SemiparamModel(y, Eigen::MatrixXd(20, 0), {x}, bad),
                  std::invalid_argument);

  // Five distinct covariate values cap the spline at three knots; the design
  // then needs more rows than columns.
  Eigen::VectorXd five(5);
  five << 1.0, 2.0, 3.0, 4.0, 5.0;
  CHECK_THROWS_AS(SemiparamModel(gaussian_draws(5, 4), Eigen::MatrixXd(5, 0),
                                 {five}, SemiparamConfig{}),
                  std::invalid_argument);
}

TEST_CASE("additive model log density is pure") {
  const Eigen::VectorXd x = uniform_draws(40, 33);
  const Eigen::VectorXd y = gaussian_draws(40, 34);
  SemiparamConfig cfg;
  cfg.n_knots = 5;
  const SemiparamModel model(y, Eigen::MatrixXd(40, 0), {x}, cfg);
  const Eigen::VectorXd theta = vec({-0.7, -3.0});
  CHECK(model.log_unnormalized_density(theta) == model.log_unnormalized_density(theta));
}

TEST_CASE("newton settles the additive model posterior") {
  const Eigen::VectorXd x = uniform_draws(80, 50);
  const Eigen::VectorXd noise = gaussian_draws(80, 51);
  Eigen::VectorXd y(80);
  for (Eigen::Index i = 0; i < 80; ++i)
    y[i] = std::sin(2.0 * oracle::kPi * x[i]) + 0.3 * noise[i];

  SemiparamConfig cfg;
  cfg.n_knots = 6;
  const SemiparamModel model(y, Eigen::MatrixXd(80, 0), {x}, cfg);
  const Eigen::VectorXd start = vec({std::log(model.ols_sigma2()), std::log(0.01)});
  const auto result = laplace_approx(model, start);
  CHECK(result.converged);
  CHECK(fd_gradient(model, result.mode).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK(std::isfinite(model.log_unnormalized_density(result.mode)));
}

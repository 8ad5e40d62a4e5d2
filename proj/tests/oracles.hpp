#pragma once

// Hand-rolled reference implementations used to check library results.
// Everything here is deliberately naive: direct summation, explicit inverses,
// composite Simpson quadrature.  Nothing includes library headers.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

// Scalar normal density.
inline double normal_pdf(double z, double mean, double var) {
  const double d = z - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * kPi * var);
}

// Term-by-term scalar mixture density, no log-sum-exp.
inline double mixture_pdf_1d(const std::vector<double>& weights,
                             const std::vector<double>& means,
                             const std::vector<double>& vars, double z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    acc += weights[i] * normal_pdf(z, means[i], vars[i]);
  return acc;
}

// Dense multivariate normal log-density via explicit inverse and determinant
// (LU based, independent of Cholesky code paths).
inline double mvn_logpdf_dense(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov) {
  const Eigen::Index d = mean.size();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  const double det = lu.determinant();
  if (det <= 0.0) throw std::runtime_error("oracle: covariance not positive");
  const Eigen::VectorXd diff = z - mean;
  const double quad = diff.dot(lu.solve(diff));
  return -0.5 * (static_cast<double>(d) * std::log(2.0 * kPi) + std::log(det) + quad);
}

// Composite Simpson rule on [a,b] with n subintervals (n made even).
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 20000) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// AR(1) series y_t = rho*y_{t-1} + e_t with standard-normal innovations.
inline std::vector<double> ar1_series(double rho, std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<double> y(n);
  double prev = norm(gen) / std::sqrt(1.0 - rho * rho);
  for (std::size_t t = 0; t < n; ++t) {
    prev = rho * prev + norm(gen);
    y[t] = prev;
  }
  return y;
}

// Coordinate-wise sample skewness of a batch of vectors.
inline double sample_skewness(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

}  // namespace oracle

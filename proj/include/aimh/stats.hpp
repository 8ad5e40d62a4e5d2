#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace aimh {

inline Eigen::VectorXd sample_mean(const std::vector<Eigen::VectorXd>& data) {
  if (data.empty()) throw std::invalid_argument("sample_mean needs data");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(data.front().size());
  for (const auto& x : data) m += x;
  return m / static_cast<double>(data.size());
}

// Unbiased (n-1) sample covariance; zero matrix for n < 2.
inline Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& data) {
  if (data.empty()) throw std::invalid_argument("sample_covariance needs data");
  const Eigen::Index d = data.front().size();
  if (data.size() < 2) return Eigen::MatrixXd::Zero(d, d);
  const Eigen::VectorXd m = sample_mean(data);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : data) {
    const Eigen::VectorXd c = x - m;
    s += c * c.transpose();
  }
  return s / static_cast<double>(data.size() - 1);
}

// Coordinate-wise moment skewness m3 / m2^(3/2); 0 where the variance is 0.
inline Eigen::VectorXd coordinate_skewness(const std::vector<Eigen::VectorXd>& data) {
  if (data.empty()) throw std::invalid_argument("coordinate_skewness needs data");
  const Eigen::Index d = data.front().size();
  const double n = static_cast<double>(data.size());
  const Eigen::VectorXd m = sample_mean(data);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(d), m3 = Eigen::VectorXd::Zero(d);
  for (const auto& x : data) {
    const Eigen::ArrayXd c = (x - m).array();
    m2 += (c * c).matrix();
    m3 += (c * c * c).matrix();
  }
  m2 /= n;
  m3 /= n;
  Eigen::VectorXd out(d);
  for (Eigen::Index i = 0; i < d; ++i)
    out[i] = m2[i] > 0.0 ? m3[i] / std::pow(m2[i], 1.5) : 0.0;
  return out;
}

}  // namespace aimh

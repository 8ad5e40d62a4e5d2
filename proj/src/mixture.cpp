#include "aimh/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace aimh {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Normalizes weights exactly and constructs; used by transforms whose raw
// weights may sum away from 1 (e.g. after dropping components).
MixtureOfNormals normalized(std::vector<GaussianComponent> comps) {
  double total = 0.0;
  for (const auto& c : comps) total += c.weight();
  std::vector<GaussianComponent> out;
  out.reserve(comps.size());
  for (const auto& c : comps) out.push_back(c.reweighted(c.weight() / total));
  return MixtureOfNormals(std::move(out));
}

}  // namespace

GaussianComponent::GaussianComponent(double weight, Eigen::VectorXd mean,
                                     Eigen::MatrixXd covariance)
    : weight_(weight), mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (!std::isfinite(weight_) || weight_ <= 0.0 || weight_ > 1.0 + 1e-12)
    throw std::invalid_argument("component weight must lie in (0,1]");
  if (mean_.size() == 0) throw std::invalid_argument("component mean is empty");
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw std::invalid_argument("covariance shape does not match mean");
  const double scale = std::max(cov_.cwiseAbs().maxCoeff(), 1.0);
  if ((cov_ - cov_.transpose().eval()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("covariance must be symmetric");
  Eigen::MatrixXd sym = 0.5 * (cov_ + cov_.transpose().eval());
  cov_ = std::move(sym);
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("covariance must be positive definite");
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

double GaussianComponent::log_pdf(const Eigen::VectorXd& z) const {
  if (z.size() != mean_.size())
    throw std::invalid_argument("point dimension does not match component");
  Eigen::VectorXd y = chol_.triangularView<Eigen::Lower>().solve(z - mean_);
  return -0.5 * (static_cast<double>(mean_.size()) * kLogTwoPi + log_det_ +
                 y.squaredNorm());
}

Eigen::VectorXd GaussianComponent::sample(Rng& rng) const {
  Eigen::VectorXd eps(mean_.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return mean_ + chol_.triangularView<Eigen::Lower>() * eps;
}

GaussianComponent GaussianComponent::reweighted(double new_weight) const {
  GaussianComponent out = *this;
  if (!std::isfinite(new_weight) || new_weight <= 0.0 || new_weight > 1.0 + 1e-12)
    throw std::invalid_argument("component weight must lie in (0,1]");
  out.weight_ = new_weight;
  return out;
}

GaussianComponent GaussianComponent::inflated(double k) const {
  return GaussianComponent(weight_, mean_, cov_ * k);
}

MixtureOfNormals::MixtureOfNormals(std::vector<GaussianComponent> components)
    : comps_(std::move(components)) {
  if (comps_.empty()) throw std::invalid_argument("mixture needs at least one component");
  dim_ = comps_.front().dimension();
  double total = 0.0;
  for (const auto& c : comps_) {
    if (c.dimension() != dim_)
      throw std::invalid_argument("mixture components differ in dimension");
    total += c.weight();
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("mixture weights must sum to 1");
  if (std::abs(total - 1.0) > 0.0)
    for (auto& c : comps_) c = c.reweighted(c.weight() / total);
}

double MixtureOfNormals::log_density(const Eigen::VectorXd& z) const {
  if (z.size() != dim_)
    throw std::invalid_argument("point dimension does not match mixture");
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    terms[i] = std::log(comps_[i].weight()) + comps_[i].log_pdf(z);
    mx = std::max(mx, terms[i]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - mx);
  return mx + std::log(acc);
}

double MixtureOfNormals::density(const Eigen::VectorXd& z) const {
  return std::exp(log_density(z));
}

Eigen::VectorXd MixtureOfNormals::responsibilities(const Eigen::VectorXd& z) const {
  if (z.size() != dim_)
    throw std::invalid_argument("point dimension does not match mixture");
  Eigen::VectorXd terms(static_cast<Eigen::Index>(comps_.size()));
  for (std::size_t i = 0; i < comps_.size(); ++i)
    terms[static_cast<Eigen::Index>(i)] =
        std::log(comps_[i].weight()) + comps_[i].log_pdf(z);
  const double mx = terms.maxCoeff();
  Eigen::VectorXd out = (terms.array() - mx).exp();
  return out / out.sum();
}

Eigen::VectorXd MixtureOfNormals::sample(Rng& rng) const {
  std::vector<double> w(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) w[i] = comps_[i].weight();
  return comps_[rng.categorical(w)].sample(rng);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> MixtureOfNormals::moments() const {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim_);
  for (const auto& c : comps_) mean += c.weight() * c.mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const auto& c : comps_)
    cov += c.weight() * (c.covariance() + c.mean() * c.mean().transpose());
  cov -= mean * mean.transpose();
  return {std::move(mean), std::move(cov)};
}

MixtureOfNormals MixtureOfNormals::marginal(Eigen::Index coord) const {
  if (coord < 0 || coord >= dim_)
    throw std::invalid_argument("marginal coordinate out of range");
  std::vector<GaussianComponent> out;
  out.reserve(comps_.size());
  for (const auto& c : comps_) {
    Eigen::VectorXd m(1);
    m[0] = c.mean()[coord];
    Eigen::MatrixXd v(1, 1);
    v(0, 0) = c.covariance()(coord, coord);
    out.emplace_back(c.weight(), std::move(m), std::move(v));
  }
  return MixtureOfNormals(std::move(out));
}

MixtureOfNormals fatten(const MixtureOfNormals& mix, double k, double heavy_weight) {
  if (!(k > 1.0)) throw std::invalid_argument("fatten factor must exceed 1");
  if (!(heavy_weight > 0.0) || !(heavy_weight < 1.0))
    throw std::invalid_argument("heavy_weight must lie in (0,1)");
  std::vector<GaussianComponent> out;
  out.reserve(2 * mix.size());
  for (const auto& c : mix.components())
    out.push_back(c.reweighted(c.weight() * (1.0 - heavy_weight)));
  for (const auto& c : mix.components())
    out.push_back(c.inflated(k).reweighted(c.weight() * heavy_weight));
  return normalized(std::move(out));
}

MixtureOfNormals defensive_combine(const MixtureOfNormals& g0,
                                   const MixtureOfNormals& gbar, double omega1) {
  if (g0.dimension() != gbar.dimension())
    throw std::invalid_argument("defensive_combine dimension mismatch");
  if (!(omega1 > 0.0) || !(omega1 < 1.0))
    throw std::invalid_argument("omega1 must lie in (0,1)");
  std::vector<GaussianComponent> out;
  out.reserve(g0.size() + gbar.size());
  for (const auto& c : g0.components()) out.push_back(c.reweighted(c.weight() * omega1));
  for (const auto& c : gbar.components())
    out.push_back(c.reweighted(c.weight() * (1.0 - omega1)));
  return normalized(std::move(out));
}

MixtureOfNormals blend(const MixtureOfNormals& prev, const MixtureOfNormals& next,
                       double beta, std::size_t max_components) {
  if (prev.dimension() != next.dimension())
    throw std::invalid_argument("blend dimension mismatch");
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("beta must lie in [0,1]");
  if (beta == 0.0) return next;
  if (beta == 1.0) return prev;
  std::vector<GaussianComponent> out;
  out.reserve(prev.size() + next.size());
  for (const auto& c : next.components())
    out.push_back(c.reweighted(c.weight() * (1.0 - beta)));
  for (const auto& c : prev.components())
    out.push_back(c.reweighted(c.weight() * beta));
  if (out.size() > max_components) {
    std::sort(out.begin(), out.end(),
              [](const GaussianComponent& a, const GaussianComponent& b) {
                return a.weight() > b.weight();
              });
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(max_components), out.end());
  }
  return normalized(std::move(out));
}

}  // namespace aimh

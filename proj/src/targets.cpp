#include "aimh/targets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aimh {

namespace {

// SPD inverse with eigenvalues floored at 1e-8 * trace (1e-8 when the trace
// is not positive).
Eigen::MatrixXd floored_inverse(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd sym = 0.5 * (s + s.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const double tr = sym.trace();
  const double floor = tr > 0.0 ? 1e-8 * tr : 1e-8;
  Eigen::VectorXd inv_vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv_vals.size(); ++i)
    inv_vals[i] = 1.0 / std::max(inv_vals[i], floor);
  return es.eigenvectors() * inv_vals.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::vector<std::string> TargetModel::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(dimension()));
  for (Eigen::Index i = 0; i < dimension(); ++i)
    names.push_back("theta_" + std::to_string(i + 1));
  return names;
}

MixtureTarget::MixtureTarget(MixtureOfNormals mix) : mix_(std::move(mix)) {}

MixtureTarget toy_mixture_1d() {
  auto comp = [](double w, double mean, double var) {
    Eigen::VectorXd m(1);
    m[0] = mean;
    Eigen::MatrixXd v(1, 1);
    v(0, 0) = var;
    return GaussianComponent(w, std::move(m), std::move(v));
  };
  return MixtureTarget(MixtureOfNormals(
      {comp(0.5, 0.0, 1.0), comp(0.3, -3.0, 4.0), comp(0.2, 6.0, 0.5)}));
}

MixtureTarget toy_mixture_15d() {
  const Eigen::Index d = 15;
  Eigen::VectorXd mu2 = Eigen::VectorXd::Zero(d);
  mu2[d - 1] = -3.0;
  return MixtureTarget(MixtureOfNormals(
      {GaussianComponent(0.7, Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)),
       GaussianComponent(0.3, mu2, 2.0 * Eigen::MatrixXd::Identity(d, d))}));
}

LaplaceResult laplace_approx(const TargetModel& target, const Eigen::VectorXd& start) {
  const Eigen::Index d = target.dimension();
  if (start.size() != d)
    throw std::invalid_argument("laplace_approx start dimension mismatch");
  if (!start.allFinite())
    throw std::invalid_argument("laplace_approx needs a finite start");
  auto f = [&](const Eigen::VectorXd& th) {
    return target.log_unnormalized_density(th);
  };
  Eigen::VectorXd theta = start;
  double f_theta = f(theta);
  if (!std::isfinite(f_theta))
    throw std::invalid_argument("laplace_approx start has zero density");

  auto steps = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd h(d);
    for (Eigen::Index i = 0; i < d; ++i) h[i] = 1e-4 * (1.0 + std::abs(th[i]));
    return h;
  };

  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  bool converged = false;
  int iter = 0;
  for (; iter < 200; ++iter) {
    const Eigen::VectorXd h = steps(theta);
    bool finite_derivs = true;
    for (Eigen::Index i = 0; i < d; ++i) {
      Eigen::VectorXd up = theta, dn = theta;
      up[i] += h[i];
      dn[i] -= h[i];
      const double fu = f(up), fd = f(dn);
      grad[i] = (fu - fd) / (2.0 * h[i]);
      hess(i, i) = (fu - 2.0 * f_theta + fd) / (h[i] * h[i]);
      if (!std::isfinite(fu) || !std::isfinite(fd)) finite_derivs = false;
    }
    if (grad.cwiseAbs().maxCoeff() < 1e-6) {
      converged = true;
      break;
    }
    for (Eigen::Index i = 0; i < d && finite_derivs; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j) {
        Eigen::VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
        pp[i] += h[i];
        pp[j] += h[j];
        pm[i] += h[i];
        pm[j] -= h[j];
        mp[i] -= h[i];
        mp[j] += h[j];
        mm[i] -= h[i];
        mm[j] -= h[j];
        const double v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
        hess(i, j) = hess(j, i) = v;
        if (!std::isfinite(v)) finite_derivs = false;
      }

    Eigen::VectorXd direction;
    if (finite_derivs && hess.allFinite()) {
      direction = floored_inverse(-hess) * grad;
    } else {
      direction = grad;  // plain ascent when curvature is unusable
    }
    double t = 1.0;
    double f_next = f(theta + t * direction);
    while (!(f_next > f_theta) && t > 1e-12) {
      t *= 0.5;
      f_next = f(theta + t * direction);
    }
    if (!(f_next > f_theta)) break;  // no ascent left at this resolution
    theta += t * direction;
    f_theta = f_next;
  }

  // Final curvature at the returned iterate.
  const Eigen::VectorXd h = steps(theta);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd up = theta, dn = theta;
    up[i] += h[i];
    dn[i] -= h[i];
    hess(i, i) = (f(up) - 2.0 * f_theta + f(dn)) / (h[i] * h[i]);
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Eigen::VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
      pp[i] += h[i];
      pp[j] += h[j];
      pm[i] += h[i];
      pm[j] -= h[j];
      mp[i] -= h[i];
      mp[j] += h[j];
      mm[i] -= h[i];
      mm[j] -= h[j];
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
    }
  if (!hess.allFinite()) hess = -Eigen::MatrixXd::Identity(d, d);

  LaplaceResult out;
  out.mode = std::move(theta);
  out.neg_inv_hessian = floored_inverse(-hess);
  out.converged = converged;
  out.iterations = iter;
  out.log_density = f_theta;
  return out;
}

}  // namespace aimh

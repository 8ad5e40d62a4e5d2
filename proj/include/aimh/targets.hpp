#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "aimh/mixture.hpp"

namespace aimh {

// Unnormalized log-density the samplers draw from.  Implementations must
// return -inf (never NaN) outside the support and be pure.
class TargetModel {
 public:
  virtual ~TargetModel() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual double log_unnormalized_density(const Eigen::VectorXd& theta) const = 0;
  virtual std::vector<std::string> parameter_names() const;
};

// Exact finite mixture of normals as a target.
class MixtureTarget : public TargetModel {
 public:
  explicit MixtureTarget(MixtureOfNormals mix);
  Eigen::Index dimension() const override { return mix_.dimension(); }
  double log_unnormalized_density(const Eigen::VectorXd& theta) const override {
    return mix_.log_density(theta);
  }
  const MixtureOfNormals& mixture() const { return mix_; }

 private:
  MixtureOfNormals mix_;
};

// 0.5 N(0,1) + 0.3 N(-3,4) + 0.2 N(6,0.5); scalar benchmark target.
MixtureTarget toy_mixture_1d();

// 0.7 N(0,I) + 0.3 N(mu2,2I) in 15 dimensions with mu2 = (0,...,0,-3); only
// the last coordinate is skewed.
MixtureTarget toy_mixture_15d();

struct LaplaceResult {
  Eigen::VectorXd mode;
  Eigen::MatrixXd neg_inv_hessian;  // SPD, eigenvalue-floored
  bool converged;
  int iterations;
  double log_density;  // at mode (best iterate when not converged)
};

// Newton-Raphson with central-difference derivatives and backtracking;
// stops when the gradient infinity-norm drops below 1e-6 or after 200
// iterations.  A non-converged result still carries the best iterate.
LaplaceResult laplace_approx(const TargetModel& target, const Eigen::VectorXd& start);

}  // namespace aimh

#include "aimh/arwm.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace aimh {

ArwmState::ArwmState(Eigen::VectorXd mode, Eigen::MatrixXd laplace_cov,
                     double log_target_at_mode)
    : current(std::move(mode)),
      current_log_target(log_target_at_mode),
      laplace_cov_(std::move(laplace_cov)) {
  if (laplace_cov_.rows() != current.size() || laplace_cov_.cols() != current.size())
    throw std::invalid_argument("ArwmState: covariance dimension mismatch");
  if (Eigen::LLT<Eigen::MatrixXd>(laplace_cov_).info() != Eigen::Success)
    throw std::invalid_argument("ArwmState: covariance must be SPD");
  if (!std::isfinite(current_log_target))
    throw std::invalid_argument("ArwmState: start point must have finite density");
  mean_ = Eigen::VectorXd::Zero(current.size());
  m2_ = Eigen::MatrixXd::Zero(current.size(), current.size());
  update_moments(current);  // the start point is the first draw
}

void ArwmState::update_moments(const Eigen::VectorXd& draw) {
  ++count_;
  const Eigen::VectorXd delta = draw - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (draw - mean_).transpose();
}

Eigen::MatrixXd ArwmState::empirical_covariance() const {
  const Eigen::Index d = current.size();
  if (count_ < 2) return Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd cov = m2_ / static_cast<double>(count_ - 1);
  return 0.5 * (cov + cov.transpose());
}

MixtureOfNormals arwm_proposal(const ArwmState& state) {
  const double d = static_cast<double>(state.dimension());
  const Eigen::Index n = state.dimension();
  if (state.j < 5 * state.dimension()) {
    return MixtureOfNormals(
        {GaussianComponent(1.0, state.current, 0.01 * state.laplace_cov() / d)});
  }
  const Eigen::MatrixXd empirical =
      (2.38 * 2.38 / d) * state.empirical_covariance() +
      1e-10 * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd small = (0.01 / d) * Eigen::MatrixXd::Identity(n, n);
  return MixtureOfNormals(
      {GaussianComponent(1.0 - state.beta, state.current, empirical),
       GaussianComponent(state.beta, state.current, small)});
}

StepResult arwm_step(ArwmState& state, const TargetModel& target, Rng& rng) {
  if (!std::isfinite(state.current_log_target))
    throw std::invalid_argument("arwm_step needs a finite current log target");

  const MixtureOfNormals proposal = arwm_proposal(state);
  const Eigen::VectorXd candidate = proposal.sample(rng);
  const double lp_prop = target.log_unnormalized_density(candidate);
  if (std::isnan(lp_prop)) throw std::runtime_error("target returned NaN");

  // Symmetric proposal: the q-ratio cancels exactly.
  const double alpha =
      lp_prop == -std::numeric_limits<double>::infinity()
          ? 0.0
          : std::exp(std::min(0.0, lp_prop - state.current_log_target));
  const bool accept = rng.uniform() < alpha;
  if (accept) {
    state.current = candidate;
    state.current_log_target = lp_prop;
  }
  ++state.j;
  state.update_moments(state.current);
  return {accept, alpha};
}

RunReport run_arwm(const TargetModel& target, const Eigen::VectorXd& mode,
                   const Eigen::MatrixXd& laplace_cov, long n_iterations, Rng& rng) {
  if (n_iterations < 1) throw std::invalid_argument("run_arwm needs iterations");
  const auto started = std::chrono::steady_clock::now();

  ArwmState state(mode, laplace_cov, target.log_unnormalized_density(mode));
  RunReport report;
  report.n_iterations = n_iterations;
  report.parameter_names = target.parameter_names();
  report.draws.reserve(static_cast<std::size_t>(n_iterations) + 1);
  report.draws.push_back(mode);
  report.alpha_trace.reserve(static_cast<std::size_t>(n_iterations));
  report.accepted.reserve(static_cast<std::size_t>(n_iterations));

  long accepted_count = 0;
  for (long i = 0; i < n_iterations; ++i) {
    const StepResult step = arwm_step(state, target, rng);
    report.draws.push_back(state.current);
    report.alpha_trace.push_back(step.alpha);
    report.accepted.push_back(step.accepted ? 1 : 0);
    if (step.accepted) ++accepted_count;
  }
  report.accepted_count = accepted_count;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace aimh

#pragma once

#include <Eigen/Dense>

#include "aimh/mixture.hpp"
#include "aimh/rng.hpp"
#include "aimh/sampler.hpp"
#include "aimh/targets.hpp"

namespace aimh {

// Adaptive random-walk Metropolis baseline.  The proposal is centered at the
// current point: before 5d iterations a fixed 0.1^2 V / d step, afterwards a
// 0.95 / 0.05 mixture of the scaled empirical covariance and a small identity
// step.  The empirical moments run over every draw, duplicates included.
class ArwmState {
 public:
  ArwmState(Eigen::VectorXd mode, Eigen::MatrixXd laplace_cov,
            double log_target_at_mode);

  Eigen::VectorXd current;
  double current_log_target;
  long j = 0;  // completed iterations
  double beta = 0.05;

  Eigen::Index dimension() const { return current.size(); }
  const Eigen::MatrixXd& laplace_cov() const { return laplace_cov_; }

  // Streaming (Welford) moment updates over the draw sequence.
  void update_moments(const Eigen::VectorXd& draw);
  const Eigen::VectorXd& running_mean() const { return mean_; }
  // Unbiased covariance of all draws seen so far; identity before two draws.
  Eigen::MatrixXd empirical_covariance() const;
  long draw_count() const { return count_; }

 private:
  Eigen::MatrixXd laplace_cov_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  long count_ = 0;
};

// Proposal distribution for the state's current iteration, centered at the
// current point.  The empirical component carries a 1e-10 identity jitter so
// a degenerate draw history still factorizes.
MixtureOfNormals arwm_proposal(const ArwmState& state);

// One symmetric-proposal MH step; alpha = min(1, pi'/pi).  The new current
// point (accepted or duplicated) enters the running moments.
StepResult arwm_step(ArwmState& state, const TargetModel& target, Rng& rng);

// Full baseline run started at the supplied mode.  The report's draws hold
// the start point followed by one entry per iteration; no refits are logged.
RunReport run_arwm(const TargetModel& target, const Eigen::VectorXd& mode,
                   const Eigen::MatrixXd& laplace_cov, long n_iterations,
                   Rng& rng);

}  // namespace aimh

#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aimh/khm.hpp"
#include "aimh/mixture.hpp"
#include "aimh/rng.hpp"
#include "aimh/targets.hpp"

namespace aimh {

// Layered independence proposal q = omega1 g0 + (1-omega1) gbar.  g0 is the
// fixed defensive component, gbar the fitted mixture after tail fattening,
// gstar the raw fit kept around for the end-of-loose g0 rebuild.
struct ProposalState {
  ProposalState(MixtureOfNormals g0_in, MixtureOfNormals gbar_in,
                double omega1_in = 0.05, double omega2_in = 0.15,
                double fatten_k_in = 16.0, double beta_n_in = 0.0);

  MixtureOfNormals g0;
  MixtureOfNormals gbar;
  std::optional<MixtureOfNormals> gstar;
  double omega1;
  double omega2;
  double fatten_k;
  double beta_n;
  MixtureOfNormals q;  // defensive_combine(g0, gbar, omega1), kept in sync
};

// Laplace-based initial proposal: g0 = 0.6 N(mode, S) + 0.4 N(mode, 25 S),
// gbar starts equal to g0.  Throws std::invalid_argument when S is not SPD
// (callers fall back to a prior-based g0).
ProposalState init_proposal_laplace(const Eigen::VectorXd& mode,
                                    const Eigen::MatrixXd& neg_inv_hessian,
                                    double omega1 = 0.05, double omega2 = 0.15,
                                    double fatten_k = 16.0, double beta_n = 0.0);

enum class Phase { Loose, Strict };
enum class RefitDecision { No, Scheduled, Triggered };

// Refit timetable: a first fit once enough draws were accepted, a fixed
// ladder of total-iteration points that continues every ladder_tail_every
// beyond its last entry, a low-acceptance trigger (loose phase only), and the
// loose-exit rule.
struct AdaptationSchedule {
  int first_update_accepted = 20;
  std::vector<long> fixed_update_points = default_ladder();
  long ladder_tail_every = 1000;
  int trigger_window = 10;         // L
  double trigger_level = 0.1;      // alpha_L
  int loose_exit_window = 500;     // M
  double loose_exit_level = 0.02;  // alpha_M
  long strict_update_every = 1000;
  std::size_t history_cap = 10000;

  // 50,100,...,400, 500,600,...,1000, 1500,2000,...,3000.
  static std::vector<long> default_ladder();
  void validate() const;
};

struct RefitRecord {
  long iteration;
  int component_count;  // raw fitted components, before fattening
  double bic;
  bool triggered;  // trigger vs schedule
  Phase phase;
  double dominance_max = 0.0;
  double diminishing_sup = 0.0;
};

// Chain bookkeeping: current point, the acceptance-probability window, the
// thinned draw history and the refit log.  The history keeps every stride-th
// draw (duplicates included); the stride doubles whenever the buffer would
// pass its cap, so it never shrinks and the buffer never exceeds the cap.
class ChainState {
 public:
  ChainState(Eigen::VectorXd initial, double log_target,
             const AdaptationSchedule& schedule);

  Eigen::VectorXd current;
  double current_log_target;
  Phase phase = Phase::Loose;
  long iteration = 0;
  long accepted_count = 0;
  long last_refit_iteration = 0;
  bool first_refit_done = false;
  std::vector<RefitRecord> refit_log;

  void push_alpha(double alpha);
  // Mean / min over the most recent `window` stored values; the window must
  // not exceed alpha_count().
  double alpha_mean(int window) const;
  double alpha_min(int window) const;
  std::size_t alpha_count() const { return alpha_trace_.size(); }

  void push_history(const Eigen::VectorXd& draw);
  const std::vector<Eigen::VectorXd>& history() const { return history_; }
  std::size_t history_stride() const { return stride_; }

 private:
  std::size_t window_cap_;
  std::size_t history_cap_;
  std::deque<double> alpha_trace_;
  std::vector<Eigen::VectorXd> history_;
  std::size_t stride_ = 1;
  std::size_t seen_ = 0;
};

// min(1, exp((log pi' - log pi) + (log q - log q'))); -inf proposals give 0.
double acceptance_probability(double log_target_prop, double log_target_cur,
                              double log_q_prop, double log_q_cur);

struct StepResult {
  bool accepted;
  double alpha;
};

// One independence-MH step: propose from proposal.q, accept with the computed
// alpha, then append the (possibly duplicated) draw to the history and alpha
// to the window.  A NaN from the target is a model bug and throws.
StepResult mh_step(ChainState& state, const ProposalState& proposal,
                   const TargetModel& target, Rng& rng);

RefitDecision should_refit(const ChainState& state, const AdaptationSchedule& schedule);

// Loose -> Strict once every acceptance probability in the last M iterations
// clears alpha_M; on exit g0 is rebuilt as 0.6 g_last + 0.4 (25x-inflated
// g_last) from the raw fit and q is recombined.  Returns true on transition.
bool maybe_exit_loose(ChainState& state, ProposalState& proposal,
                      const AdaptationSchedule& schedule);

struct Partition {
  std::vector<Eigen::Index> normal;
  std::vector<Eigen::Index> skew;
  std::vector<Eigen::Index> zero_variance;  // flagged subset of normal
};

// Coordinates with |sample skewness| < 0.2 go to the normal group; histories
// shorter than 50 draws put everything in the skew group (the statistic would
// be noise at that size).
Partition partition_parameters(const std::vector<Eigen::VectorXd>& history);

// Joint components from a moment fit on the normal block and a mixture fit on
// the skew block: per-component cross blocks are responsibility-weighted
// cross moments; a non-SPD assembly shrinks its cross block toward zero.
MixtureOfNormals assemble_partitioned_fit(const std::vector<Eigen::VectorXd>& history,
                                          const Partition& split,
                                          const MixtureOfNormals& skew_fit);

struct RefitResult {
  ProposalState proposal;
  int component_count;
  double bic;
};

// Full refit pipeline: partition, fit, assemble, fatten with
// omega2/(1-omega1), blend with beta_n, recombine with g0.
RefitResult refit_proposal(const ChainState& state, const ProposalState& previous,
                           const KhmConfig& cfg, Rng& rng);

struct RunReport {
  std::vector<Eigen::VectorXd> draws;  // z0, z1, then one entry per iteration
  std::vector<double> alpha_trace;     // one entry per iteration
  std::vector<int> accepted;           // 0/1, aligned with alpha_trace
  std::vector<RefitRecord> refit_log;
  long phase_transition_iteration = -1;  // -1: never left the loose phase
  long n_iterations = 0;
  long accepted_count = 0;
  double runtime_seconds = 0.0;
  std::vector<std::string> parameter_names;
  std::optional<ProposalState> final_proposal;
};

// Runs the adaptive chain: z0 and z1 are drawn from the initial q, then each
// iteration steps, refits per the schedule, and tests the loose exit.  The
// dominance and diminishing monitors are evaluated after every refit on a
// fixed panel of g0 samples.  beta_schedule, when supplied, sets the blend
// weight before the k-th refit (k counted from 0); otherwise the proposal's
// beta_n stays fixed.
RunReport run_chain(const TargetModel& target, ProposalState proposal,
                    long n_iterations, const AdaptationSchedule& schedule,
                    const KhmConfig& cfg, Rng& rng,
                    const std::function<double(long)>& beta_schedule = {});

}  // namespace aimh

#include "aimh/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "aimh/diagnostics.hpp"
#include "aimh/stats.hpp"

namespace aimh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMonitorPoints = 1000;
constexpr int kInitDrawAttempts = 1000;

// Symmetrize and floor eigenvalues so moment estimates from degenerate
// histories still factorize.
Eigen::MatrixXd spd_floor(Eigen::MatrixXd m) {
  m = 0.5 * (m + m.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double floor_at = std::max(1e-8 * std::max(m.trace(), 0.0), 1e-12);
  if (es.eigenvalues().minCoeff() >= floor_at) return m;
  const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(floor_at);
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

// BIC of a single moment-matched normal, matching the clustering module's
// parameter count at one component.
double single_normal_bic(const std::vector<Eigen::VectorXd>& data,
                         const MixtureOfNormals& fit) {
  double loglik = 0.0;
  for (const auto& x : data) loglik += fit.log_density(x);
  const double d = static_cast<double>(fit.dimension());
  const double n_params = d + d * (d + 1.0) / 2.0;
  return -2.0 * loglik + n_params * std::log(static_cast<double>(data.size()));
}

bool ladder_crossed(const AdaptationSchedule& s, long last, long now) {
  for (long p : s.fixed_update_points)
    if (last < p && p <= now) return true;
  const long base = s.fixed_update_points.empty() ? 0 : s.fixed_update_points.back();
  if (s.ladder_tail_every > 0 && now > base) {
    const long k_now = (now - base) / s.ladder_tail_every;
    const long k_last = last > base ? (last - base) / s.ladder_tail_every : 0;
    if (k_now > k_last) return true;
  }
  return false;
}

std::pair<Eigen::VectorXd, double> draw_finite(const MixtureOfNormals& q,
                                               const TargetModel& target, Rng& rng) {
  for (int attempt = 0; attempt < kInitDrawAttempts; ++attempt) {
    Eigen::VectorXd z = q.sample(rng);
    const double lp = target.log_unnormalized_density(z);
    if (std::isnan(lp)) throw std::runtime_error("target returned NaN");
    if (std::isfinite(lp)) return {std::move(z), lp};
  }
  throw std::runtime_error("initial proposal never reached the target support");
}

}  // namespace

ProposalState::ProposalState(MixtureOfNormals g0_in, MixtureOfNormals gbar_in,
                             double omega1_in, double omega2_in, double fatten_k_in,
                             double beta_n_in)
    : g0(std::move(g0_in)),
      gbar(std::move(gbar_in)),
      omega1(omega1_in),
      omega2(omega2_in),
      fatten_k(fatten_k_in),
      beta_n(beta_n_in),
      q(defensive_combine(g0, gbar, omega1)) {
  if (!(omega1 > 0.0) || !(omega2 > 0.0) || !(omega1 + omega2 < 1.0))
    throw std::invalid_argument("ProposalState needs omega1, omega2 > 0 with sum < 1");
  if (!(fatten_k > 1.0)) throw std::invalid_argument("ProposalState needs fatten_k > 1");
  if (beta_n < 0.0 || beta_n > 1.0)
    throw std::invalid_argument("ProposalState needs beta_n in [0,1]");
}

ProposalState init_proposal_laplace(const Eigen::VectorXd& mode,
                                    const Eigen::MatrixXd& neg_inv_hessian,
                                    double omega1, double omega2, double fatten_k,
                                    double beta_n) {
  const MixtureOfNormals base({GaussianComponent(1.0, mode, neg_inv_hessian)});
  const MixtureOfNormals g0 = fatten(base, 25.0, 0.4);
  ProposalState state(g0, g0, omega1, omega2, fatten_k, beta_n);
  state.gstar = base;
  return state;
}

std::vector<long> AdaptationSchedule::default_ladder() {
  std::vector<long> points;
  for (long p = 50; p <= 400; p += 50) points.push_back(p);
  for (long p = 500; p <= 1000; p += 100) points.push_back(p);
  for (long p = 1500; p <= 3000; p += 500) points.push_back(p);
  return points;
}

void AdaptationSchedule::validate() const {
  if (first_update_accepted < 1)
    throw std::invalid_argument("schedule: first_update_accepted must be positive");
  for (std::size_t i = 1; i < fixed_update_points.size(); ++i)
    if (fixed_update_points[i] <= fixed_update_points[i - 1])
      throw std::invalid_argument("schedule: update points must increase strictly");
  if (!fixed_update_points.empty() && fixed_update_points.front() <= 0)
    throw std::invalid_argument("schedule: update points must be positive");
  const bool probs_ok = trigger_level > 0.0 && trigger_level < 1.0 &&
                        loose_exit_level > 0.0 && loose_exit_level < 1.0;
  if (!probs_ok) throw std::invalid_argument("schedule: levels must lie in (0,1)");
  if (trigger_window < 1 || loose_exit_window < 1)
    throw std::invalid_argument("schedule: windows must be positive");
  if (strict_update_every < 1 || ladder_tail_every < 1)
    throw std::invalid_argument("schedule: update spacing must be positive");
  if (history_cap < 2) throw std::invalid_argument("schedule: history cap too small");
}

ChainState::ChainState(Eigen::VectorXd initial, double log_target,
                       const AdaptationSchedule& schedule)
    : current(std::move(initial)),
      current_log_target(log_target),
      window_cap_(static_cast<std::size_t>(schedule.loose_exit_window)),
      history_cap_(schedule.history_cap) {
  schedule.validate();
  if (!std::isfinite(log_target))
    throw std::invalid_argument("ChainState needs a finite initial log target");
}

void ChainState::push_alpha(double alpha) {
  alpha_trace_.push_back(alpha);
  if (alpha_trace_.size() > window_cap_) alpha_trace_.pop_front();
}

double ChainState::alpha_mean(int window) const {
  if (window < 1 || static_cast<std::size_t>(window) > alpha_trace_.size())
    throw std::invalid_argument("alpha_mean: window exceeds stored trace");
  return std::accumulate(alpha_trace_.end() - window, alpha_trace_.end(), 0.0) /
         static_cast<double>(window);
}

double ChainState::alpha_min(int window) const {
  if (window < 1 || static_cast<std::size_t>(window) > alpha_trace_.size())
    throw std::invalid_argument("alpha_min: window exceeds stored trace");
  return *std::min_element(alpha_trace_.end() - window, alpha_trace_.end());
}

void ChainState::push_history(const Eigen::VectorXd& draw) {
  if (seen_ % stride_ == 0) {
    if (history_.size() == history_cap_) {
      std::vector<Eigen::VectorXd> kept;
      kept.reserve(history_.size() / 2 + 1);
      for (std::size_t i = 0; i < history_.size(); i += 2)
        kept.push_back(std::move(history_[i]));
      history_ = std::move(kept);
      stride_ *= 2;
      if (seen_ % stride_ == 0) history_.push_back(draw);
    } else {
      history_.push_back(draw);
    }
  }
  ++seen_;
}

double acceptance_probability(double log_target_prop, double log_target_cur,
                              double log_q_prop, double log_q_cur) {
  const double log_ratio =
      (log_target_prop - log_target_cur) + (log_q_cur - log_q_prop);
  if (std::isnan(log_ratio))
    throw std::runtime_error("acceptance_probability: NaN log ratio");
  return std::exp(std::min(0.0, log_ratio));
}

StepResult mh_step(ChainState& state, const ProposalState& proposal,
                   const TargetModel& target, Rng& rng) {
  if (!std::isfinite(state.current_log_target))
    throw std::invalid_argument("mh_step needs a finite current log target");

  const Eigen::VectorXd candidate = proposal.q.sample(rng);
  const double lp_prop = target.log_unnormalized_density(candidate);
  if (std::isnan(lp_prop)) throw std::runtime_error("target returned NaN");

  double alpha = 0.0;
  if (lp_prop != kNegInf) {
    const double lq_cur = proposal.q.log_density(state.current);
    const double lq_prop = proposal.q.log_density(candidate);
    alpha = acceptance_probability(lp_prop, state.current_log_target, lq_prop, lq_cur);
  }
  const bool accept = rng.uniform() < alpha;
  if (accept) {
    state.current = candidate;
    state.current_log_target = lp_prop;
    ++state.accepted_count;
  }
  ++state.iteration;
  state.push_alpha(alpha);
  state.push_history(state.current);
  return {accept, alpha};
}

RefitDecision should_refit(const ChainState& state, const AdaptationSchedule& schedule) {
  if (!state.first_refit_done) {
    return state.accepted_count >= schedule.first_update_accepted
               ? RefitDecision::Scheduled
               : RefitDecision::No;
  }
  if (state.phase == Phase::Strict) {
    return state.iteration - state.last_refit_iteration >= schedule.strict_update_every
               ? RefitDecision::Scheduled
               : RefitDecision::No;
  }
  if (ladder_crossed(schedule, state.last_refit_iteration, state.iteration))
    return RefitDecision::Scheduled;
  // Low-acceptance trigger, loose phase only; the window length doubles as a
  // cool-down so one bad stretch cannot refit on consecutive iterations.
  if (state.iteration - state.last_refit_iteration >= schedule.trigger_window &&
      state.alpha_count() >= static_cast<std::size_t>(schedule.trigger_window) &&
      state.alpha_mean(schedule.trigger_window) < schedule.trigger_level)
    return RefitDecision::Triggered;
  return RefitDecision::No;
}

bool maybe_exit_loose(ChainState& state, ProposalState& proposal,
                      const AdaptationSchedule& schedule) {
  if (state.phase != Phase::Loose) return false;
  if (state.iteration < schedule.loose_exit_window) return false;
  if (state.alpha_count() < static_cast<std::size_t>(schedule.loose_exit_window))
    return false;
  if (!(state.alpha_min(schedule.loose_exit_window) > schedule.loose_exit_level))
    return false;

  state.phase = Phase::Strict;
  const MixtureOfNormals& last_fit = proposal.gstar ? *proposal.gstar : proposal.gbar;
  std::optional<MixtureOfNormals> keep_star = proposal.gstar;
  ProposalState next(fatten(last_fit, 25.0, 0.4), proposal.gbar, proposal.omega1,
                     proposal.omega2, proposal.fatten_k, proposal.beta_n);
  next.gstar = std::move(keep_star);
  proposal = std::move(next);
  return true;
}

Partition partition_parameters(const std::vector<Eigen::VectorXd>& history) {
  if (history.empty()) throw std::invalid_argument("partition_parameters needs draws");
  const Eigen::Index d = history.front().size();
  Partition split;
  if (history.size() < 50) {
    for (Eigen::Index i = 0; i < d; ++i) split.skew.push_back(i);
    return split;
  }
  const Eigen::VectorXd skewness = coordinate_skewness(history);
  const Eigen::VectorXd variances = sample_covariance(history).diagonal();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (variances[i] <= 0.0) {
      split.normal.push_back(i);
      split.zero_variance.push_back(i);
    } else if (std::abs(skewness[i]) < 0.2) {
      split.normal.push_back(i);
    } else {
      split.skew.push_back(i);
    }
  }
  return split;
}

MixtureOfNormals assemble_partitioned_fit(const std::vector<Eigen::VectorXd>& history,
                                          const Partition& split,
                                          const MixtureOfNormals& skew_fit) {
  if (history.empty()) throw std::invalid_argument("assemble needs draws");
  const Eigen::Index d = history.front().size();
  const Eigen::Index d1 = static_cast<Eigen::Index>(split.normal.size());
  const Eigen::Index d2 = static_cast<Eigen::Index>(split.skew.size());
  if (d1 == 0 || d2 == 0)
    throw std::invalid_argument("assemble needs both coordinate groups");
  if (d1 + d2 != d) throw std::invalid_argument("assemble: partition does not cover");
  if (skew_fit.dimension() != d2)
    throw std::invalid_argument("assemble: skew fit dimension mismatch");

  const std::size_t n = history.size();
  std::vector<Eigen::VectorXd> block1(n, Eigen::VectorXd(d1));
  std::vector<Eigen::VectorXd> block2(n, Eigen::VectorXd(d2));
  for (std::size_t t = 0; t < n; ++t) {
    for (Eigen::Index a = 0; a < d1; ++a) block1[t][a] = history[t][split.normal[a]];
    for (Eigen::Index a = 0; a < d2; ++a) block2[t][a] = history[t][split.skew[a]];
  }
  const Eigen::VectorXd mu1 = sample_mean(block1);
  const Eigen::MatrixXd cov1 = spd_floor(sample_covariance(block1));

  // Responsibility-weighted cross moments tie the two blocks together one
  // component at a time.
  const std::size_t k = skew_fit.size();
  std::vector<double> mass(k, 0.0);
  std::vector<Eigen::MatrixXd> cross(k, Eigen::MatrixXd::Zero(d1, d2));
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::VectorXd resp = skew_fit.responsibilities(block2[t]);
    const Eigen::VectorXd dev1 = block1[t] - mu1;
    for (std::size_t i = 0; i < k; ++i) {
      mass[i] += resp[i];
      cross[i] +=
          resp[i] * dev1 * (block2[t] - skew_fit.components()[i].mean()).transpose();
    }
  }

  std::vector<GaussianComponent> joint;
  joint.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& comp = skew_fit.components()[i];
    Eigen::VectorXd mean(d);
    for (Eigen::Index a = 0; a < d1; ++a) mean[split.normal[a]] = mu1[a];
    for (Eigen::Index a = 0; a < d2; ++a) mean[split.skew[a]] = comp.mean()[a];

    Eigen::MatrixXd omega12 =
        mass[i] > 1e-12 ? Eigen::MatrixXd(cross[i] / mass[i])
                        : Eigen::MatrixXd::Zero(d1, d2);
    Eigen::MatrixXd cov(d, d);
    const auto scatter = [&](const Eigen::MatrixXd& off) {
      for (Eigen::Index a = 0; a < d1; ++a)
        for (Eigen::Index b = 0; b < d1; ++b)
          cov(split.normal[a], split.normal[b]) = cov1(a, b);
      for (Eigen::Index a = 0; a < d2; ++a)
        for (Eigen::Index b = 0; b < d2; ++b)
          cov(split.skew[a], split.skew[b]) = comp.covariance()(a, b);
      for (Eigen::Index a = 0; a < d1; ++a)
        for (Eigen::Index b = 0; b < d2; ++b) {
          cov(split.normal[a], split.skew[b]) = off(a, b);
          cov(split.skew[b], split.normal[a]) = off(a, b);
        }
    };
    scatter(omega12);
    // Both diagonal blocks are SPD, so shrinking the cross block far enough
    // always restores positive definiteness.
    for (int shrink = 0; shrink < 8 && is_degenerate_covariance(cov); ++shrink) {
      omega12 *= 0.5;
      scatter(omega12);
    }
    if (is_degenerate_covariance(cov)) scatter(Eigen::MatrixXd::Zero(d1, d2));
    joint.emplace_back(comp.weight(), std::move(mean), std::move(cov));
  }
  return MixtureOfNormals(std::move(joint));
}

RefitResult refit_proposal(const ChainState& state, const ProposalState& previous,
                           const KhmConfig& cfg, Rng& rng) {
  const auto& hist = state.history();
  if (hist.size() < 2) throw std::invalid_argument("refit_proposal needs a history");

  const Partition split = partition_parameters(hist);
  std::optional<MixtureOfNormals> raw;
  double bic = 0.0;
  if (split.skew.empty()) {
    // Every coordinate looks normal: a single moment-matched component, no
    // clustering call.
    const Eigen::VectorXd mu = sample_mean(hist);
    const Eigen::MatrixXd cov = spd_floor(sample_covariance(hist));
    raw = MixtureOfNormals({GaussianComponent(1.0, mu, cov)});
    bic = single_normal_bic(hist, *raw);
  } else {
    std::vector<Eigen::VectorXd> block2;
    block2.reserve(hist.size());
    const Eigen::Index d2 = static_cast<Eigen::Index>(split.skew.size());
    for (const auto& x : hist) {
      Eigen::VectorXd row(d2);
      for (Eigen::Index a = 0; a < d2; ++a) row[a] = x[split.skew[a]];
      block2.push_back(std::move(row));
    }
    ClusterFit fit = fit_with_bic(block2, cfg, rng);
    bic = fit.bic;
    raw = split.normal.empty()
              ? fit.mixture
              : assemble_partitioned_fit(hist, split, fit.mixture);
  }

  const double heavy = previous.omega2 / (1.0 - previous.omega1);
  const MixtureOfNormals fattened = fatten(*raw, previous.fatten_k, heavy);
  const MixtureOfNormals blended = blend(previous.gbar, fattened, previous.beta_n);
  ProposalState next(previous.g0, blended, previous.omega1, previous.omega2,
                     previous.fatten_k, previous.beta_n);
  const int count = static_cast<int>(raw->size());
  next.gstar = std::move(raw);
  return {std::move(next), count, bic};
}

RunReport run_chain(const TargetModel& target, ProposalState proposal,
                    long n_iterations, const AdaptationSchedule& schedule,
                    const KhmConfig& cfg, Rng& rng,
                    const std::function<double(long)>& beta_schedule) {
  if (n_iterations < 1) throw std::invalid_argument("run_chain needs iterations");
  schedule.validate();
  if (proposal.q.dimension() != target.dimension())
    throw std::invalid_argument("run_chain: proposal and target dimensions differ");

  const auto started = std::chrono::steady_clock::now();
  Rng monitor_rng(rng.raw());
  std::vector<Eigen::VectorXd> panel(kMonitorPoints);
  for (auto& z : panel) z = proposal.g0.sample(monitor_rng);

  auto [z0, lp0] = draw_finite(proposal.q, target, rng);
  auto [z1, lp1] = draw_finite(proposal.q, target, rng);
  ChainState state(std::move(z1), lp1, schedule);
  state.push_history(z0);
  state.push_history(state.current);

  RunReport report;
  report.n_iterations = n_iterations;
  report.parameter_names = target.parameter_names();
  report.draws.reserve(static_cast<std::size_t>(n_iterations) + 2);
  report.draws.push_back(std::move(z0));
  report.draws.push_back(state.current);
  report.alpha_trace.reserve(static_cast<std::size_t>(n_iterations));
  report.accepted.reserve(static_cast<std::size_t>(n_iterations));

  for (long i = 0; i < n_iterations; ++i) {
    const StepResult step = mh_step(state, proposal, target, rng);
    report.draws.push_back(state.current);
    report.alpha_trace.push_back(step.alpha);
    report.accepted.push_back(step.accepted ? 1 : 0);

    const RefitDecision decision = should_refit(state, schedule);
    if (decision != RefitDecision::No) {
      if (beta_schedule)
        proposal.beta_n = beta_schedule(static_cast<long>(state.refit_log.size()));
      const MixtureOfNormals previous_gbar = proposal.gbar;
      RefitResult refit = refit_proposal(state, proposal, cfg, rng);
      proposal = std::move(refit.proposal);

      RefitRecord record{state.iteration,
                         refit.component_count,
                         refit.bic,
                         decision == RefitDecision::Triggered,
                         state.phase,
                         dominance_monitor(proposal.gbar, proposal.g0, panel).max_ratio,
                         diminishing_monitor(previous_gbar, proposal.gbar, proposal.g0,
                                             panel)};
      state.refit_log.push_back(record);
      state.last_refit_iteration = state.iteration;
      state.first_refit_done = true;
    }

    if (maybe_exit_loose(state, proposal, schedule)) {
      report.phase_transition_iteration = state.iteration;
      // Dominance is judged against the active defensive component, so the
      // panel follows the rebuilt g0.
      for (auto& z : panel) z = proposal.g0.sample(monitor_rng);
    }
  }

  report.refit_log = state.refit_log;
  report.accepted_count = state.accepted_count;
  report.final_proposal = std::move(proposal);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace aimh

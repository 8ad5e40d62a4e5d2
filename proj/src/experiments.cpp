#include "aimh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

#include "aimh/arwm.hpp"
#include "aimh/data_io.hpp"
#include "aimh/diagnostics.hpp"
#include "aimh/json_io.hpp"
#include "aimh/targets.hpp"
#include "aimh/tvp_ar1.hpp"

namespace aimh {

namespace {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-format doubles keep repeated runs byte-identical.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Toy1d: return "toy1d";
    case ExperimentKind::Toy15d: return "toy15d";
    case ExperimentKind::Tvp: return "tvp";
    case ExperimentKind::Semiparam: return "semiparam";
  }
  return "?";
}

struct Prepared {
  std::unique_ptr<TargetModel> target;
  std::optional<ProposalState> proposal;
  Eigen::VectorXd mode;       // random-walk start and scale
  Eigen::MatrixXd mode_cov;
  std::optional<MixtureOfNormals> target_mixture;  // analytic marginals
  int grid_coord = -1;
  double grid_lo = 0.0, grid_hi = 0.0;
};

Eigen::MatrixXd mat1x1(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return m;
}

Prepared prepare(const ExperimentConfig& cfg) {
  Prepared prep;
  switch (cfg.experiment) {
    case ExperimentKind::Toy1d: {
      auto target = std::make_unique<MixtureTarget>(toy_mixture_1d());
      prep.target_mixture = target->mixture();
      Eigen::VectorXd start(1);
      start << -5.0;
      const MixtureOfNormals init(
          {GaussianComponent(1.0, start, mat1x1(4.0))});
      prep.proposal.emplace(init, init, cfg.omega1, cfg.omega2, cfg.fatten_k);
      const LaplaceResult la = laplace_approx(*target, start);
      prep.mode = la.mode;
      prep.mode_cov = la.neg_inv_hessian;
      prep.grid_coord = 0;
      prep.grid_lo = -10.0;
      prep.grid_hi = 10.0;
      prep.target = std::move(target);
      break;
    }
    case ExperimentKind::Toy15d: {
      auto target = std::make_unique<MixtureTarget>(toy_mixture_15d());
      prep.target_mixture = target->mixture();
      const LaplaceResult la =
          laplace_approx(*target, Eigen::VectorXd::Zero(15));
      prep.proposal = init_proposal_laplace(la.mode, la.neg_inv_hessian,
                                            cfg.omega1, cfg.omega2, cfg.fatten_k);
      prep.mode = la.mode;
      prep.mode_cov = la.neg_inv_hessian;
      prep.grid_coord = 14;
      prep.grid_lo = -12.0;
      prep.grid_hi = 8.0;
      prep.target = std::move(target);
      break;
    }
    case ExperimentKind::Tvp: {
      std::vector<double> y;
      if (cfg.data_path.empty()) {
        y = tvp_synthetic(150, 1.0, 0.01, 4e-4, 777).y;
      } else {
        try {
          const Eigen::VectorXd series = load_cpi(cfg.data_path);
          y.assign(series.data(), series.data() + series.size());
        } catch (const std::exception& e) {
          throw DataError(e.what());
        }
      }
      auto model = std::make_unique<TvpAr1Model>(std::move(y));
      Eigen::VectorXd start(3);
      start << std::log(model->priors().b_sigma2 / 2.0),
          std::log(model->priors().b_lambda0_sq / 2.0),
          std::log(model->priors().b_lambda1_sq / 2.0);
      const LaplaceResult la = laplace_approx(*model, start);
      prep.proposal = init_proposal_laplace(la.mode, la.neg_inv_hessian,
                                            cfg.omega1, cfg.omega2, cfg.fatten_k);
      prep.mode = la.mode;
      prep.mode_cov = la.neg_inv_hessian;
      prep.target = std::move(model);
      break;
    }
    case ExperimentKind::Semiparam: {
      SemiparamConfig scfg;
      scfg.tau_prior = cfg.semiparam_prior;
      std::unique_ptr<SemiparamModel> model;
      if (cfg.data_path.empty()) {
        // Seeded additive fixture: one linear covariate, two smooth effects.
        Rng gen(99);
        const int n = 120;
        Eigen::VectorXd y(n), w(n);
        std::vector<Eigen::VectorXd> flex{Eigen::VectorXd(n), Eigen::VectorXd(n)};
        for (int i = 0; i < n; ++i) {
          w[i] = gen.normal();
          flex[0][i] = 2.0 * gen.uniform() - 1.0;
          flex[1][i] = 2.0 * gen.uniform() - 1.0;
          y[i] = 1.0 + 0.4 * w[i] + std::sin(3.0 * flex[0][i]) +
                 flex[1][i] * flex[1][i] - 1.0 / 3.0 + 0.3 * gen.normal();
        }
        scfg.n_knots = 8;
        model = std::make_unique<SemiparamModel>(y, w, flex, scfg);
      } else {
        try {
          const BostonData data = load_boston(cfg.data_path);
          model = std::make_unique<SemiparamModel>(
              data.response, data.linear_covariates, data.flexible, scfg);
        } catch (const std::invalid_argument& e) {
          throw DataError(e.what());
        } catch (const std::runtime_error& e) {
          throw DataError(e.what());
        }
      }
      const Eigen::Index dim = model->dimension();
      Eigen::VectorXd start(dim);
      start[0] = std::log(model->ols_sigma2());
      for (Eigen::Index h = 1; h < dim; ++h) start[h] = std::log(0.01);
      const LaplaceResult la = laplace_approx(*model, start);
      prep.proposal = init_proposal_laplace(la.mode, la.neg_inv_hessian,
                                            cfg.omega1, cfg.omega2, cfg.fatten_k);
      prep.mode = la.mode;
      prep.mode_cov = la.neg_inv_hessian;
      prep.target = std::move(model);
      break;
    }
  }
  return prep;
}

// Per-parameter IACT over the post-burn-in draws; NaN where the series is
// too short or constant.
std::vector<double> iact_per_parameter(const RunReport& report, long burn_in) {
  const Eigen::Index d =
      report.draws.empty() ? 0 : report.draws.front().size();
  const long keep = report.n_iterations - burn_in;
  std::vector<double> out;
  for (Eigen::Index p = 0; p < d; ++p) {
    std::vector<double> series;
    series.reserve(keep);
    for (std::size_t i = report.draws.size() - keep; i < report.draws.size(); ++i)
      series.push_back(report.draws[i][p]);
    try {
      out.push_back(iact(series));
    } catch (const std::exception&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

std::vector<std::string> names_or_defaults(const RunReport& report) {
  if (!report.parameter_names.empty()) return report.parameter_names;
  const Eigen::Index d = report.draws.empty() ? 0 : report.draws.front().size();
  std::vector<std::string> names;
  for (Eigen::Index p = 0; p < d; ++p)
    names.push_back("theta_" + std::to_string(p));
  return names;
}

void write_acceptance_trace(std::ofstream& out, const std::string& sampler,
                            const RunReport& report) {
  const std::vector<double> window = acceptance_window(report.accepted, 500);
  for (std::size_t i = 0; i < report.alpha_trace.size(); ++i)
    out << sampler << ',' << (i + 1) << ',' << fmt(report.alpha_trace[i]) << ','
        << report.accepted[i] << ',' << fmt(window[i]) << '\n';
}

void write_monitor_rows(std::ofstream& out, const RunReport& report) {
  for (const auto& rec : report.refit_log)
    out << rec.iteration << ','
        << (rec.phase == Phase::Loose ? "loose" : "strict") << ','
        << (rec.triggered ? 1 : 0) << ',' << rec.component_count << ','
        << fmt(rec.bic) << ',' << fmt(rec.dominance_max) << ','
        << fmt(rec.diminishing_sup) << '\n';
}

}  // namespace

long ExperimentConfig::effective_iterations() const {
  if (iterations > 0) return iterations;
  switch (experiment) {
    case ExperimentKind::Toy1d: return 15000;
    case ExperimentKind::Toy15d: return 35000;
    case ExperimentKind::Tvp: return 20000;
    case ExperimentKind::Semiparam: return 20000;
  }
  return 15000;
}

long ExperimentConfig::effective_burn_in() const {
  return burn_in >= 0 ? burn_in : effective_iterations() / 5;
}

MonitorVerdict validate_monitors(const std::vector<RefitRecord>& refits) {
  if (refits.size() < 3)
    return {MonitorVerdict::Status::Indeterminate,
            "only " + std::to_string(refits.size()) + " refits recorded"};

  // Running maximum of the dominance ratios, judged on its last three values.
  std::vector<double> running;
  double so_far = 0.0;
  for (const auto& r : refits) {
    so_far = std::max(so_far, r.dominance_max);
    running.push_back(so_far);
  }
  const double tail_max = *std::max_element(running.end() - 3, running.end());
  const double tail_min = *std::min_element(running.end() - 3, running.end());
  const bool dominance_ok =
      !std::isfinite(tail_max)
          ? false
          : (tail_max == 0.0 || (tail_max - tail_min) <= 0.10 * tail_max);

  // Least-squares slope of the diminishing estimates across strict-phase
  // refits (all refits when the strict phase has fewer than two).
  std::vector<double> series;
  for (const auto& r : refits)
    if (r.phase == Phase::Strict) series.push_back(r.diminishing_sup);
  if (series.size() < 2) {
    series.clear();
    for (const auto& r : refits) series.push_back(r.diminishing_sup);
  }
  const double n = static_cast<double>(series.size());
  double mean_i = (n - 1.0) / 2.0, mean_y = 0.0;
  for (double y : series) mean_y += y;
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sxy += (i - mean_i) * (series[i] - mean_y);
    sxx += (i - mean_i) * (i - mean_i);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const bool diminishing_ok = slope <= 0.0;

  if (dominance_ok && diminishing_ok)
    return {MonitorVerdict::Status::Pass,
            "dominance running max " + fmt(running.back()) +
                ", diminishing slope " + fmt(slope)};
  std::string detail;
  if (!dominance_ok) {
    detail += "dominance running max not stable:";
    for (auto it = running.end() - 3; it != running.end(); ++it)
      detail += ' ' + fmt(*it);
  }
  if (!diminishing_ok) {
    if (!detail.empty()) detail += "; ";
    detail += "diminishing slope " + fmt(slope) + " > 0";
  }
  return {MonitorVerdict::Status::Warn, detail};
}

nlohmann::json run_report_to_json(const RunReport& report, long burn_in,
                                  std::size_t max_output_draws) {
  nlohmann::json doc;
  doc["n_iterations"] = report.n_iterations;
  doc["burn_in"] = burn_in;
  doc["accepted_count"] = report.accepted_count;
  doc["acceptance_rate"] =
      report.n_iterations > 0
          ? static_cast<double>(report.accepted_count) / report.n_iterations
          : 0.0;
  doc["phase_transition_iteration"] = report.phase_transition_iteration;
  doc["parameter_names"] = names_or_defaults(report);

  const long keep = report.n_iterations - burn_in;
  if (keep > 0 && !report.draws.empty()) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(report.draws.front().size());
    for (std::size_t i = report.draws.size() - keep; i < report.draws.size(); ++i)
      mean += report.draws[i];
    mean /= static_cast<double>(keep);
    doc["posterior_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  }

  doc["alpha_trace"] = report.alpha_trace;

  nlohmann::json refits = nlohmann::json::array();
  for (const auto& r : report.refit_log) {
    refits.push_back({{"iteration", r.iteration},
                      {"component_count", r.component_count},
                      {"bic", r.bic},
                      {"triggered", r.triggered},
                      {"phase", r.phase == Phase::Loose ? "loose" : "strict"},
                      {"dominance_max", r.dominance_max},
                      {"diminishing_sup", r.diminishing_sup}});
  }
  doc["refit_log"] = refits;

  const std::size_t stride =
      report.draws.size() <= max_output_draws
          ? 1
          : (report.draws.size() + max_output_draws - 1) / max_output_draws;
  nlohmann::json draws = nlohmann::json::array();
  for (std::size_t i = 0; i < report.draws.size(); i += stride)
    draws.push_back(std::vector<double>(
        report.draws[i].data(), report.draws[i].data() + report.draws[i].size()));
  doc["draws"] = draws;
  doc["draw_stride"] = stride;

  if (report.final_proposal) {
    doc["final_proposal"] = {
        {"q", mixture_to_json(report.final_proposal->q)},
        {"g0", mixture_to_json(report.final_proposal->g0)},
        {"gbar", mixture_to_json(report.final_proposal->gbar)}};
  }
  return doc;
}

int run_experiment(const ExperimentConfig& cfg, std::string* message) {
  const auto fail = [&](int code, const std::string& text) {
    if (message) *message = text;
    return code;
  };

  const long n = cfg.effective_iterations();
  const long burn = cfg.effective_burn_in();
  if (n < 1) return fail(kExitConfig, "iterations must be positive");
  if (burn < 0 || burn >= n)
    return fail(kExitConfig, "burn-in must satisfy 0 <= burn_in < iterations");
  if (!(cfg.omega1 > 0.0) || !(cfg.omega2 > 0.0) || !(cfg.omega1 + cfg.omega2 < 1.0))
    return fail(kExitConfig, "omega1, omega2 must be positive with sum below 1");
  if (!(cfg.fatten_k > 1.0)) return fail(kExitConfig, "fatten-k must exceed 1");
  try {
    cfg.schedule.validate();
  } catch (const std::invalid_argument& e) {
    return fail(kExitConfig, e.what());
  }

  Prepared prep;
  try {
    prep = prepare(cfg);
  } catch (const DataError& e) {
    return fail(kExitData, e.what());
  } catch (const std::exception& e) {
    return fail(kExitNumeric, e.what());
  }

  const bool run_aimh = cfg.sampler != SamplerKind::Arwm;
  const bool run_rwm = cfg.sampler != SamplerKind::Aimh;
  std::function<double(long)> beta_fn;
  if (cfg.beta_policy == BetaPolicy::Decay)
    beta_fn = [](long k) { return 1.0 - 1.0 / std::sqrt(k + 1.0); };

  RunReport aimh_report, arwm_report;
  std::exception_ptr aimh_error, arwm_error;
  {
    std::vector<std::thread> workers;
    if (run_aimh)
      workers.emplace_back([&] {
        try {
          Rng rng(cfg.seed);
          KhmConfig khm_cfg;
          aimh_report = run_chain(*prep.target, *prep.proposal, n, cfg.schedule,
                                  khm_cfg, rng, beta_fn);
        } catch (...) {
          aimh_error = std::current_exception();
        }
      });
    if (run_rwm)
      workers.emplace_back([&] {
        try {
          Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
          arwm_report = run_arwm(*prep.target, prep.mode, prep.mode_cov, n, rng);
        } catch (...) {
          arwm_error = std::current_exception();
        }
      });
    for (auto& w : workers) w.join();
  }
  try {
    if (aimh_error) std::rethrow_exception(aimh_error);
    if (arwm_error) std::rethrow_exception(arwm_error);
  } catch (const std::exception& e) {
    return fail(kExitNumeric, e.what());
  }

  namespace fs = std::filesystem;
  try {
    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);

    const auto finish_report = [&](const RunReport& report, const char* name,
                                   bool with_monitors) {
      nlohmann::json doc = run_report_to_json(report, burn);
      doc["experiment"] = experiment_name(cfg.experiment);
      doc["sampler"] = name;
      doc["seed"] = cfg.seed;
      if (with_monitors) {
        const MonitorVerdict verdict = validate_monitors(report.refit_log);
        doc["monitor_verdict"] = {
            {"status", verdict.status == MonitorVerdict::Status::Pass ? "pass"
                       : verdict.status == MonitorVerdict::Status::Warn
                           ? "warn"
                           : "indeterminate"},
            {"detail", verdict.detail}};
      }
      std::ofstream file(out / (std::string("run_report_") + name + ".json"));
      file << doc.dump(2) << '\n';
    };
    if (run_aimh) finish_report(aimh_report, "aimh", true);
    if (run_rwm) finish_report(arwm_report, "arwm", false);

    {
      std::ofstream eff(out / "efficiency.csv");
      const std::vector<std::string> names =
          names_or_defaults(run_aimh ? aimh_report : arwm_report);
      const std::vector<double> iact_a =
          run_aimh ? iact_per_parameter(aimh_report, burn) : std::vector<double>();
      const std::vector<double> iact_r =
          run_rwm ? iact_per_parameter(arwm_report, burn) : std::vector<double>();
      eff << "parameter";
      if (run_aimh) eff << ",iact_aimh";
      if (run_rwm) eff << ",iact_arwm";
      if (run_aimh && run_rwm) eff << ",relative_inefficiency";
      eff << '\n';
      for (std::size_t p = 0; p < names.size(); ++p) {
        eff << names[p];
        if (run_aimh) eff << ',' << fmt(iact_a[p]);
        if (run_rwm) eff << ',' << fmt(iact_r[p]);
        if (run_aimh && run_rwm) eff << ',' << fmt(iact_r[p] / iact_a[p]);
        eff << '\n';
      }
    }

    {
      std::ofstream trace(out / "acceptance_trace.csv");
      trace << "sampler,iteration,alpha,accepted,window_rate\n";
      if (run_aimh) write_acceptance_trace(trace, "aimh", aimh_report);
      if (run_rwm) write_acceptance_trace(trace, "arwm", arwm_report);
    }

    {
      std::ofstream mon(out / "monitors.csv");
      mon << "refit_iteration,phase,triggered,component_count,bic,dominance_max,"
             "diminishing_sup\n";
      if (run_aimh) write_monitor_rows(mon, aimh_report);
    }

    if (prep.grid_coord >= 0) {
      const int grid_n = 400;
      std::vector<double> zs(grid_n), target_density(grid_n);
      for (int i = 0; i < grid_n; ++i)
        zs[i] = prep.grid_lo +
                (prep.grid_hi - prep.grid_lo) * i / static_cast<double>(grid_n - 1);
      if (prep.target->dimension() == 1) {
        // Normalize the unnormalized density by quadrature over the grid.
        std::vector<double> raw(grid_n);
        Eigen::VectorXd z(1);
        for (int i = 0; i < grid_n; ++i) {
          z[0] = zs[i];
          raw[i] = std::exp(prep.target->log_unnormalized_density(z));
        }
        double integral = 0.0;
        for (int i = 1; i < grid_n; ++i)
          integral += 0.5 * (raw[i] + raw[i - 1]) * (zs[i] - zs[i - 1]);
        for (int i = 0; i < grid_n; ++i) target_density[i] = raw[i] / integral;
      } else {
        const MixtureOfNormals marg = prep.target_mixture->marginal(prep.grid_coord);
        Eigen::VectorXd z(1);
        for (int i = 0; i < grid_n; ++i) {
          z[0] = zs[i];
          target_density[i] = marg.density(z);
        }
      }
      std::ofstream grid(out / "density_grid.csv");
      grid << "z,target_density";
      const bool with_proposal = run_aimh && aimh_report.final_proposal.has_value();
      if (with_proposal) grid << ",proposal_density";
      grid << '\n';
      std::optional<MixtureOfNormals> prop_marg;
      if (with_proposal)
        prop_marg = aimh_report.final_proposal->q.marginal(prep.grid_coord);
      Eigen::VectorXd z(1);
      for (int i = 0; i < grid_n; ++i) {
        grid << fmt(zs[i]) << ',' << fmt(target_density[i]);
        if (with_proposal) {
          z[0] = zs[i];
          grid << ',' << fmt(prop_marg->density(z));
        }
        grid << '\n';
      }
    }
  } catch (const std::exception& e) {
    return fail(kExitData, std::string("output write failed: ") + e.what());
  }

  if (message) *message = "ok";
  return kExitOk;
}

}  // namespace aimh

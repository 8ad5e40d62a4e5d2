#include "aimh/khm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "aimh/stats.hpp"

namespace aimh {

namespace {

// Default exponent equals the cluster count, floored at 2: the floor keeps
// the weight function from inverting for a lone center (exponent 2 makes
// w identically 1, so moments reduce to plain sample moments).
double effective_exponent(const KhmConfig& cfg, std::size_t n_centers) {
  if (cfg.fixed_exponent > 0.0) return cfg.fixed_exponent;
  return std::max(2.0, static_cast<double>(n_centers));
}

void validate(const KhmConfig& cfg) {
  if (cfg.max_components < 1 || cfg.distance_floor <= 0.0 ||
      cfg.center_move_tolerance <= 0.0 || cfg.max_iterations < 1)
    throw std::invalid_argument("invalid clustering configuration");
}

// W such that the configured distance is ||W(x - c)||.
Eigen::MatrixXd metric_whitener(const std::vector<Eigen::VectorXd>& data,
                                const KhmConfig& cfg) {
  const Eigen::Index d = data.front().size();
  if (cfg.distance_metric == DistanceMetric::Euclidean) {
    Eigen::MatrixXd cov = sample_covariance(data);
    Eigen::VectorXd inv_sd(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double sd = std::sqrt(std::max(cov(i, i), 0.0));
      inv_sd[i] = sd > 0.0 ? 1.0 / sd : 1.0;
    }
    return inv_sd.asDiagonal();
  }
  Eigen::MatrixXd cov = sample_covariance(data);
  double jitter = 1e-12 * std::max(cov.trace(), 1.0);
  for (int tries = 0; tries < 60; ++tries) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      return l.triangularView<Eigen::Lower>()
          .solve(Eigen::MatrixXd::Identity(d, d));
    }
    cov += jitter * Eigen::MatrixXd::Identity(d, d);
    jitter *= 10.0;
  }
  return Eigen::MatrixXd::Identity(d, d);
}

std::vector<Eigen::VectorXd> apply_whitener(const Eigen::MatrixXd& w,
                                            const std::vector<Eigen::VectorXd>& xs) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(w * x);
  return out;
}

// Distinct-value start points; duplicates only when the data lacks variety.
// base^k by squaring, k >= 0.
double powi(double base, int k) {
  double out = 1.0;
  while (k > 0) {
    if (k & 1) out *= base;
    base *= base;
    k >>= 1;
  }
  return out;
}

// Exponents are small integers in every default configuration, so the hot
// loops take a multiplication path and fall back to std::pow only for
// fractional user-supplied exponents.
bool small_integer(double e, int* k) {
  const double fl = std::floor(e);
  if (fl == e && e >= 0.0 && e <= 64.0) {
    *k = static_cast<int>(e);
    return true;
  }
  return false;
}

double pow_inv(double r, double e) {  // r^(-e)
  int k = 0;
  return small_integer(e, &k) ? powi(1.0 / r, k) : std::pow(r, -e);
}

double pow_plain(double x, double e) {  // x^e
  int k = 0;
  return small_integer(e, &k) ? powi(x, k) : std::pow(x, e);
}

// Per-point products m(c_i | x) w(x) for every center, written into mw.
// Same algebra as khm_scores with the 1/sum_m normalizer cancelled against
// the weight's sum_m factor.
void khm_mw_row(const Eigen::VectorXd& wpoint,
                const std::vector<Eigen::VectorXd>& wcenters, double exponent,
                double floor_eps, double* mw) {
  const std::size_t p = wcenters.size();
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    const double d = std::max((wpoint - wcenters[i]).norm(), floor_eps);
    mw[i] = d;
    dmin = std::min(dmin, d);
  }
  double sum_p = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double r = mw[i] / dmin;
    const double inv_r = dmin / mw[i];
    const double pterm = pow_inv(r, exponent);
    sum_p += pterm;
    mw[i] = pterm * inv_r * inv_r;  // r^(-exponent - 2)
  }
  const double scale = pow_plain(dmin, exponent - 2.0) / (sum_p * sum_p);
  for (std::size_t i = 0; i < p; ++i) mw[i] *= scale;
}

// One center update on pre-whitened data; centers move in original
// coordinates while distances live in the whitened metric.
std::vector<Eigen::VectorXd> iterate_whitened(
    const std::vector<Eigen::VectorXd>& data,
    const std::vector<Eigen::VectorXd>& wdata,
    const std::vector<Eigen::VectorXd>& centers,
    const std::vector<Eigen::VectorXd>& wcenters, double exponent,
    double floor_eps, int* stuck) {
  const std::size_t p = centers.size();
  const Eigen::Index d = data.front().size();
  std::vector<Eigen::VectorXd> num(p, Eigen::VectorXd::Zero(d));
  std::vector<double> den(p, 0.0);
  std::vector<double> mw(p);
  for (std::size_t t = 0; t < data.size(); ++t) {
    khm_mw_row(wdata[t], wcenters, exponent, floor_eps, mw.data());
    for (std::size_t i = 0; i < p; ++i) {
      num[i] += mw[i] * data[t];
      den[i] += mw[i];
    }
  }
  std::vector<Eigen::VectorXd> out(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (den[i] > 0.0) {
      out[i] = num[i] / den[i];
    } else {
      out[i] = centers[i];
      if (stuck != nullptr) ++*stuck;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> forgy_init(const std::vector<Eigen::VectorXd>& data, int p,
                                        Rng& rng) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(static_cast<std::size_t>(p));
  for (std::size_t i : idx) {
    if (static_cast<int>(centers.size()) == p) break;
    bool seen = false;
    for (const auto& c : centers)
      if ((c - data[i]).norm() == 0.0) {
        seen = true;
        break;
      }
    if (!seen) centers.push_back(data[i]);
  }
  std::size_t fill = 0;
  while (static_cast<int>(centers.size()) < p)
    centers.push_back(data[idx[fill++ % idx.size()]]);
  return centers;
}

}  // namespace

KhmScores khm_scores(const Eigen::VectorXd& point,
                     const std::vector<Eigen::VectorXd>& centers, double exponent,
                     double floor_eps) {
  if (centers.empty()) throw std::invalid_argument("khm_scores needs centers");
  if (!(exponent > 0.0) || !(floor_eps > 0.0))
    throw std::invalid_argument("khm_scores needs positive exponent and floor");
  const std::size_t p = centers.size();
  Eigen::VectorXd dist(static_cast<Eigen::Index>(p));
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    const double d = std::max((point - centers[i]).norm(), floor_eps);
    dist[static_cast<Eigen::Index>(i)] = d;
    dmin = std::min(dmin, d);
  }
  // Ratios r = d/dmin >= 1 keep the powers bounded regardless of scale.
  double sum_m = 0.0, sum_p = 0.0;
  Eigen::VectorXd mterm(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    const double r = dist[i] / dmin;
    mterm[i] = std::pow(r, -exponent - 2.0);
    sum_m += mterm[i];
    sum_p += std::pow(r, -exponent);
  }
  KhmScores out;
  out.weight = std::pow(dmin, exponent - 2.0) * sum_m / (sum_p * sum_p);
  out.memberships = mterm / sum_m;
  return out;
}

std::vector<Eigen::VectorXd> khm_iterate(const std::vector<Eigen::VectorXd>& data,
                                         const std::vector<Eigen::VectorXd>& centers,
                                         const KhmConfig& cfg, int* stuck) {
  if (data.empty()) throw std::invalid_argument("khm_iterate needs data");
  if (centers.empty()) throw std::invalid_argument("khm_iterate needs centers");
  validate(cfg);
  const double exponent = effective_exponent(cfg, centers.size());
  const Eigen::MatrixXd w = metric_whitener(data, cfg);
  return iterate_whitened(data, apply_whitener(w, data), centers,
                          apply_whitener(w, centers), exponent,
                          cfg.distance_floor, stuck);
}

KhmRun khm_run(const std::vector<Eigen::VectorXd>& data,
               std::vector<Eigen::VectorXd> centers, const KhmConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("khm_run needs data");
  if (centers.empty()) throw std::invalid_argument("khm_run needs centers");
  validate(cfg);
  // The whitener depends only on the data, so one factorization serves every
  // iteration; only the moving centers are re-whitened.
  const double exponent = effective_exponent(cfg, centers.size());
  const Eigen::MatrixXd w = metric_whitener(data, cfg);
  const std::vector<Eigen::VectorXd> wdata = apply_whitener(w, data);
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    std::vector<Eigen::VectorXd> next =
        iterate_whitened(data, wdata, centers, apply_whitener(w, centers),
                         exponent, cfg.distance_floor, nullptr);
    double move = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
      move = std::max(move, (next[i] - centers[i]).norm());
    centers = std::move(next);
    if (move < cfg.center_move_tolerance) {
      ++it;
      break;
    }
  }
  return {std::move(centers), it};
}

double khm_objective(const std::vector<Eigen::VectorXd>& data,
                     const std::vector<Eigen::VectorXd>& centers, const KhmConfig& cfg) {
  const std::size_t p = centers.size();
  const double exponent = effective_exponent(cfg, p);
  const Eigen::MatrixXd w = metric_whitener(data, cfg);
  const std::vector<Eigen::VectorXd> wdata = apply_whitener(w, data);
  const std::vector<Eigen::VectorXd> wcenters = apply_whitener(w, centers);
  double total = 0.0;
  for (const auto& x : wdata) {
    double dmin = std::numeric_limits<double>::infinity();
    std::vector<double> dist(p);
    for (std::size_t i = 0; i < p; ++i) {
      dist[i] = std::max((x - wcenters[i]).norm(), cfg.distance_floor);
      dmin = std::min(dmin, dist[i]);
    }
    double inv = 0.0;
    for (double di : dist) inv += pow_inv(di / dmin, exponent);
    total += static_cast<double>(p) * pow_plain(dmin, exponent) / inv;
  }
  return total;
}

std::vector<Eigen::VectorXd> bradley_fayyad_init(const std::vector<Eigen::VectorXd>& data,
                                                 int p, const KhmConfig& cfg, Rng& rng) {
  validate(cfg);
  if (p < 1) throw std::invalid_argument("bradley_fayyad_init needs p >= 1");
  const std::size_t n = data.size();
  if (n < static_cast<std::size_t>(p))
    throw std::invalid_argument("bradley_fayyad_init needs at least p points");
  constexpr int kSubsamples = 10;
  const std::size_t sub_size =
      std::max(static_cast<std::size_t>(p), (n + 9) / 10);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::vector<Eigen::VectorXd>> candidates;
  candidates.reserve(kSubsamples);
  for (int j = 0; j < kSubsamples; ++j) {
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    std::vector<Eigen::VectorXd> sub;
    sub.reserve(sub_size);
    for (std::size_t i = 0; i < sub_size && i < n; ++i) sub.push_back(data[idx[i]]);
    candidates.push_back(khm_run(sub, forgy_init(sub, p, rng), cfg).centers);
  }

  std::vector<Eigen::VectorXd> pool;
  pool.reserve(candidates.size() * static_cast<std::size_t>(p));
  for (const auto& cand : candidates)
    pool.insert(pool.end(), cand.begin(), cand.end());

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> best;
  for (const auto& cand : candidates) {
    std::vector<Eigen::VectorXd> refined = khm_run(pool, cand, cfg).centers;
    const double obj = khm_objective(pool, refined, cfg);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(refined);
    }
  }
  return best;
}

bool is_degenerate_covariance(const Eigen::MatrixXd& covariance) {
  Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose().eval());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() < 1e-10 * sym.trace();
}

Eigen::MatrixXd repair_degenerate(const Eigen::MatrixXd& covariance,
                                  const std::vector<Eigen::VectorXd>& data,
                                  double floor_eps) {
  (void)covariance;  // only its degeneracy triggered the call
  Eigen::MatrixXd out = 0.25 * sample_covariance(data);
  out = 0.5 * (out + out.transpose().eval());
  double bump = floor_eps;
  while (is_degenerate_covariance(out)) {
    out += bump * Eigen::MatrixXd::Identity(out.rows(), out.cols());
    bump *= 10.0;
  }
  return out;
}

MixtureOfNormals estimate_mixture_params(const std::vector<Eigen::VectorXd>& data,
                                         const std::vector<Eigen::VectorXd>& centers,
                                         const KhmConfig& cfg, int* repairs) {
  if (data.empty()) throw std::invalid_argument("estimate_mixture_params needs data");
  if (centers.empty())
    throw std::invalid_argument("estimate_mixture_params needs centers");
  validate(cfg);
  const std::size_t p = centers.size();
  const Eigen::Index d = data.front().size();
  const double exponent = effective_exponent(cfg, p);
  const Eigen::MatrixXd w = metric_whitener(data, cfg);
  const std::vector<Eigen::VectorXd> wdata = apply_whitener(w, data);
  const std::vector<Eigen::VectorXd> wcenters = apply_whitener(w, centers);

  std::vector<double> mass(p, 0.0);
  std::vector<Eigen::MatrixXd> scatter(p, Eigen::MatrixXd::Zero(d, d));
  std::vector<double> mw(p);
  Eigen::VectorXd diff(d);
  for (std::size_t t = 0; t < data.size(); ++t) {
    khm_mw_row(wdata[t], wcenters, exponent, cfg.distance_floor, mw.data());
    for (std::size_t i = 0; i < p; ++i) {
      diff = data[t] - centers[i];
      scatter[i].noalias() += mw[i] * (diff * diff.transpose());
      mass[i] += mw[i];
    }
  }
  std::vector<GaussianComponent> comps;
  comps.reserve(p);
  double kept_mass = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    if (mass[i] > 0.0 && std::isfinite(mass[i])) kept_mass += mass[i];
  for (std::size_t i = 0; i < p; ++i) {
    if (!(mass[i] > 0.0) || !std::isfinite(mass[i])) continue;  // dead center
    Eigen::MatrixXd v = scatter[i] / mass[i];
    if (is_degenerate_covariance(v)) {
      v = repair_degenerate(v, data, cfg.distance_floor);
      if (repairs != nullptr) ++*repairs;
    }
    comps.emplace_back(mass[i] / kept_mass, centers[i], std::move(v));
  }
  if (comps.empty())
    throw std::runtime_error("estimate_mixture_params: no component kept any mass");
  return MixtureOfNormals(std::move(comps));
}

namespace {

MixtureOfNormals em_refine_steps(const std::vector<Eigen::VectorXd>& data,
                                 MixtureOfNormals mix, int steps) {
  for (int s = 0; s < steps; ++s) {
    const std::size_t p = mix.size();
    std::vector<double> mass(p, 0.0);
    std::vector<Eigen::VectorXd> num(p, Eigen::VectorXd::Zero(mix.dimension()));
    for (const auto& x : data) {
      const Eigen::VectorXd r = mix.responsibilities(x);
      for (std::size_t i = 0; i < p; ++i) {
        mass[i] += r[static_cast<Eigen::Index>(i)];
        num[i] += r[static_cast<Eigen::Index>(i)] * x;
      }
    }
    std::vector<GaussianComponent> comps;
    comps.reserve(p);
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      if (!(mass[i] > 0.0)) {
        comps.push_back(mix.components()[i]);
        continue;
      }
      comps.emplace_back(mass[i] / total, num[i] / mass[i],
                         mix.components()[i].covariance());
    }
    mix = MixtureOfNormals(std::move(comps));
  }
  return mix;
}

ClusterFit single_normal_fit(const std::vector<Eigen::VectorXd>& data,
                             const KhmConfig& cfg) {
  const Eigen::Index d = data.front().size();
  const double n = static_cast<double>(data.size());
  const Eigen::VectorXd mean = sample_mean(data);
  Eigen::MatrixXd cov = sample_covariance(data);
  int repairs = 0;
  if (is_degenerate_covariance(cov)) {
    cov = repair_degenerate(cov, data, cfg.distance_floor);
    repairs = 1;
  }
  MixtureOfNormals mix({GaussianComponent(1.0, mean, cov)});
  double loglik = 0.0;
  for (const auto& x : data) loglik += mix.log_density(x);
  const double n_params =
      static_cast<double>(d) + static_cast<double>(d) * (d + 1) / 2.0;
  const double bic = -2.0 * loglik + n_params * std::log(n);
  return {{mean}, std::move(mix), bic, 0, repairs};
}

}  // namespace

ClusterFit fit_with_bic(const std::vector<Eigen::VectorXd>& data, const KhmConfig& cfg,
                        Rng& rng) {
  if (data.empty()) throw std::invalid_argument("fit_with_bic needs data");
  validate(cfg);
  const Eigen::Index d = data.front().size();
  const std::size_t n = data.size();
  if (n < 2 * static_cast<std::size_t>(d)) return single_normal_fit(data, cfg);

  std::optional<ClusterFit> best;
  const int p_max = std::min<int>(cfg.max_components, static_cast<int>(n));
  for (int p = 1; p <= p_max; ++p) {
    std::vector<Eigen::VectorXd> init = bradley_fayyad_init(data, p, cfg, rng);
    KhmRun run = khm_run(data, std::move(init), cfg);
    int repairs = 0;
    MixtureOfNormals mix = estimate_mixture_params(data, run.centers, cfg, &repairs);
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(mix.size());
    for (const auto& c : mix.components()) centers.push_back(c.mean());
    if (cfg.em_refine) mix = em_refine_steps(data, std::move(mix), 3);
    double loglik = 0.0;
    for (const auto& x : data) loglik += mix.log_density(x);
    const double dd = static_cast<double>(d);
    const double n_params = (p - 1) + p * dd + p * dd * (dd + 1) / 2.0;
    const double bic = -2.0 * loglik + n_params * std::log(static_cast<double>(n));
    if (!best || bic < best->bic)
      best = ClusterFit{std::move(centers), std::move(mix), bic, run.iterations, repairs};
  }
  return *best;
}

}  // namespace aimh

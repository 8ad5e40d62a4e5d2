#include "aimh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aimh {

namespace {

double autocorrelation(const std::vector<double>& x, double mean, double var0,
                       std::size_t k) {
  double acc = 0.0;
  for (std::size_t t = 0; t + k < x.size(); ++t)
    acc += (x[t] - mean) * (x[t + k] - mean);
  return acc / var0;
}

}  // namespace

double iact(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 100) throw std::invalid_argument("iact needs at least 100 points");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double var0 = 0.0;
  for (double v : series) var0 += (v - mean) * (v - mean);
  if (var0 <= 0.0)
    throw std::invalid_argument("iact is undefined for a constant series");

  // Sum adjacent-lag pairs (0,1), (2,3), ... while they stay positive; the
  // pair sums of a genuine Markov chain are positive, so the first
  // non-positive one marks noise.
  double pair_total = 0.0;
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const double rho_even = k == 0 ? 1.0 : autocorrelation(series, mean, var0, k);
    const double rho_odd = autocorrelation(series, mean, var0, k + 1);
    const double pair = rho_even + rho_odd;
    if (pair <= 0.0) break;
    pair_total += pair;
  }
  return std::max(2.0 * pair_total - 1.0, 1e-3);
}

RelativeInefficiency relative_inefficiency(const EfficiencyReport& b,
                                           const EfficiencyReport& a) {
  if (a.iact.size() != b.iact.size() || a.iact.empty())
    throw std::invalid_argument("relative_inefficiency needs matching parameter sets");
  if (a.runtime_per_iteration <= 0.0 || b.runtime_per_iteration <= 0.0)
    throw std::invalid_argument("relative_inefficiency needs positive runtimes");
  RelativeInefficiency out;
  out.per_parameter.reserve(a.iact.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.iact.size(); ++i) {
    const double r = (b.iact[i] * b.runtime_per_iteration) /
                     (a.iact[i] * a.runtime_per_iteration);
    out.per_parameter.push_back(r);
    acc += r;
  }
  out.average = acc / static_cast<double>(a.iact.size());
  return out;
}

std::vector<double> acceptance_window(const std::vector<int>& accepts, int width) {
  if (width < 1) throw std::invalid_argument("acceptance_window needs width >= 1");
  std::vector<double> out(accepts.size());
  double running = 0.0;
  for (std::size_t i = 0; i < accepts.size(); ++i) {
    running += accepts[i];
    if (i >= static_cast<std::size_t>(width)) running -= accepts[i - width];
    const double w = std::min<std::size_t>(i + 1, static_cast<std::size_t>(width));
    out[i] = running / w;
  }
  return out;
}

DominanceSummary dominance_monitor(const MixtureOfNormals& gbar,
                                   const MixtureOfNormals& g0,
                                   const std::vector<Eigen::VectorXd>& points) {
  if (gbar.dimension() != g0.dimension())
    throw std::invalid_argument("dominance_monitor dimension mismatch");
  if (points.empty()) throw std::invalid_argument("dominance_monitor needs points");
  std::vector<double> ratios(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    ratios[i] = std::exp(gbar.log_density(points[i]) - g0.log_density(points[i]));
  DominanceSummary out;
  out.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  std::sort(ratios.begin(), ratios.end());
  out.deciles.reserve(9);
  for (int q = 1; q <= 9; ++q) {
    const double pos = 0.1 * q * (ratios.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    const double hi_val = lo + 1 < ratios.size() ? ratios[lo + 1] : ratios[lo];
    out.deciles.push_back(ratios[lo] * (1.0 - frac) + hi_val * frac);
  }
  return out;
}

DominanceSummary dominance_monitor(const MixtureOfNormals& gbar,
                                   const MixtureOfNormals& g0, int n_points, Rng& rng) {
  if (n_points < 1) throw std::invalid_argument("dominance_monitor needs points");
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(n_points));
  for (auto& z : points) z = g0.sample(rng);
  return dominance_monitor(gbar, g0, points);
}

double diminishing_monitor(const MixtureOfNormals& gbar_prev,
                           const MixtureOfNormals& gbar_next,
                           const MixtureOfNormals& g0,
                           const std::vector<Eigen::VectorXd>& points) {
  if (gbar_prev.dimension() != g0.dimension() || gbar_next.dimension() != g0.dimension())
    throw std::invalid_argument("diminishing_monitor dimension mismatch");
  if (points.empty()) throw std::invalid_argument("diminishing_monitor needs points");
  double sup = 0.0;
  for (const auto& z : points) {
    const double base = g0.density(z);
    const double diff = std::abs(gbar_prev.density(z) - gbar_next.density(z));
    sup = std::max(sup, diff / base);
  }
  return sup;
}

double diminishing_monitor(const MixtureOfNormals& gbar_prev,
                           const MixtureOfNormals& gbar_next,
                           const MixtureOfNormals& g0, int n_points, Rng& rng) {
  if (n_points < 1) throw std::invalid_argument("diminishing_monitor needs points");
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(n_points));
  for (auto& z : points) z = g0.sample(rng);
  return diminishing_monitor(gbar_prev, gbar_next, g0, points);
}

}  // namespace aimh

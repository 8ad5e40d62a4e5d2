#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aimh/sampler.hpp"
#include "aimh/semiparam.hpp"
#include "json.hpp"

namespace aimh {

enum class ExperimentKind { Toy1d, Toy15d, Tvp, Semiparam };
enum class SamplerKind { Aimh, Arwm, Both };
// Zero keeps beta_n = 0 (fresh fit replaces the old one); Decay blends with
// beta_k = 1 - (k+1)^{-1/2} so later refits move the proposal less and less.
enum class BetaPolicy { Zero, Decay };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Toy1d;
  SamplerKind sampler = SamplerKind::Aimh;
  long iterations = 0;  // 0: per-experiment default
  long burn_in = -1;    // -1: iterations / 5
  std::uint64_t seed = 42;
  double omega1 = 0.05;
  double omega2 = 0.15;
  double fatten_k = 16.0;
  BetaPolicy beta_policy = BetaPolicy::Zero;
  AdaptationSchedule schedule;
  std::string data_path;  // empty: seeded synthetic fallback
  std::string out_dir = "out";
  TauPrior semiparam_prior = TauPrior::LogNormal;

  long effective_iterations() const;
  long effective_burn_in() const;
};

// Exit codes shared with the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Runs the configured experiment and writes run_report_<sampler>.json,
// efficiency.csv, acceptance_trace.csv, monitors.csv and (for the toy
// targets) density_grid.csv into out_dir.  Returns an exit code; error text
// goes to the message pointer when given.
int run_experiment(const ExperimentConfig& cfg, std::string* message = nullptr);

struct MonitorVerdict {
  enum class Status { Pass, Warn, Indeterminate } status;
  std::string detail;
};

// PASS when the running maximum of the dominance ratios has stabilized (last
// three values within 10%) and the diminishing estimates trend non-positive
// over the strict-phase refits; WARN otherwise; fewer than 3 refits cannot be
// judged.
MonitorVerdict validate_monitors(const std::vector<RefitRecord>& refits);

// JSON form of a finished run: summary scalars, alpha trace, refit log,
// thinned draws with their stride, and the final proposal when present.
nlohmann::json run_report_to_json(const RunReport& report, long burn_in,
                                  std::size_t max_output_draws = 2000);

}  // namespace aimh

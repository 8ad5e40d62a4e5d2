#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "aimh/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aimh/sampler.hpp"
#include "doctest.h"

using aimh::ExperimentConfig;
using aimh::ExperimentKind;
using aimh::MonitorVerdict;
using aimh::Phase;
using aimh::RefitRecord;
using aimh::SamplerKind;

namespace {

namespace fs = std::filesystem;

std::string out_dir(const std::string& stem) {
  return (fs::temp_directory_path() / stem).string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig short_toy1d(const std::string& dir) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::Toy1d;
  cfg.iterations = 1500;
  cfg.burn_in = 300;
  cfg.seed = 11;
  cfg.out_dir = dir;
  return cfg;
}

RefitRecord record(long iteration, double dominance, double diminishing,
                   Phase phase) {
  RefitRecord r{iteration, 1, 0.0, false, phase, dominance, diminishing};
  return r;
}

}  // namespace

TEST_CASE("a toy run writes all five artifact files") {
  const std::string dir = out_dir("aimh_exp_files");
  fs::remove_all(dir);
  ExperimentConfig cfg = short_toy1d(dir);
  std::string message;
  REQUIRE(aimh::run_experiment(cfg, &message) == aimh::kExitOk);

  for (const char* name :
       {"run_report_aimh.json", "efficiency.csv", "acceptance_trace.csv",
        "monitors.csv", "density_grid.csv"})
    CHECK(fs::exists(fs::path(dir) / name));

  // One trace row per iteration plus the header.
  std::ifstream trace(fs::path(dir) / "acceptance_trace.csv");
  std::string line;
  long rows = -1;
  while (std::getline(trace, line))
    if (!line.empty()) ++rows;
  CHECK(rows == cfg.iterations);
}

TEST_CASE("running the same configuration twice is byte identical") {
  const std::string dir_a = out_dir("aimh_exp_rep_a");
  const std::string dir_b = out_dir("aimh_exp_rep_b");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  ExperimentConfig cfg = short_toy1d(dir_a);
  cfg.sampler = SamplerKind::Both;
  REQUIRE(aimh::run_experiment(cfg) == aimh::kExitOk);
  cfg.out_dir = dir_b;
  REQUIRE(aimh::run_experiment(cfg) == aimh::kExitOk);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const fs::path other = fs::path(dir_b) / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared == 6);  // two run reports, four csv files
}

TEST_CASE("a dual sampler run reports relative inefficiency") {
  const std::string dir = out_dir("aimh_exp_both");
  fs::remove_all(dir);
  ExperimentConfig cfg = short_toy1d(dir);
  cfg.sampler = SamplerKind::Both;
  REQUIRE(aimh::run_experiment(cfg) == aimh::kExitOk);

  std::ifstream eff(fs::path(dir) / "efficiency.csv");
  std::string header;
  std::getline(eff, header);
  CHECK(header.find("relative_inefficiency") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "run_report_arwm.json"));
}

TEST_CASE("bad configurations are rejected with the config exit code") {
  ExperimentConfig cfg = short_toy1d(out_dir("aimh_exp_bad"));
  cfg.burn_in = cfg.iterations;
  std::string message;
  CHECK(aimh::run_experiment(cfg, &message) == aimh::kExitConfig);
  CHECK_FALSE(message.empty());

  cfg = short_toy1d(out_dir("aimh_exp_bad"));
  cfg.omega1 = 0.9;
  cfg.omega2 = 0.2;
  CHECK(aimh::run_experiment(cfg) == aimh::kExitConfig);

  cfg = short_toy1d(out_dir("aimh_exp_bad"));
  cfg.schedule.trigger_level = 1.5;
  CHECK(aimh::run_experiment(cfg) == aimh::kExitConfig);
}

TEST_CASE("a missing data file is a data error") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::Tvp;
  cfg.iterations = 500;
  cfg.burn_in = 100;
  cfg.data_path = out_dir("aimh_exp_absent.csv");
  cfg.out_dir = out_dir("aimh_exp_data_err");
  std::string message;
  CHECK(aimh::run_experiment(cfg, &message) == aimh::kExitData);
  CHECK(message.find("cannot open") != std::string::npos);
}

TEST_CASE("monitor validation needs at least three refits") {
  std::vector<RefitRecord> refits{record(100, 5.0, 1.0, Phase::Loose),
                                  record(200, 5.0, 0.5, Phase::Loose)};
  const MonitorVerdict verdict = aimh::validate_monitors(refits);
  CHECK(verdict.status == MonitorVerdict::Status::Indeterminate);
}

TEST_CASE("a proposal frozen after the second refit passes both monitors") {
  // Differences hit zero once the proposal stops moving and the dominance
  // ratio stays put.
  std::vector<RefitRecord> refits{
      record(100, 5.0, 2.0, Phase::Loose), record(200, 5.2, 1.0, Phase::Strict),
      record(300, 5.2, 0.0, Phase::Strict), record(400, 5.2, 0.0, Phase::Strict)};
  const MonitorVerdict verdict = aimh::validate_monitors(refits);
  CHECK(verdict.status == MonitorVerdict::Status::Pass);
}

TEST_CASE("a growing dominance ratio draws a warning") {
  std::vector<RefitRecord> refits{
      record(100, 1.0, 1.0, Phase::Strict), record(200, 10.0, 0.5, Phase::Strict),
      record(300, 100.0, 0.2, Phase::Strict)};
  const MonitorVerdict verdict = aimh::validate_monitors(refits);
  CHECK(verdict.status == MonitorVerdict::Status::Warn);
  CHECK(verdict.detail.find("dominance") != std::string::npos);
}

TEST_CASE("an increasing diminishing sequence draws a warning") {
  std::vector<RefitRecord> refits{
      record(100, 5.0, 0.1, Phase::Strict), record(200, 5.0, 0.2, Phase::Strict),
      record(300, 5.0, 0.3, Phase::Strict)};
  const MonitorVerdict verdict = aimh::validate_monitors(refits);
  CHECK(verdict.status == MonitorVerdict::Status::Warn);
  CHECK(verdict.detail.find("diminishing") != std::string::npos);
}

TEST_CASE("report serialization thins draws and keeps the stride") {
  aimh::RunReport report;
  report.n_iterations = 10;
  report.accepted_count = 6;
  for (int i = 0; i < 12; ++i) {
    Eigen::VectorXd z(1);
    z[0] = i;
    report.draws.push_back(z);
  }
  report.alpha_trace.assign(10, 0.5);
  report.accepted.assign(10, 1);

  const nlohmann::json doc = aimh::run_report_to_json(report, 2, 4);
  CHECK(doc.at("draw_stride").get<int>() == 3);
  CHECK(doc.at("draws").size() == 4);
  CHECK(doc.at("draws")[1][0].get<double>() == 3.0);
  CHECK(doc.at("alpha_trace").size() == 10);
  // Posterior mean over the last n_iterations - burn_in = 8 draws: 4..11.
  CHECK(doc.at("posterior_mean")[0].get<double>() == doctest::Approx(7.5));
}

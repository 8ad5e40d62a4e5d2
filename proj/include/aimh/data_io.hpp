#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "aimh/mixture.hpp"
#include "json.hpp"

namespace aimh {

// Column-oriented table; rows with missing fields are dropped at load time
// and the count recorded.
struct Dataset {
  std::string name;
  std::vector<std::string> column_names;
  std::vector<Eigen::VectorXd> columns;
  std::string provenance;
  long n_rows = 0;
  long dropped_rows = 0;

  bool has_column(const std::string& column) const;
  const Eigen::VectorXd& column(const std::string& column) const;
};

nlohmann::json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& doc);

// Monthly (date, index level) CSV -> quarterly level averages -> annualized
// inflation 400 (P_t / P_{t-1} - 1).  Dates must be consecutive months and
// cover whole quarters; anything else raises a descriptive error.
Eigen::VectorXd load_cpi(const std::string& path);

// Housing table split for the additive model: log response, the six
// flexible covariates, and the remaining seven linear ones.
struct BostonData {
  Dataset table;
  Eigen::VectorXd response;  // ln of the median-value column
  Eigen::MatrixXd linear_covariates;
  std::vector<std::string> linear_names;
  std::vector<Eigen::VectorXd> flexible;
  std::vector<std::string> flexible_names;
  bool expected_row_count = true;  // 506 rows
};
BostonData load_boston(const std::string& path);

// n mixture draws where each one after the first repeats its predecessor
// with probability duplicate_rate (simulating rejection streaks).
std::vector<Eigen::VectorXd> synth_mixture_draws(const MixtureOfNormals& mix,
                                                 int n, double duplicate_rate,
                                                 std::uint64_t seed);

}  // namespace aimh

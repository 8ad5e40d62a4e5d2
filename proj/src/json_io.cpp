#include "aimh/json_io.hpp"

#include <stdexcept>
#include <vector>

namespace aimh {

nlohmann::json mixture_to_json(const MixtureOfNormals& mix) {
  nlohmann::json doc;
  doc["dimension"] = mix.dimension();
  auto comps = nlohmann::json::array();
  for (const auto& c : mix.components()) {
    nlohmann::json jc;
    jc["weight"] = c.weight();
    jc["mean"] = std::vector<double>(c.mean().data(), c.mean().data() + c.mean().size());
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.covariance().rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < c.covariance().cols(); ++j)
        row.push_back(c.covariance()(i, j));
      rows.push_back(std::move(row));
    }
    jc["covariance"] = std::move(rows);
    comps.push_back(std::move(jc));
  }
  doc["components"] = std::move(comps);
  return doc;
}

MixtureOfNormals mixture_from_json(const nlohmann::json& doc) {
  if (!doc.contains("dimension") || !doc.contains("components"))
    throw std::invalid_argument("mixture JSON needs dimension and components");
  const auto dim = doc.at("dimension").get<Eigen::Index>();
  std::vector<GaussianComponent> comps;
  for (const auto& jc : doc.at("components")) {
    const auto mean_vals = jc.at("mean").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(mean_vals.size()) != dim)
      throw std::invalid_argument("mixture JSON mean length mismatch");
    Eigen::VectorXd mean(dim);
    for (Eigen::Index i = 0; i < dim; ++i) mean[i] = mean_vals[static_cast<std::size_t>(i)];
    const auto& rows = jc.at("covariance");
    if (static_cast<Eigen::Index>(rows.size()) != dim)
      throw std::invalid_argument("mixture JSON covariance row count mismatch");
    Eigen::MatrixXd cov(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != dim)
        throw std::invalid_argument("mixture JSON covariance column count mismatch");
      for (Eigen::Index j = 0; j < dim; ++j) cov(i, j) = row[static_cast<std::size_t>(j)];
    }
    comps.emplace_back(jc.at("weight").get<double>(), std::move(mean), std::move(cov));
  }
  return MixtureOfNormals(std::move(comps));
}

}  // namespace aimh

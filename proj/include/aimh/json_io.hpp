#pragma once

#include "aimh/mixture.hpp"
#include "json.hpp"

namespace aimh {

// {dimension, components:[{weight, mean:[...], covariance:[[...]]}]};
// covariance rows stored in order.  The reader re-validates SPD through the
// mixture constructor.
nlohmann::json mixture_to_json(const MixtureOfNormals& mix);
MixtureOfNormals mixture_from_json(const nlohmann::json& doc);

}  // namespace aimh

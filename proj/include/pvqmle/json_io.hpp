#pragma once

#include <filesystem>

#include <json.hpp>

#include "pvqmle/dgp.hpp"
#include "pvqmle/estimate.hpp"
#include "pvqmle/experiments.hpp"
#include "pvqmle/inference.hpp"

namespace pvq {

using Json = nlohmann::ordered_json;

/// {"type":"inar","thinning":[{"kind":"binomial","a":0.85}],"innovation":{"kind":"poisson","omega":3}}
/// or {"type":"beta","omega":..,"alpha":..,"beta":..,"phi":..}; optional "burn_in".
DgpSpec dgp_from_json(const Json& j);
Json dgp_to_json(const DgpSpec& spec);

McConfig mc_config_from_json(const Json& j);
Json mc_config_to_json(const McConfig& config);
PowerConfig power_config_from_json(const Json& j);

/// Estimates keyed by coordinate name, SEs keyed by reduced coordinate name
/// when a covariance is supplied, loglik and a convergence block.
Json fit_to_json(const FitResult& fit, const CovarianceResult* covariance = nullptr);
Json wald_to_json(const WaldResult& w);
Json application_to_json(const ApplicationReport& report);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

}  // namespace pvq

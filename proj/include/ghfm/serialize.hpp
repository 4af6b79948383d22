#pragma once

// JSON encodings of models, configurations, ground truth and run manifests.

#include "ghfm/baselines.hpp"
#include "ghfm/fusion.hpp"
#include "ghfm/precluster.hpp"
#include "ghfm/simgen.hpp"
#include "ghfm/tuner.hpp"

#include <json.hpp>

#include <string>
#include <variant>

namespace ghfm {

using Json = nlohmann::ordered_json;

Json to_json(const BasisSpec& basis);
BasisSpec basis_from_json(const Json& j);

Json to_json(const PenaltyConfig& config);
PenaltyConfig penalty_from_json(const Json& j);

Json to_json(const FitResult& fit);
FitResult fit_from_json(const Json& j);

Json to_json(const LinearGridFit& fit);
LinearGridFit lm_from_json(const Json& j);

Json to_json(const PreclusterResult& result);
Json to_json(const SyntheticTruth& truth);
SyntheticTruth truth_from_json(const Json& j);
Json to_json(const TuneResult& result);

/// Any fitted model the CLI can write and read back.
using Model = std::variant<FitResult, LinearGridFit>;
Json model_to_json(const Model& model);
Model model_from_json(const Json& j);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

/// FNV-1a of the compact dump, printed as 16 hex digits.
std::string content_hash(const Json& j);

}  // namespace ghfm

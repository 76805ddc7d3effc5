#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "parcelingam/discovery.hpp"
#include "parcelingam/evaluation.hpp"
#include "parcelingam/ordering.hpp"
#include "parcelingam/simgen.hpp"

namespace parcelingam {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so serialized numbers are stable.
double round_sig(double x, int digits = 12);

Json to_json(const CausalOrderingMatrix& m);
Json to_json(const PlausibilityRecord& record);
Json to_json(const Algorithm1Trace& trace);
Json to_json(const DiscoveryResult& result);
Json to_json(const ScoreReport& report);
Json to_json(const SemGroundTruth& truth);

/// SemSpec <-> TOML (sections: dims, model, noise; schema = 1).
std::string sem_spec_to_toml(const SemSpec& spec);
SemSpec sem_spec_from_toml(const std::string& text);

}  // namespace parcelingam

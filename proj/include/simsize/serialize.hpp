#pragma once

#include "simsize/datagen.hpp"
#include "simsize/engines.hpp"
#include "simsize/models.hpp"

#include <nlohmann/json.hpp>

namespace simsize {

using Json = nlohmann::ordered_json;

Json to_json(const GeneratorParams& params);
GeneratorParams generator_from_json(const Json& j);

Json to_json(const FittedModel& model);

/// Resolved search configuration. The thread count is deliberately left out
/// so that output never depends on it.
Json to_json(const SearchProblem& problem);
SearchProblem problem_from_json(const Json& j);

Json to_json(const TraceEntry& entry);
Json to_json(const SearchResult& result);
SearchResult result_from_json(const Json& j);

}  // namespace simsize

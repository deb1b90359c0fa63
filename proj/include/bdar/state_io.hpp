#pragma once

#include <json.hpp>

#include "bdar/state.hpp"

namespace bdar {

/// {"n":..., "C":..., "direct":[[u,v,count],...], "indirect":[[u,v,w,count],...]}
/// with 1-based labels; only nonzero routes are written.
nlohmann::json state_to_json(const NetworkState& state);

/// Parses the format above and validates the result; throws
/// std::invalid_argument on malformed input or an infeasible state.
NetworkState state_from_json(const nlohmann::json& doc);

}  // namespace bdar

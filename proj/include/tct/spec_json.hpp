#pragma once

#include <json.hpp>

#include "tct/simulate.hpp"

namespace tct {

/// Parses a simulation spec from its JSON form. Two shapes are accepted:
/// a named scenario,
///   {"order": 2, "length": 600, "scenario": {"name": "synchrony_pitfall",
///    "base_var": 1.0, "dip_var": 0.01, "dip_start": 250, "dip_end": 350}}
/// or explicit coefficients,
///   {"order": 1, "length": 200, "burn_in": 10,
///    "coefficients": {"a": [0.5], "b": [0.25], "c": [0.0], "d": [0.7]},
///    "noise": {"mean": [0.0, 0.0], "var": [1.0, 1.0]}}
/// Coefficient entries are either one vector of length p (constant over
/// time) or a length-T array of such vectors; noise entries are one value
/// per channel or a length-T array per channel. Unknown keys are rejected.
SvarSpec svar_spec_from_json(const nlohmann::json& j);

nlohmann::json svar_spec_to_json(const SvarSpec& spec);

}  // namespace tct

#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "uigen/nk/tensor.hpp"

namespace uigen::nk {

/// Named parameter set. Ordered by name so iteration (and serialisation) is deterministic.
using ParamMap = std::map<std::string, Tensor>;

inline constexpr int kCheckpointVersion = 1;

/// {"name": {"shape": [...], "data": [...]}, ...}. Doubles are written in shortest
/// round-trip decimal form, so to_json/from_json is bit-exact.
nlohmann::json params_to_json(const ParamMap& params);
ParamMap params_from_json(const nlohmann::json& j);

/// Whole-file helpers: {"format": "uigen-params", "version": 1, "params": {...}}.
std::string save_params(const ParamMap& params);
ParamMap load_params(const std::string& text);

}  // namespace uigen::nk

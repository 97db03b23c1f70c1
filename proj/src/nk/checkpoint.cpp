#include "uigen/nk/checkpoint.hpp"

#include "uigen/core/error.hpp"

namespace uigen::nk {

using nlohmann::json;

json params_to_json(const ParamMap& params) {
    json out = json::object();
    for (const auto& [name, t] : params) {
        out[name] = {{"shape", t.shape()}, {"data", std::vector<double>(t.values().begin(), t.values().end())}};
    }
    return out;
}

ParamMap params_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("parameter block must be a JSON object");
    ParamMap out;
    for (const auto& [name, entry] : j.items()) {
        if (!entry.contains("shape") || !entry.contains("data")) {
            throw ParseError("parameter '" + name + "' needs shape and data");
        }
        try {
            out.emplace(name, Tensor(entry.at("shape").get<std::vector<int>>(), entry.at("data").get<std::vector<double>>()));
        } catch (const json::exception& e) {
            throw ParseError("parameter '" + name + "': " + e.what());
        }
    }
    return out;
}

std::string save_params(const ParamMap& params) {
    json j;
    j["format"] = "uigen-params";
    j["version"] = kCheckpointVersion;
    j["params"] = params_to_json(params);
    return j.dump();
}

ParamMap load_params(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
    if (j.value("format", "") != "uigen-params") throw ParseError("not a uigen parameter file");
    if (j.value("version", 0) != kCheckpointVersion) throw ParseError("unsupported parameter file version");
    return params_from_json(j.at("params"));
}

}  // namespace uigen::nk

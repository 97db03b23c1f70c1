#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace uigen::cli {

/// Every setting a subcommand can read. Filled from defaults, then UIGEN_SEED, then the
/// --config file, then explicit flags, each layer overriding the previous one.
struct CliConfig {
    std::string subcommand;
    std::string input;  // positional file for score / render
    std::string out;
    std::string data;
    std::string model;
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    int epochs = 30;
    int batch = 16;
    std::optional<double> lr;  // subcommand-specific default
    double alpha = 0.5;
    double beta = 0.5;
    int steps = 200;
    int episodes = 16;
    double temperature = 1.0;
    std::string mode = "greedy";
    std::string device = "phone";
    std::vector<std::string> require;  // "kind:count"
    std::vector<std::string> goal;
    double pe_base = 1000.0;
};

/// Keys accepted in a --config file (the long flag names).
const std::vector<std::string>& config_keys();

/// Applies `overrides` (a JSON object keyed like the flags) onto `cfg`. Unknown keys and
/// ill-typed values throw ConfigError naming `source` and, for unknown keys, listing the
/// valid ones.
void apply_overrides(CliConfig& cfg, const nlohmann::json& overrides, const std::string& source);

nlohmann::json to_json(const CliConfig& cfg);

/// Entry point. Exit code 0 on success, 1 on usage errors, 2 on data or model errors.
/// Results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uigen::cli

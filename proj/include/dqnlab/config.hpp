#pragma once

#include <cstdint>
#include <string>

#include "dqnlab/agent.hpp"
#include "dqnlab/flappy.hpp"
#include "dqnlab/trading.hpp"
#include "json.hpp"

namespace dqnlab::config {

// Everything a CLI run reads from its JSON config file. Absent keys keep
// their defaults; unknown keys are rejected.
struct RunConfig {
    Hyperparams hyperparams;
    flappy::FlappyConfig flappy;
    trading::TradingConfig trading;
    std::size_t episodes = 100;
    std::uint64_t seed = 0;
    double trigger_reward = 10.0;

    void validate() const;  // throws ConfigError naming the field
    bool operator==(const RunConfig&) const = default;
};

// Throws ConfigError with a dotted field path ("hyperparams.gamma").
RunConfig from_json(const nlohmann::json& doc);
RunConfig parse(const std::string& text);
RunConfig load(const std::string& path);

nlohmann::ordered_json to_json(const RunConfig& cfg);
std::string echo(const RunConfig& cfg);

}  // namespace dqnlab::config

#include "dqnlab/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dqnlab/errors.hpp"

namespace dqnlab::config {
namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "must be a number");
    return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& field) {
    if (!v.is_number_unsigned()) {
        if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == static_cast<double>(static_cast<std::uint64_t>(v.get<double>())))
            return static_cast<std::uint64_t>(v.get<double>());
        throw ConfigError(field, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& field) {
    if (!v.is_boolean()) throw ConfigError(field, "must be true or false");
    return v.get<bool>();
}

// Applies each present key through its setter; anything else is an error.
using Setter = std::function<void(const json&, const std::string&)>;

void apply(const json& obj, const std::string& prefix, const std::map<std::string, Setter>& setters) {
    if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        const std::string field = prefix.empty() ? key : prefix + "." + key;
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(field, "unknown key");
        it->second(value, field);
    }
}

template <typename T>
Setter number(T& slot) {
    return [&slot](const json& v, const std::string& f) { slot = static_cast<T>(as_number(v, f)); };
}

template <typename T>
Setter count(T& slot) {
    return [&slot](const json& v, const std::string& f) { slot = static_cast<T>(as_count(v, f)); };
}

void with_prefix(const std::string& prefix, const std::function<void()>& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + "." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
}

}  // namespace

void RunConfig::validate() const {
    with_prefix("hyperparams", [&] { hyperparams.validate(); });
    with_prefix("flappy", [&] { flappy.validate(); });
    with_prefix("trading", [&] { trading.validate(); });
}

RunConfig from_json(const json& doc) {
    RunConfig cfg;
    Hyperparams& h = cfg.hyperparams;
    flappy::FlappyConfig& f = cfg.flappy;
    trading::TradingConfig& t = cfg.trading;

    const std::map<std::string, Setter> hyper{
        {"gamma", number(h.gamma)},
        {"eps_start", number(h.eps_start)},
        {"eps_end", number(h.eps_end)},
        {"eps_decay", number(h.eps_decay)},
        {"tau", number(h.tau)},
        {"lr", number(h.lr)},
        {"batch_size", count(h.batch_size)},
        {"memory_capacity", count(h.memory_capacity)},
        {"hidden_size", count(h.hidden_size)},
        {"huber_delta", number(h.huber_delta)},
        {"clip_limit", number(h.clip_limit)},
        {"learn_start", count(h.learn_start)},
        {"dropout_p", number(h.dropout_p)},
        {"learn_when_full", [&h](const json& v, const std::string& fld) { h.learn_when_full = as_bool(v, fld); }},
    };
    const std::map<std::string, Setter> flappy_keys{
        {"gravity", number(f.gravity)},
        {"flap_impulse", number(f.flap_impulse)},
        {"scroll_speed", number(f.scroll_speed)},
        {"pipe_gap", number(f.pipe_gap)},
        {"pipe_width", number(f.pipe_width)},
        {"pipe_spacing", number(f.pipe_spacing)},
        {"gap_center_min", number(f.gap_center_min)},
        {"gap_center_max", number(f.gap_center_max)},
        {"max_steps", count(f.max_steps)},
        {"obs_mode",
         [&f](const json& v, const std::string& fld) {
             if (!v.is_string()) throw ConfigError(fld, "must be a string");
             try {
                 f.obs_mode = flappy::obs_mode_from_string(v.get<std::string>());
             } catch (const ConfigError& e) {
                 throw ConfigError(fld, std::string(e.what()).substr(e.field().size() + 2));
             }
         }},
    };
    const std::map<std::string, Setter> trading_keys{
        {"initial_cash", number(t.initial_cash)},
        {"commission_rate", number(t.commission_rate)},
        {"action_levels", count(t.action_levels)},
    };
    const std::map<std::string, Setter> root{
        {"hyperparams", [&](const json& v, const std::string& fld) { apply(v, fld, hyper); }},
        {"flappy", [&](const json& v, const std::string& fld) { apply(v, fld, flappy_keys); }},
        {"trading", [&](const json& v, const std::string& fld) { apply(v, fld, trading_keys); }},
        {"episodes", count(cfg.episodes)},
        {"seed", count(cfg.seed)},
        {"trigger_reward", number(cfg.trigger_reward)},
    };
    apply(doc, "", root);
    cfg.validate();
    return cfg;
}

RunConfig parse(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    return from_json(doc);
}

RunConfig load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    const Hyperparams& h = cfg.hyperparams;
    const flappy::FlappyConfig& f = cfg.flappy;
    const trading::TradingConfig& t = cfg.trading;
    nlohmann::ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["episodes"] = cfg.episodes;
    doc["trigger_reward"] = cfg.trigger_reward;
    doc["hyperparams"] = {{"gamma", h.gamma},
                          {"eps_start", h.eps_start},
                          {"eps_end", h.eps_end},
                          {"eps_decay", h.eps_decay},
                          {"tau", h.tau},
                          {"lr", h.lr},
                          {"batch_size", h.batch_size},
                          {"memory_capacity", h.memory_capacity},
                          {"hidden_size", h.hidden_size},
                          {"huber_delta", h.huber_delta},
                          {"clip_limit", h.clip_limit},
                          {"learn_start", h.learn_start},
                          {"learn_when_full", h.learn_when_full},
                          {"dropout_p", h.dropout_p}};
    doc["flappy"] = {{"gravity", f.gravity},
                     {"flap_impulse", f.flap_impulse},
                     {"scroll_speed", f.scroll_speed},
                     {"pipe_gap", f.pipe_gap},
                     {"pipe_width", f.pipe_width},
                     {"pipe_spacing", f.pipe_spacing},
                     {"gap_center_min", f.gap_center_min},
                     {"gap_center_max", f.gap_center_max},
                     {"max_steps", f.max_steps},
                     {"obs_mode", std::string(flappy::to_string(f.obs_mode))}};
    doc["trading"] = {{"initial_cash", t.initial_cash},
                      {"commission_rate", t.commission_rate},
                      {"action_levels", t.action_levels}};
    return doc;
}

std::string echo(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace dqnlab::config

#include "dqnlab/flappy.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "dqnlab/errors.hpp"
#include "dqnlab/format.hpp"

namespace dqnlab::flappy {

std::string_view to_string(ObsMode m) {
    return m == ObsMode::paper_literal ? "paper_literal" : "extended";
}

ObsMode obs_mode_from_string(std::string_view s) {
    if (s == "paper_literal") return ObsMode::paper_literal;
    if (s == "extended") return ObsMode::extended;
    throw ConfigError("obs_mode", "must be \"paper_literal\" or \"extended\", got \"" + std::string(s) + "\"");
}

namespace {

bool fraction(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

void FlappyConfig::validate() const {
    if (!(gravity <= 0.0 && std::isfinite(gravity))) throw ConfigError("gravity", "must be <= 0");
    if (!(flap_impulse > 0.0 && std::isfinite(flap_impulse))) throw ConfigError("flap_impulse", "must be > 0");
    if (!fraction(scroll_speed)) throw ConfigError("scroll_speed", "must lie in (0, 1)");
    if (!fraction(pipe_gap)) throw ConfigError("pipe_gap", "must lie in (0, 1)");
    if (!fraction(pipe_width)) throw ConfigError("pipe_width", "must lie in (0, 1)");
    if (!fraction(pipe_spacing)) throw ConfigError("pipe_spacing", "must lie in (0, 1)");
    if (!(pipe_spacing > pipe_width)) throw ConfigError("pipe_spacing", "must exceed pipe_width");
    if (!fraction(gap_center_min)) throw ConfigError("gap_center_min", "must lie in (0, 1)");
    if (!fraction(gap_center_max)) throw ConfigError("gap_center_max", "must lie in (0, 1)");
    if (!(gap_center_min <= gap_center_max))
        throw ConfigError("gap_center_min", "must not exceed gap_center_max");
    if (gap_center_min - pipe_gap / 2 < 0.0 || gap_center_max + pipe_gap / 2 > 1.0)
        throw ConfigError("pipe_gap", "gap does not fit inside [0, 1] at the gap_center range bounds");
    if (max_steps == 0) throw ConfigError("max_steps", "must be >= 1");
}

std::size_t observation_size(ObsMode mode) { return mode == ObsMode::paper_literal ? 1 : 4; }

std::vector<double> observe(const FlappyState& state, const FlappyConfig& cfg) {
    if (cfg.obs_mode == ObsMode::paper_literal) return {state.bird_y};
    for (const Pipe& p : state.pipes)
        if (!p.passed) return {state.bird_y, state.bird_vy, p.x_left - kBirdX, p.gap_center};
    // Unreachable while the spawn invariant holds.
    return {state.bird_y, state.bird_vy, 1.0, 0.5};
}

FlappyEnv::FlappyEnv(FlappyConfig cfg) : cfg_(cfg), rng_(0) { cfg_.validate(); }

void FlappyEnv::spawn_until_covered() {
    std::uniform_real_distribution<double> gap(cfg_.gap_center_min, cfg_.gap_center_max);
    while (state_.pipes.empty() || state_.pipes.back().x_left < 1.0) {
        const double x = state_.pipes.empty() ? kBirdX + cfg_.pipe_spacing
                                              : state_.pipes.back().x_left + cfg_.pipe_spacing;
        state_.pipes.push_back({x, gap(rng_), false});
    }
}

std::vector<double> FlappyEnv::reset(std::uint64_t seed) {
    rng_ = make_stream(seed, 0);
    state_ = FlappyState{};
    spawn_until_covered();
    return observe(state_, cfg_);
}

StepResult FlappyEnv::step(std::size_t action) {
    if (state_.done) throw InvalidStateError("flappy step: episode already finished");
    if (action >= kActionCount)
        throw ParameterError("flappy step: action must be 0 (up) or 1 (down), got " + std::to_string(action));

    FlappyState& s = state_;
    if (action == kActionUp) s.bird_vy = cfg_.flap_impulse;
    s.bird_vy += cfg_.gravity;
    s.bird_y += s.bird_vy;
    ++s.step_count;

    bool crashed = s.bird_y < 0.0 || s.bird_y > 1.0;
    double reward = 0.0;
    const double half_gap = cfg_.pipe_gap / 2;
    for (Pipe& p : s.pipes) {
        p.x_left -= cfg_.scroll_speed;
        const double right = p.x_left + cfg_.pipe_width;
        const bool overlaps = p.x_left <= kBirdX && kBirdX <= right;
        if (overlaps && std::abs(s.bird_y - p.gap_center) > half_gap) crashed = true;
        if (!p.passed && right < kBirdX) {
            p.passed = true;
            if (!crashed) reward += 1.0;
        }
    }
    if (crashed) reward = 0.0;
    s.score += static_cast<std::uint64_t>(reward);

    while (!s.pipes.empty() && s.pipes.front().x_left + cfg_.pipe_width < 0.0) s.pipes.erase(s.pipes.begin());
    spawn_until_covered();

    s.done = crashed || s.step_count >= cfg_.max_steps;
    return {observe(s, cfg_), reward, s.done};
}

void write_trajectory_header(std::ostream& out) { out << "step,bird_y,bird_vy,action,reward,done\n"; }

void write_trajectory_row(std::ostream& out, const FlappyState& after, std::size_t action, double reward) {
    out << after.step_count << ',' << fmt_double(after.bird_y) << ',' << fmt_double(after.bird_vy) << ','
        << action << ',' << fmt_double(reward) << ',' << (after.done ? 1 : 0) << '\n';
}

}  // namespace dqnlab::flappy

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "dqnlab/random.hpp"

namespace dqnlab::flappy {

enum class ObsMode { paper_literal, extended };

std::string_view to_string(ObsMode m);
ObsMode obs_mode_from_string(std::string_view s);  // throws ConfigError

// Unit-square world: y in [0, 1] bottom to top, pipes scroll right to left.
struct FlappyConfig {
    double gravity = -0.004;
    double flap_impulse = 0.04;
    double scroll_speed = 0.02;
    double pipe_gap = 0.30;
    double pipe_width = 0.10;
    double pipe_spacing = 0.50;
    double gap_center_min = 0.2;
    double gap_center_max = 0.8;
    std::uint64_t max_steps = 10000;
    ObsMode obs_mode = ObsMode::extended;

    void validate() const;  // throws ConfigError
    bool operator==(const FlappyConfig&) const = default;
};

inline constexpr double kBirdX = 0.2;
inline constexpr std::size_t kActionCount = 2;
inline constexpr std::size_t kActionUp = 0;
inline constexpr std::size_t kActionDown = 1;

struct Pipe {
    double x_left = 0.0;
    double gap_center = 0.5;
    bool passed = false;

    bool operator==(const Pipe&) const = default;
};

struct FlappyState {
    double bird_y = 0.5;
    double bird_vy = 0.0;
    std::vector<Pipe> pipes;  // ascending x_left
    std::uint64_t step_count = 0;
    std::uint64_t score = 0;
    bool done = false;

    bool operator==(const FlappyState&) const = default;
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
};

std::size_t observation_size(ObsMode mode);

// [bird_y] or [bird_y, bird_vy, dx to next unpassed pipe's left edge, its gap center].
std::vector<double> observe(const FlappyState& state, const FlappyConfig& cfg);

// Headless simulation. Gap centers of spawned pipes come from the env's own
// rng, reseeded by reset().
class FlappyEnv {
public:
    explicit FlappyEnv(FlappyConfig cfg);

    std::vector<double> reset(std::uint64_t seed);
    StepResult step(std::size_t action);

    const FlappyState& state() const { return state_; }
    // For tests that stage a specific situation.
    FlappyState& mutable_state() { return state_; }
    const FlappyConfig& config() const { return cfg_; }

private:
    void spawn_until_covered();

    FlappyConfig cfg_;
    FlappyState state_;
    Rng rng_;
};

// Per-episode trajectory dump: step,bird_y,bird_vy,action,reward,done
void write_trajectory_header(std::ostream& out);
void write_trajectory_row(std::ostream& out, const FlappyState& after, std::size_t action, double reward);

}  // namespace dqnlab::flappy

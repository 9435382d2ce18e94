#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dqnlab/random.hpp"

namespace dqnlab {

// One step of experience. next_state is absent exactly when done is true.
struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    std::optional<std::vector<double>> next_state;
    double reward = 0.0;
    bool done = false;

    static Transition step(std::vector<double> state, std::size_t action, double reward,
                           std::vector<double> next_state);
    static Transition terminal(std::vector<double> state, std::size_t action, double reward);

    bool operator==(const Transition&) const = default;
};

// Bounded FIFO of transitions backed by a ring buffer. Once full, each push
// overwrites the oldest entry.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);

    // batch_size distinct entries, uniformly at random, in draw order.
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

    // Indices (oldest = 0) that sample() would pick with the same rng state.
    std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return items_.size() == capacity_; }
    bool empty() const { return items_.empty(); }
    std::size_t pushes() const { return pushes_; }

    // i-th surviving transition in insertion order.
    const Transition& operator[](std::size_t i) const;

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
    std::size_t head_ = 0;  // slot of the oldest item once full
    std::size_t pushes_ = 0;
    std::size_t state_dim_ = 0;
};

}  // namespace dqnlab

#include "dqnlab/replay.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <unordered_set>

#include "dqnlab/errors.hpp"

namespace dqnlab {

Transition Transition::step(std::vector<double> state, std::size_t action, double reward,
                            std::vector<double> next_state) {
    return Transition{std::move(state), action, std::move(next_state), reward, false};
}

Transition Transition::terminal(std::vector<double> state, std::size_t action, double reward) {
    return Transition{std::move(state), action, std::nullopt, reward, true};
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ParameterError("replay memory capacity must be >= 1");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayMemory::push(Transition t) {
    if (t.done == t.next_state.has_value())
        throw ParameterError("transition: next_state must be absent exactly when done");
    if (t.state.empty()) throw ShapeError("transition: empty state vector");
    if (pushes_ == 0) {
        state_dim_ = t.state.size();
    } else if (t.state.size() != state_dim_) {
        throw ShapeError("replay push: expected state length " + std::to_string(state_dim_) + ", got " +
                         std::to_string(t.state.size()));
    }
    if (t.next_state && t.next_state->size() != state_dim_)
        throw ShapeError("replay push: expected next_state length " + std::to_string(state_dim_) +
                         ", got " + std::to_string(t.next_state->size()));

    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
    ++pushes_;
}

const Transition& ReplayMemory::operator[](std::size_t i) const {
    if (i >= items_.size()) throw ParameterError("replay index out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch_size, Rng& rng) const {
    if (batch_size > items_.size())
        throw InsufficientDataError("replay sample: need " + std::to_string(batch_size) +
                                    " transitions, have " + std::to_string(items_.size()));
    // Floyd's algorithm: k draws, no duplicates, uniform over k-subsets.
    const std::size_t n = items_.size();
    std::vector<std::size_t> picked;
    picked.reserve(batch_size);
    std::unordered_set<std::size_t> seen;
    seen.reserve(batch_size * 2);
    for (std::size_t j = n - batch_size; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> dist(0, j);
        std::size_t r = dist(rng);
        if (!seen.insert(r).second) {
            r = j;
            seen.insert(r);
        }
        picked.push_back(r);
    }
    // Floyd fixes the subset, not the order; shuffle so draw order is uniform too.
    std::shuffle(picked.begin(), picked.end(), rng);
    return picked;
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (std::size_t i : sample_indices(batch_size, rng)) out.push_back((*this)[i]);
    return out;
}

}  // namespace dqnlab

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "dqnlab/errors.hpp"
#include "dqnlab/replay.hpp"

namespace dqnlab {
namespace {

Transition tagged(double tag) { return Transition::step({tag, 0.0}, 0, tag, {tag, 1.0}); }

std::vector<double> tags(const ReplayMemory& m) {
    std::vector<double> out;
    for (std::size_t i = 0; i < m.size(); ++i) out.push_back(m[i].reward);
    return out;
}

TEST(Replay, FreshMemoryIsEmpty) {
    ReplayMemory m(3);
    EXPECT_EQ(m.size(), 0u);
    EXPECT_TRUE(m.empty());
}

TEST(Replay, EvictsOldestInOrder) {
    ReplayMemory m(3);
    for (int i = 1; i <= 4; ++i) m.push(tagged(i));
    EXPECT_EQ(tags(m), (std::vector<double>{2, 3, 4}));
    m.push(tagged(5));
    EXPECT_EQ(m.size(), 3u);
    EXPECT_EQ(tags(m), (std::vector<double>{3, 4, 5}));
    EXPECT_EQ(m.pushes(), 5u);
}

TEST(Replay, LengthCounts) {
    ReplayMemory big(50000);
    big.push(tagged(1));
    EXPECT_EQ(big.size(), 1u);
    ReplayMemory m(10);
    m.push(tagged(1));
    m.push(tagged(2));
    EXPECT_EQ(m.size(), 2u);
    EXPECT_FALSE(m.full());
}

TEST(Replay, RejectsDimensionMismatch) {
    ReplayMemory m(4);
    m.push(tagged(1));
    EXPECT_THROW(m.push(Transition::terminal({1.0, 2.0, 3.0}, 0, 0.0)), ShapeError);
    EXPECT_THROW(m.push(Transition::step({1.0, 2.0}, 0, 0.0, {1.0})), ShapeError);
}

TEST(Replay, RejectsInconsistentTerminalFlag) {
    ReplayMemory m(4);
    Transition t = tagged(1);
    t.done = true;  // next_state still present
    EXPECT_THROW(m.push(t), ParameterError);
    Transition u = Transition::terminal({1.0, 2.0}, 0, 0.0);
    u.done = false;
    EXPECT_THROW(m.push(u), ParameterError);
}

TEST(Replay, RejectsZeroCapacity) { EXPECT_THROW(ReplayMemory(0), ParameterError); }

TEST(Replay, ExhaustiveDrawIsPermutation) {
    ReplayMemory m(256);
    for (int i = 0; i < 256; ++i) m.push(tagged(i));
    Rng rng(1);
    auto idx = m.sample_indices(256, rng);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(idx[i], i);
}

TEST(Replay, SampleIsDeterministicAndMatchesIndices) {
    ReplayMemory m(1000);
    for (int i = 0; i < 1000; ++i) m.push(tagged(i));
    Rng a(5), b(5), c(5);
    const auto s1 = m.sample(256, a);
    const auto s2 = m.sample(256, b);
    EXPECT_EQ(s1, s2);
    const auto idx = m.sample_indices(256, c);
    for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(s1[i], m[idx[i]]);
}

TEST(Replay, NoDuplicatesWithinBatch) {
    ReplayMemory m(64);
    for (int i = 0; i < 100; ++i) m.push(tagged(i));
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto idx = m.sample_indices(32, rng);
        EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
    }
}

TEST(Replay, InsufficientData) {
    ReplayMemory m(10);
    m.push(tagged(1));
    Rng rng(1);
    EXPECT_THROW(m.sample(2, rng), InsufficientDataError);
}

TEST(Replay, UniformSingleDraws) {
    ReplayMemory m(10);
    for (int i = 0; i < 10; ++i) m.push(tagged(i));
    Rng rng(2024);
    std::vector<double> counts(10, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[m.sample_indices(1, rng)[0]] += 1.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - draws / 10.0) * (c - draws / 10.0) / (draws / 10.0);
    // chi-square critical value, 9 dof, alpha = 0.001
    EXPECT_LT(chi2, 27.877164871256568);
}

}  // namespace
}  // namespace dqnlab

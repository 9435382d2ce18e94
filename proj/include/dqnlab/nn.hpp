#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dqnlab/random.hpp"

namespace dqnlab::nn {

struct LayerSpec {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
};

// One affine map. `weights` is fan_out x fan_in, row-major.
// Also used as the storage shape for gradients and optimizer moments.
struct DenseLayer {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    static DenseLayer zeros(LayerSpec spec);
    LayerSpec spec() const { return {fan_in, fan_out}; }
    bool operator==(const DenseLayer&) const = default;
};

inline constexpr std::size_t kLayerCount = 3;

using LayerStack = std::array<DenseLayer, kLayerCount>;

// Weights drawn i.i.d. Normal(0, 2 / fan_in), bias zero.
DenseLayer kaiming_init(LayerSpec spec, Rng& rng);

// Three linear layers: ReLU + dropout after the first two, identity after the last.
class QNetwork {
public:
    QNetwork(LayerStack layers, double dropout_p);

    // input -> hidden -> hidden -> actions, Kaiming-initialized.
    static QNetwork kaiming(std::size_t inputs, std::size_t hidden, std::size_t actions,
                            double dropout_p, Rng& rng);

    std::size_t input_size() const { return layers_[0].fan_in; }
    std::size_t output_size() const { return layers_[kLayerCount - 1].fan_out; }
    std::size_t parameter_count() const;
    double dropout_p() const { return dropout_p_; }
    void set_dropout_p(double p);

    const LayerStack& layers() const { return layers_; }
    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    // Values may be edited freely; dimensions must not change.
    DenseLayer& layer(std::size_t i) { return layers_.at(i); }

    bool operator==(const QNetwork&) const = default;

private:
    LayerStack layers_;
    double dropout_p_ = 0.0;
};

// Same shape as the network's parameters, one partial derivative each.
struct Gradients {
    LayerStack layers;

    static Gradients zeros_like(const QNetwork& net);
    bool congruent_with(const QNetwork& net) const;
};

enum class Mode { train, eval };

// Everything backward() needs from a forward pass over a batch.
struct ForwardCache {
    std::size_t batch = 0;
    Mode mode = Mode::eval;
    // Input to each linear layer (batch x fan_in), after ReLU/dropout.
    std::array<std::vector<double>, kLayerCount> inputs;
    // Hidden pre-activations (batch x fan_out) for layers 0 and 1.
    std::array<std::vector<double>, kLayerCount - 1> pre_activations;
    // 0/1 dropout masks for layers 0 and 1; empty when no dropout was applied.
    std::array<std::vector<double>, kLayerCount - 1> masks;
};

struct ForwardResult {
    std::vector<double> q_values;  // batch x actions
    ForwardCache cache;
};

// `inputs` holds `batch` observations back to back. Train mode applies inverted
// dropout with masks drawn from `rng`; eval mode never touches `rng`.
ForwardResult forward_batch(const QNetwork& net, std::span<const double> inputs, std::size_t batch,
                            Mode mode, Rng& rng);

ForwardResult forward(const QNetwork& net, std::span<const double> input, Mode mode, Rng& rng);

// Eval-mode Q-values without keeping a cache.
std::vector<double> predict(const QNetwork& net, std::span<const double> input);
std::vector<double> predict_batch(const QNetwork& net, std::span<const double> inputs,
                                  std::size_t batch);

// output_grad is dLoss/dQ, batch x actions, laid out like ForwardResult::q_values.
Gradients backward(const QNetwork& net, const ForwardCache& cache,
                   std::span<const double> output_grad);

struct HuberResult {
    double loss = 0.0;
    double dloss_dpred = 0.0;
};

HuberResult huber_loss(double pred, double target, double delta);

void clip_gradients_inplace(Gradients& grads, double limit);
Gradients clip_gradients(Gradients grads, double limit);

struct AdamState {
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_network(const QNetwork& net);
};

void adam_step(QNetwork& net, const Gradients& grads, AdamState& state, double lr);

// target <- target + tau * (source - target); tau = 1 copies exactly.
void soft_update(const QNetwork& source, QNetwork& target, double tau);

// Version-1 JSON checkpoint document.
inline constexpr int kCheckpointVersion = 1;
std::string save_network(const QNetwork& net);
QNetwork load_network(std::string_view document);

void save_network_file(const QNetwork& net, const std::string& path);
QNetwork load_network_file(const std::string& path);

}  // namespace dqnlab::nn

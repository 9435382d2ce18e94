#include <cmath>

#include "dqnlab/errors.hpp"
#include "dqnlab/kernels.hpp"
#include "dqnlab/nn.hpp"

namespace dqnlab::nn {

HuberResult huber_loss(double pred, double target, double delta) {
    if (!(delta > 0.0)) throw ParameterError("huber_loss: delta must be > 0");
    const double diff = pred - target;
    const double mag = std::abs(diff);
    if (mag <= delta) return {0.5 * diff * diff, diff};
    return {delta * mag - 0.5 * delta * delta, diff > 0.0 ? delta : -delta};
}

void clip_gradients_inplace(Gradients& grads, double limit) {
    if (!(limit > 0.0)) throw ParameterError("clip_gradients: limit must be > 0");
    const auto& k = kernels::active();
    for (auto& l : grads.layers) {
        k.clip(l.weights.data(), l.weights.size(), limit);
        k.clip(l.bias.data(), l.bias.size(), limit);
    }
}

Gradients clip_gradients(Gradients grads, double limit) {
    clip_gradients_inplace(grads, limit);
    return grads;
}

AdamState AdamState::for_network(const QNetwork& net) {
    AdamState s;
    s.first_moment = Gradients::zeros_like(net);
    s.second_moment = Gradients::zeros_like(net);
    return s;
}

void adam_step(QNetwork& net, const Gradients& grads, AdamState& state, double lr) {
    if (!grads.congruent_with(net)) throw ShapeError("adam_step: gradients do not match network shape");
    if (!state.first_moment.congruent_with(net) || !state.second_moment.congruent_with(net))
        throw ShapeError("adam_step: optimizer state does not match network shape");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < kLayerCount; ++i) {
        DenseLayer& p = net.layer(i);
        const DenseLayer& g = grads.layers[i];
        DenseLayer& m = state.first_moment.layers[i];
        DenseLayer& v = state.second_moment.layers[i];
        k.adam(p.weights.data(), g.weights.data(), m.weights.data(), v.weights.data(),
               p.weights.size(), lr, state.beta1, state.beta2, state.eps, bc1, bc2);
        k.adam(p.bias.data(), g.bias.data(), m.bias.data(), v.bias.data(), p.bias.size(), lr,
               state.beta1, state.beta2, state.eps, bc1, bc2);
    }
}

void soft_update(const QNetwork& source, QNetwork& target, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ParameterError("soft_update: tau must lie in [0, 1]");
    for (std::size_t i = 0; i < kLayerCount; ++i)
        if (source.layer(i).spec().fan_in != target.layer(i).fan_in ||
            source.layer(i).fan_out != target.layer(i).fan_out)
            throw ShapeError("soft_update: networks differ in shape at layer " + std::to_string(i));
    if (tau == 0.0) return;
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < kLayerCount; ++i) {
        const DenseLayer& s = source.layer(i);
        DenseLayer& d = target.layer(i);
        if (tau == 1.0) {
            d.weights = s.weights;
            d.bias = s.bias;
            continue;
        }
        k.blend(s.weights.data(), d.weights.data(), d.weights.size(), tau);
        k.blend(s.bias.data(), d.bias.data(), d.bias.size(), tau);
    }
}

}  // namespace dqnlab::nn

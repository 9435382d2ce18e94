#include "dqnlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dqnlab/errors.hpp"
#include "dqnlab/kernels.hpp"

namespace dqnlab::nn {
namespace {

std::string shape_message(std::string_view what, std::size_t expected, std::size_t actual) {
    return std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
           std::to_string(actual);
}

std::vector<double> transpose(std::span<const double> src, std::size_t rows, std::size_t cols) {
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
    return out;
}

void check_layer(const DenseLayer& l, std::size_t index) {
    if (l.fan_in == 0 || l.fan_out == 0)
        throw ShapeError("layer " + std::to_string(index) + ": fan_in and fan_out must be >= 1");
    if (l.weights.size() != l.fan_in * l.fan_out)
        throw ShapeError(shape_message("layer " + std::to_string(index) + " weights",
                                       l.fan_in * l.fan_out, l.weights.size()));
    if (l.bias.size() != l.fan_out)
        throw ShapeError(
            shape_message("layer " + std::to_string(index) + " bias", l.fan_out, l.bias.size()));
}

}  // namespace

DenseLayer DenseLayer::zeros(LayerSpec spec) {
    DenseLayer l;
    l.fan_in = spec.fan_in;
    l.fan_out = spec.fan_out;
    l.weights.assign(spec.fan_in * spec.fan_out, 0.0);
    l.bias.assign(spec.fan_out, 0.0);
    return l;
}

DenseLayer kaiming_init(LayerSpec spec, Rng& rng) {
    if (spec.fan_in == 0 || spec.fan_out == 0)
        throw ParameterError("kaiming_init: fan_in and fan_out must be >= 1");
    DenseLayer l = DenseLayer::zeros(spec);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(spec.fan_in)));
    for (double& w : l.weights) w = normal(rng);
    return l;
}

QNetwork::QNetwork(LayerStack layers, double dropout_p) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < kLayerCount; ++i) check_layer(layers_[i], i);
    for (std::size_t i = 1; i < kLayerCount; ++i)
        if (layers_[i].fan_in != layers_[i - 1].fan_out)
            throw ShapeError("layer " + std::to_string(i) + ": fan_in " +
                             std::to_string(layers_[i].fan_in) + " does not match previous fan_out " +
                             std::to_string(layers_[i - 1].fan_out));
    set_dropout_p(dropout_p);
}

QNetwork QNetwork::kaiming(std::size_t inputs, std::size_t hidden, std::size_t actions,
                           double dropout_p, Rng& rng) {
    LayerStack layers{kaiming_init({inputs, hidden}, rng), kaiming_init({hidden, hidden}, rng),
                      kaiming_init({hidden, actions}, rng)};
    return QNetwork(std::move(layers), dropout_p);
}

std::size_t QNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

void QNetwork::set_dropout_p(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("dropout_p must lie in [0, 1]");
    dropout_p_ = p;
}

Gradients Gradients::zeros_like(const QNetwork& net) {
    Gradients g;
    for (std::size_t i = 0; i < kLayerCount; ++i) g.layers[i] = DenseLayer::zeros(net.layer(i).spec());
    return g;
}

bool Gradients::congruent_with(const QNetwork& net) const {
    for (std::size_t i = 0; i < kLayerCount; ++i) {
        const auto& g = layers[i];
        const auto& l = net.layer(i);
        if (g.fan_in != l.fan_in || g.fan_out != l.fan_out || g.weights.size() != l.weights.size() ||
            g.bias.size() != l.bias.size())
            return false;
    }
    return true;
}

ForwardResult forward_batch(const QNetwork& net, std::span<const double> inputs, std::size_t batch,
                            Mode mode, Rng& rng) {
    if (batch == 0) throw ShapeError("forward: batch must be >= 1");
    if (inputs.size() != batch * net.input_size())
        throw ShapeError(shape_message("forward input", batch * net.input_size(), inputs.size()));

    const auto& k = kernels::active();
    const double p = net.dropout_p();
    const bool dropout = mode == Mode::train && p > 0.0;
    const double keep_scale = p < 1.0 ? 1.0 / (1.0 - p) : 0.0;
    std::bernoulli_distribution keep(1.0 - p);

    ForwardResult out;
    ForwardCache& cache = out.cache;
    cache.batch = batch;
    cache.mode = mode;
    cache.inputs[0].assign(inputs.begin(), inputs.end());

    for (std::size_t li = 0; li + 1 < kLayerCount; ++li) {
        const DenseLayer& l = net.layer(li);
        std::vector<double>& z = cache.pre_activations[li];
        z.resize(batch * l.fan_out);
        k.gemm_nt(cache.inputs[li].data(), l.weights.data(), l.bias.data(), z.data(), batch, l.fan_out,
                  l.fan_in);
        std::vector<double>& h = cache.inputs[li + 1];
        h.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] > 0.0 ? z[i] : 0.0;
        if (dropout) {
            std::vector<double>& mask = cache.masks[li];
            mask.resize(h.size());
            for (std::size_t i = 0; i < h.size(); ++i) {
                mask[i] = keep(rng) ? 1.0 : 0.0;
                h[i] = h[i] * mask[i] * keep_scale;
            }
        }
    }

    const DenseLayer& last = net.layer(kLayerCount - 1);
    out.q_values.resize(batch * last.fan_out);
    k.gemm_nt(cache.inputs[kLayerCount - 1].data(), last.weights.data(), last.bias.data(),
              out.q_values.data(), batch, last.fan_out, last.fan_in);
    return out;
}

ForwardResult forward(const QNetwork& net, std::span<const double> input, Mode mode, Rng& rng) {
    if (input.size() != net.input_size())
        throw ShapeError(shape_message("forward input", net.input_size(), input.size()));
    return forward_batch(net, input, 1, mode, rng);
}

std::vector<double> predict_batch(const QNetwork& net, std::span<const double> inputs,
                                  std::size_t batch) {
    Rng unused(0);
    return forward_batch(net, inputs, batch, Mode::eval, unused).q_values;
}

std::vector<double> predict(const QNetwork& net, std::span<const double> input) {
    if (input.size() != net.input_size())
        throw ShapeError(shape_message("predict input", net.input_size(), input.size()));
    return predict_batch(net, input, 1);
}

Gradients backward(const QNetwork& net, const ForwardCache& cache,
                   std::span<const double> output_grad) {
    const std::size_t batch = cache.batch;
    for (std::size_t i = 0; i < kLayerCount; ++i)
        if (cache.inputs[i].size() != batch * net.layer(i).fan_in)
            throw ShapeError(shape_message("backward cache layer " + std::to_string(i),
                                           batch * net.layer(i).fan_in, cache.inputs[i].size()));
    for (std::size_t i = 0; i + 1 < kLayerCount; ++i) {
        const std::size_t expect = batch * net.layer(i).fan_out;
        if (cache.pre_activations[i].size() != expect)
            throw ShapeError(shape_message("backward cache pre-activation " + std::to_string(i), expect,
                                           cache.pre_activations[i].size()));
        if (!cache.masks[i].empty() && cache.masks[i].size() != expect)
            throw ShapeError(shape_message("backward cache mask " + std::to_string(i), expect,
                                           cache.masks[i].size()));
    }
    if (output_grad.size() != batch * net.output_size())
        throw ShapeError(shape_message("backward output_grad", batch * net.output_size(),
                                       output_grad.size()));

    const auto& k = kernels::active();
    const double p = net.dropout_p();
    const double keep_scale = p < 1.0 ? 1.0 / (1.0 - p) : 0.0;

    Gradients grads = Gradients::zeros_like(net);
    std::vector<double> delta(output_grad.begin(), output_grad.end());

    for (std::size_t li = kLayerCount; li-- > 0;) {
        const DenseLayer& l = net.layer(li);
        DenseLayer& g = grads.layers[li];

        // dW = delta^T * input
        const std::vector<double> delta_t = transpose(delta, batch, l.fan_out);
        const std::vector<double> input_t = transpose(cache.inputs[li], batch, l.fan_in);
        k.gemm_nt(delta_t.data(), input_t.data(), nullptr, g.weights.data(), l.fan_out, l.fan_in,
                  batch);
        for (std::size_t o = 0; o < l.fan_out; ++o) {
            double s = 0.0;
            for (std::size_t b = 0; b < batch; ++b) s += delta[b * l.fan_out + o];
            g.bias[o] = s;
        }
        if (li == 0) break;

        // d(input) = delta * W, then back through dropout and ReLU of the layer below.
        const std::vector<double> w_t = transpose(l.weights, l.fan_out, l.fan_in);
        std::vector<double> below(batch * l.fan_in);
        k.gemm_nt(delta.data(), w_t.data(), nullptr, below.data(), batch, l.fan_in, l.fan_out);
        const std::vector<double>& mask = cache.masks[li - 1];
        const std::vector<double>& z = cache.pre_activations[li - 1];
        for (std::size_t i = 0; i < below.size(); ++i) {
            if (!mask.empty()) below[i] *= mask[i] * keep_scale;
            if (!(z[i] > 0.0)) below[i] = 0.0;
        }
        delta = std::move(below);
    }
    return grads;
}

}  // namespace dqnlab::nn

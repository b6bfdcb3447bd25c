#pragma once

#include "anett/tensor.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace anett {

enum class LayerKind : std::uint8_t { conv = 0, conv_transpose = 1, activation = 2, downsample = 3, upsample = 4 };

enum class ActivationKind : std::uint8_t {
    relu = 0,
    leaky_relu = 1,
    /// log(1 + e^t) - log 2, shifted so that 0 maps to 0.
    softplus = 2,
    identity = 3
};

std::string_view to_string(ActivationKind kind);
ActivationKind parse_activation(std::string_view name);

inline constexpr double leaky_slope = 0.1;

/// One layer of a feed-forward block.
///
/// conv:           3x3 (or k x k) correlation with zero padding (k-1)/2, stride 1 or 2,
///                 weights laid out [out][in][k][k].
/// conv_transpose: exact transpose of the strided conv, weights [in][out][k][k];
///                 output extent = stride * input extent.
/// downsample:     2x2 average pooling.  upsample: nearest-neighbour x2.
struct Layer {
    LayerKind kind = LayerKind::activation;
    ActivationKind activation = ActivationKind::identity;
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int stride = 1;
    Vector weights;
    Vector bias;

    static Layer conv(int in, int out, int stride = 1, int kernel = 3);
    static Layer conv_transpose(int in, int out, int stride = 2, int kernel = 3);
    static Layer act(ActivationKind kind);
    static Layer downsample();
    static Layer upsample();

    bool has_parameters() const { return kind == LayerKind::conv || kind == LayerKind::conv_transpose; }
    Eigen::Index parameter_count() const { return weights.size() + bias.size(); }

    Tensor forward(const Tensor& in) const;
    /// Returns dL/d(input); accumulates dL/dW and dL/db when the pointers are non-null.
    Tensor backward(const Tensor& in, const Tensor& grad_out, Vector* grad_w, Vector* grad_b) const;
};

/// Gradient storage for one layer; empty vectors for parameter-free layers.
struct LayerGrad {
    Vector weights;
    Vector bias;
};

/// Ordered list of layers applied in sequence.
class Sequential {
public:
    /// Inputs of every layer plus the final output, recorded by forward().
    struct Tape {
        std::vector<Tensor> activations;
    };
    using Grads = std::vector<LayerGrad>;

    Sequential() = default;
    explicit Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

    Tensor forward(const Tensor& in, Tape* tape = nullptr) const;
    Tensor backward(const Tape& tape, const Tensor& grad_out, Grads* grads) const;

    /// He-normal weights, zero biases.
    void initialize(std::mt19937_64& rng);

    Grads zero_grads() const;
    std::vector<Vector*> parameters();
    Eigen::Index parameter_count() const;

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    bool smooth() const;

private:
    std::vector<Layer> layers_;
};

} // namespace anett

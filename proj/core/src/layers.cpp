#include "anett/layers.hpp"

#include "anett/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace anett {

namespace {

// Index relation shared by conv and its transpose: a position on the coarse
// ("small") grid maps to big = small * stride + tap - pad on the fine grid.
struct Geometry {
    int hs, ws, hb, wb, stride, kernel, pad;

    // Range of small columns whose fine partner for tap kx lies inside [0, wb).
    std::pair<int, int> columns(int kx) const {
        const int lo_num = pad - kx;
        int lo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
        const int hi_num = wb - 1 - kx + pad;
        int hi = hi_num < 0 ? -1 : hi_num / stride;
        lo = std::max(lo, 0);
        hi = std::min(hi, ws - 1);
        return {lo, hi + 1};
    }
};

// small += sum_taps w * big
void gather(const Geometry& g, const double* big, double* small, const double* w) {
    for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
            const double weight = w[ky * g.kernel + kx];
            const auto [x0, x1] = g.columns(kx);
            if (x0 >= x1) continue;
            for (int ys = 0; ys < g.hs; ++ys) {
                const int yb = ys * g.stride + ky - g.pad;
                if (yb < 0 || yb >= g.hb) continue;
                double* out = small + static_cast<std::ptrdiff_t>(ys) * g.ws;
                const double* in = big + static_cast<std::ptrdiff_t>(yb) * g.wb;
                const int shift = kx - g.pad;
                if (g.stride == 1) {
                    for (int xs = x0; xs < x1; ++xs) out[xs] += weight * in[xs + shift];
                } else {
                    for (int xs = x0; xs < x1; ++xs) out[xs] += weight * in[xs * g.stride + shift];
                }
            }
        }
    }
}

// big += sum_taps w * small
void scatter(const Geometry& g, double* big, const double* small, const double* w) {
    for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
            const double weight = w[ky * g.kernel + kx];
            const auto [x0, x1] = g.columns(kx);
            if (x0 >= x1) continue;
            for (int ys = 0; ys < g.hs; ++ys) {
                const int yb = ys * g.stride + ky - g.pad;
                if (yb < 0 || yb >= g.hb) continue;
                const double* in = small + static_cast<std::ptrdiff_t>(ys) * g.ws;
                double* out = big + static_cast<std::ptrdiff_t>(yb) * g.wb;
                const int shift = kx - g.pad;
                if (g.stride == 1) {
                    for (int xs = x0; xs < x1; ++xs) out[xs + shift] += weight * in[xs];
                } else {
                    for (int xs = x0; xs < x1; ++xs) out[xs * g.stride + shift] += weight * in[xs];
                }
            }
        }
    }
}

// dw[tap] += sum small * big
void correlate(const Geometry& g, const double* big, const double* small, double* dw) {
    for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
            const auto [x0, x1] = g.columns(kx);
            if (x0 >= x1) continue;
            double acc = 0.0;
            for (int ys = 0; ys < g.hs; ++ys) {
                const int yb = ys * g.stride + ky - g.pad;
                if (yb < 0 || yb >= g.hb) continue;
                const double* s = small + static_cast<std::ptrdiff_t>(ys) * g.ws;
                const double* b = big + static_cast<std::ptrdiff_t>(yb) * g.wb;
                const int shift = kx - g.pad;
                if (g.stride == 1) {
                    for (int xs = x0; xs < x1; ++xs) acc += s[xs] * b[xs + shift];
                } else {
                    for (int xs = x0; xs < x1; ++xs) acc += s[xs] * b[xs * g.stride + shift];
                }
            }
            dw[ky * g.kernel + kx] += acc;
        }
    }
}

double activate(ActivationKind kind, double t) {
    switch (kind) {
    case ActivationKind::relu: return t > 0.0 ? t : 0.0;
    case ActivationKind::leaky_relu: return t > 0.0 ? t : leaky_slope * t;
    case ActivationKind::softplus: {
        // log1p(exp(t)) computed without overflow.
        const double sp = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
        return sp - std::log(2.0);
    }
    case ActivationKind::identity: return t;
    }
    return t;
}

double activate_derivative(ActivationKind kind, double t) {
    switch (kind) {
    case ActivationKind::relu: return t > 0.0 ? 1.0 : 0.0;
    case ActivationKind::leaky_relu: return t > 0.0 ? 1.0 : leaky_slope;
    case ActivationKind::softplus: return 1.0 / (1.0 + std::exp(-t));
    case ActivationKind::identity: return 1.0;
    }
    return 1.0;
}

void check_input(const Layer& layer, const Tensor& in) {
    if (layer.has_parameters() && in.channels != layer.in_channels) {
        throw DimensionError("Layer: expected " + std::to_string(layer.in_channels) + " input channels, got " +
                             std::to_string(in.channels));
    }
}

} // namespace

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::leaky_relu: return "leaky_relu";
    case ActivationKind::softplus: return "softplus";
    case ActivationKind::identity: return "identity";
    }
    return "?";
}

ActivationKind parse_activation(std::string_view name) {
    if (name == "relu") return ActivationKind::relu;
    if (name == "leaky_relu" || name == "leaky") return ActivationKind::leaky_relu;
    if (name == "softplus") return ActivationKind::softplus;
    if (name == "identity" || name == "linear") return ActivationKind::identity;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Layer Layer::conv(int in, int out, int stride, int kernel) {
    Layer l;
    l.kind = LayerKind::conv;
    l.in_channels = in;
    l.out_channels = out;
    l.kernel = kernel;
    l.stride = stride;
    l.weights = Vector::Zero(static_cast<Eigen::Index>(out) * in * kernel * kernel);
    l.bias = Vector::Zero(out);
    return l;
}

Layer Layer::conv_transpose(int in, int out, int stride, int kernel) {
    Layer l = conv(in, out, stride, kernel);
    l.kind = LayerKind::conv_transpose;
    return l;
}

Layer Layer::act(ActivationKind kind) {
    Layer l;
    l.kind = LayerKind::activation;
    l.activation = kind;
    return l;
}

Layer Layer::downsample() {
    Layer l;
    l.kind = LayerKind::downsample;
    return l;
}

Layer Layer::upsample() {
    Layer l;
    l.kind = LayerKind::upsample;
    return l;
}

Tensor Layer::forward(const Tensor& in) const {
    check_input(*this, in);
    const int k2 = kernel * kernel;
    switch (kind) {
    case LayerKind::conv: {
        const int pad = (kernel - 1) / 2;
        const int ho = (in.height + 2 * pad - kernel) / stride + 1;
        const int wo = (in.width + 2 * pad - kernel) / stride + 1;
        Tensor out(out_channels, ho, wo);
        const Geometry g{ho, wo, in.height, in.width, stride, kernel, pad};
        for (int co = 0; co < out_channels; ++co) {
            double* dst = out.channel(co);
            std::fill(dst, dst + out.plane(), bias[co]);
            for (int ci = 0; ci < in_channels; ++ci) {
                gather(g, in.channel(ci), dst, weights.data() + (co * in_channels + ci) * k2);
            }
        }
        return out;
    }
    case LayerKind::conv_transpose: {
        const int pad = (kernel - 1) / 2;
        Tensor out(out_channels, in.height * stride, in.width * stride);
        const Geometry g{in.height, in.width, out.height, out.width, stride, kernel, pad};
        for (int co = 0; co < out_channels; ++co) {
            double* dst = out.channel(co);
            std::fill(dst, dst + out.plane(), bias[co]);
        }
        for (int ci = 0; ci < in_channels; ++ci) {
            for (int co = 0; co < out_channels; ++co) {
                scatter(g, out.channel(co), in.channel(ci), weights.data() + (ci * out_channels + co) * k2);
            }
        }
        return out;
    }
    case LayerKind::activation: {
        Tensor out(in.channels, in.height, in.width);
        for (Eigen::Index i = 0; i < in.size(); ++i) out.data[i] = activate(activation, in.data[i]);
        return out;
    }
    case LayerKind::downsample: {
        if (in.height % 2 != 0 || in.width % 2 != 0) {
            throw DimensionError("downsample: extents must be even");
        }
        Tensor out(in.channels, in.height / 2, in.width / 2);
        for (int c = 0; c < in.channels; ++c) {
            for (int y = 0; y < out.height; ++y) {
                for (int x = 0; x < out.width; ++x) {
                    out(c, y, x) = 0.25 * (in(c, 2 * y, 2 * x) + in(c, 2 * y, 2 * x + 1) + in(c, 2 * y + 1, 2 * x) +
                                           in(c, 2 * y + 1, 2 * x + 1));
                }
            }
        }
        return out;
    }
    case LayerKind::upsample: {
        Tensor out(in.channels, in.height * 2, in.width * 2);
        for (int c = 0; c < in.channels; ++c) {
            for (int y = 0; y < out.height; ++y) {
                for (int x = 0; x < out.width; ++x) out(c, y, x) = in(c, y / 2, x / 2);
            }
        }
        return out;
    }
    }
    return in;
}

Tensor Layer::backward(const Tensor& in, const Tensor& grad_out, Vector* grad_w, Vector* grad_b) const {
    const int k2 = kernel * kernel;
    Tensor grad_in(in.channels, in.height, in.width);
    switch (kind) {
    case LayerKind::conv: {
        const int pad = (kernel - 1) / 2;
        const Geometry g{grad_out.height, grad_out.width, in.height, in.width, stride, kernel, pad};
        for (int co = 0; co < out_channels; ++co) {
            const double* go = grad_out.channel(co);
            for (int ci = 0; ci < in_channels; ++ci) {
                const Eigen::Index offset = (co * in_channels + ci) * k2;
                scatter(g, grad_in.channel(ci), go, weights.data() + offset);
                if (grad_w) correlate(g, in.channel(ci), go, grad_w->data() + offset);
            }
            if (grad_b) (*grad_b)[co] += Eigen::Map<const Vector>(go, grad_out.plane()).sum();
        }
        return grad_in;
    }
    case LayerKind::conv_transpose: {
        const int pad = (kernel - 1) / 2;
        const Geometry g{in.height, in.width, grad_out.height, grad_out.width, stride, kernel, pad};
        for (int ci = 0; ci < in_channels; ++ci) {
            for (int co = 0; co < out_channels; ++co) {
                const Eigen::Index offset = (ci * out_channels + co) * k2;
                gather(g, grad_out.channel(co), grad_in.channel(ci), weights.data() + offset);
                if (grad_w) correlate(g, grad_out.channel(co), in.channel(ci), grad_w->data() + offset);
            }
        }
        if (grad_b) {
            for (int co = 0; co < out_channels; ++co) {
                (*grad_b)[co] += Eigen::Map<const Vector>(grad_out.channel(co), grad_out.plane()).sum();
            }
        }
        return grad_in;
    }
    case LayerKind::activation:
        for (Eigen::Index i = 0; i < in.size(); ++i) {
            grad_in.data[i] = grad_out.data[i] * activate_derivative(activation, in.data[i]);
        }
        return grad_in;
    case LayerKind::downsample:
        for (int c = 0; c < in.channels; ++c) {
            for (int y = 0; y < in.height; ++y) {
                for (int x = 0; x < in.width; ++x) grad_in(c, y, x) = 0.25 * grad_out(c, y / 2, x / 2);
            }
        }
        return grad_in;
    case LayerKind::upsample:
        for (int c = 0; c < grad_out.channels; ++c) {
            for (int y = 0; y < grad_out.height; ++y) {
                for (int x = 0; x < grad_out.width; ++x) grad_in(c, y / 2, x / 2) += grad_out(c, y, x);
            }
        }
        return grad_in;
    }
    return grad_in;
}

Tensor Sequential::forward(const Tensor& in, Tape* tape) const {
    if (tape) {
        tape->activations.clear();
        tape->activations.reserve(layers_.size() + 1);
        tape->activations.push_back(in);
    }
    Tensor current = in;
    for (const Layer& layer : layers_) {
        current = layer.forward(current);
        if (tape) tape->activations.push_back(current);
    }
    return current;
}

Tensor Sequential::backward(const Tape& tape, const Tensor& grad_out, Grads* grads) const {
    if (tape.activations.size() != layers_.size() + 1) {
        throw DimensionError("Sequential::backward: tape does not match this block");
    }
    Tensor grad = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        Vector* gw = nullptr;
        Vector* gb = nullptr;
        if (grads && layers_[i].has_parameters()) {
            gw = &(*grads)[i].weights;
            gb = &(*grads)[i].bias;
        }
        grad = layers_[i].backward(tape.activations[i], grad, gw, gb);
    }
    return grad;
}

void Sequential::initialize(std::mt19937_64& rng) {
    for (Layer& layer : layers_) {
        if (!layer.has_parameters()) continue;
        // Fan-in of one output value: for the transpose only stride^-2 of the taps hit each output.
        double fan_in = static_cast<double>(layer.in_channels) * layer.kernel * layer.kernel;
        if (layer.kind == LayerKind::conv_transpose) fan_in /= layer.stride * layer.stride;
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights[i] = normal(rng);
        layer.bias.setZero();
    }
}

Sequential::Grads Sequential::zero_grads() const {
    Grads grads(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].has_parameters()) {
            grads[i].weights = Vector::Zero(layers_[i].weights.size());
            grads[i].bias = Vector::Zero(layers_[i].bias.size());
        }
    }
    return grads;
}

std::vector<Vector*> Sequential::parameters() {
    std::vector<Vector*> out;
    for (Layer& layer : layers_) {
        if (!layer.has_parameters()) continue;
        out.push_back(&layer.weights);
        out.push_back(&layer.bias);
    }
    return out;
}

Eigen::Index Sequential::parameter_count() const {
    Eigen::Index n = 0;
    for (const Layer& layer : layers_) n += layer.parameter_count();
    return n;
}

bool Sequential::smooth() const {
    return std::none_of(layers_.begin(), layers_.end(), [](const Layer& l) {
        return l.kind == LayerKind::activation &&
               (l.activation == ActivationKind::relu || l.activation == ActivationKind::leaky_relu);
    });
}

} // namespace anett

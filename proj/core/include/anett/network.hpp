#pragma once

#include "anett/layers.hpp"
#include "anett/regularizer.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace anett {

/// Named blocks of a model plus its wiring tag; the unit stored in checkpoints.
struct NetworkParams {
    std::string kind;
    int image_size = 0;
    std::vector<std::pair<std::string, Sequential>> blocks;

    const Sequential& block(const std::string& name) const;
};

using ModelGrads = std::vector<Sequential::Grads>;

struct AutoencoderArch {
    std::array<int, 3> channels{16, 32, 64};
    ActivationKind activation = ActivationKind::leaky_relu;
};

/// Three-level convolutional encoder E and mirrored decoder D^phi, no bottleneck.
///
/// E(x) concatenates all level outputs h1 (c1 x N x N), h2 (c2 x N/2 x N/2)
/// and h3 (c3 x N/4 x N/4). The decoder sees only those coefficients:
///   a3 = dec3(h3), a2 = dec2(a3 + h2), D(xi) = dec1(a2 + h1).
class Autoencoder {
public:
    static constexpr const char* kind_tag = "autoencoder/3level";

    struct EncodeTape {
        Sequential::Tape level[3];
    };
    struct DecodeTape {
        Sequential::Tape dec3, dec2, dec1;
    };

    Autoencoder() = default;
    Autoencoder(const AutoencoderArch& arch, int image_size, std::uint64_t seed);
    static Autoencoder from_params(NetworkParams params);
    NetworkParams to_params() const;

    int image_size() const { return image_size_; }
    Eigen::Index code_dim() const;
    std::vector<BlockShape> code_layout() const;

    CoefficientVector encode(const Tensor& x, EncodeTape* tape = nullptr) const;
    Tensor decode(const Vector& xi, DecodeTape* tape = nullptr) const;

    /// Returns dL/dx given dL/dxi.
    Tensor encode_backward(const EncodeTape& tape, const Vector& grad_xi, ModelGrads* grads) const;
    /// Returns dL/dxi given dL/d(output).
    Vector decode_backward(const DecodeTape& tape, const Tensor& grad_out, ModelGrads* grads) const;

    ModelGrads zero_grads() const;
    std::vector<Vector*> parameters();
    Eigen::Index parameter_count() const;
    bool smooth() const;

    // Block order: enc1, enc2, enc3, dec3, dec2, dec1.
    std::array<Sequential, 6>& blocks() { return blocks_; }
    const std::array<Sequential, 6>& blocks() const { return blocks_; }

private:
    void check_layout() const;

    int image_size_ = 0;
    std::array<Sequential, 6> blocks_;
};

struct TaskNetArch {
    int channels = 16;
    ActivationKind activation = ActivationKind::leaky_relu;
};

/// Residual artifact-removal network U with a skip connection:
///   f1 = head(z), f2 = down(f1) (half resolution, upsampled back), U(z) = z + tail(f1 + f2).
class TaskNet {
public:
    static constexpr const char* kind_tag = "tasknet/residual";

    struct Tape {
        Sequential::Tape head, down, tail;
    };

    TaskNet() = default;
    TaskNet(const TaskNetArch& arch, int image_size, std::uint64_t seed);
    static TaskNet from_params(NetworkParams params);
    NetworkParams to_params() const;

    int image_size() const { return image_size_; }

    Tensor forward(const Tensor& z, Tape* tape = nullptr) const;
    Tensor backward(const Tape& tape, const Tensor& grad_out, ModelGrads* grads) const;

    ModelGrads zero_grads() const;
    std::vector<Vector*> parameters();
    bool smooth() const;

    std::array<Sequential, 3>& blocks() { return blocks_; }
    const std::array<Sequential, 3>& blocks() const { return blocks_; }

private:
    int image_size_ = 0;
    std::array<Sequential, 3> blocks_;
};

/// Adapts trained networks to the EncoderDecoder interface: E = encoder,
/// D = U o D^phi when a task network is present, D^phi otherwise.
class NetworkCodec final : public EncoderDecoder {
public:
    NetworkCodec(std::shared_ptr<const Autoencoder> autoencoder, std::shared_ptr<const TaskNet> task = nullptr);

    Eigen::Index signal_dim() const override;
    Eigen::Index code_dim() const override { return autoencoder_->code_dim(); }

    EncodePass encode_pass(const Vector& x) const override;
    DecodePass decode_pass(const Vector& xi) const override;
    CoefficientVector encode(const Vector& x) const override;
    Vector decode(const Vector& xi) const override;
    bool smooth() const override;

    const Autoencoder& autoencoder() const { return *autoencoder_; }
    const TaskNet* task() const { return task_.get(); }

private:
    std::shared_ptr<const Autoencoder> autoencoder_;
    std::shared_ptr<const TaskNet> task_;
};

/// Binary checkpoint; see README for the layout.
void save_checkpoint(const NetworkParams& params, const std::string& path);
NetworkParams load_checkpoint(const std::string& path);
std::vector<std::uint8_t> encode_checkpoint(const NetworkParams& params);
NetworkParams decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Flattened references across several gradient sets, matching parameters() order.
std::vector<const Vector*> gradient_refs(const ModelGrads& grads);

} // namespace anett

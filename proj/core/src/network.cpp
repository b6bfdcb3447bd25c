#include "anett/network.hpp"

#include "anett/error.hpp"

#include <random>

namespace anett {

namespace {

constexpr const char* autoencoder_block_names[6] = {"enc1", "enc2", "enc3", "dec3", "dec2", "dec1"};
constexpr const char* task_block_names[3] = {"head", "down", "tail"};

void check_image_size(int n) {
    if (n < 4 || n % 4 != 0) {
        throw DimensionError("network image size must be a positive multiple of 4, got " + std::to_string(n));
    }
}

Tensor slice(const Vector& xi, Eigen::Index offset, const BlockShape& shape) {
    return Tensor(shape.channels, shape.height, shape.width, xi.segment(offset, shape.size()));
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("tensor sum: shapes differ");
    }
    return Tensor(a.channels, a.height, a.width, a.data + b.data);
}

void append_grads(ModelGrads& grads, const Sequential& block) {
    grads.push_back(block.zero_grads());
}

} // namespace

const Sequential& NetworkParams::block(const std::string& name) const {
    for (const auto& [n, seq] : blocks) {
        if (n == name) return seq;
    }
    throw ConfigError("network is missing block '" + name + "'");
}

std::vector<const Vector*> gradient_refs(const ModelGrads& grads) {
    std::vector<const Vector*> out;
    for (const auto& block : grads) {
        for (const auto& layer : block) {
            if (layer.weights.size() == 0 && layer.bias.size() == 0) continue;
            out.push_back(&layer.weights);
            out.push_back(&layer.bias);
        }
    }
    return out;
}

// ---------------------------------------------------------------- Autoencoder

Autoencoder::Autoencoder(const AutoencoderArch& arch, int image_size, std::uint64_t seed) : image_size_(image_size) {
    check_image_size(image_size);
    const auto [c1, c2, c3] = arch.channels;
    const ActivationKind act = arch.activation;
    blocks_[0] = Sequential({Layer::conv(1, c1, 1), Layer::act(act)});
    blocks_[1] = Sequential({Layer::conv(c1, c2, 2), Layer::act(act)});
    blocks_[2] = Sequential({Layer::conv(c2, c3, 2), Layer::act(act)});
    blocks_[3] = Sequential({Layer::conv_transpose(c3, c2, 2), Layer::act(act)});
    blocks_[4] = Sequential({Layer::conv_transpose(c2, c1, 2), Layer::act(act)});
    blocks_[5] = Sequential({Layer::conv(c1, 1, 1)});
    std::mt19937_64 rng(seed);
    for (auto& block : blocks_) block.initialize(rng);
}

Autoencoder Autoencoder::from_params(NetworkParams params) {
    if (params.kind != kind_tag) {
        throw ConfigError("checkpoint holds '" + params.kind + "', expected '" + kind_tag + "'");
    }
    check_image_size(params.image_size);
    Autoencoder ae;
    ae.image_size_ = params.image_size;
    for (int i = 0; i < 6; ++i) ae.blocks_[i] = params.block(autoencoder_block_names[i]);
    ae.check_layout();
    return ae;
}

NetworkParams Autoencoder::to_params() const {
    NetworkParams p;
    p.kind = kind_tag;
    p.image_size = image_size_;
    for (int i = 0; i < 6; ++i) p.blocks.emplace_back(autoencoder_block_names[i], blocks_[i]);
    return p;
}

void Autoencoder::check_layout() const {
    // Push a zero image through once; any channel mismatch throws here.
    const CoefficientVector xi = encode(Tensor(1, image_size_, image_size_));
    const Tensor out = decode(xi.values);
    if (out.channels != 1 || out.height != image_size_) {
        throw ConfigError("autoencoder blocks do not compose to an image-to-image map");
    }
}

std::vector<BlockShape> Autoencoder::code_layout() const {
    std::vector<BlockShape> layout;
    int extent = image_size_;
    for (int level = 0; level < 3; ++level) {
        const Layer& conv = blocks_[level].layers().front();
        extent = (extent + 2 * ((conv.kernel - 1) / 2) - conv.kernel) / conv.stride + 1;
        layout.push_back({conv.out_channels, extent, extent});
    }
    return layout;
}

Eigen::Index Autoencoder::code_dim() const {
    Eigen::Index n = 0;
    for (const auto& b : code_layout()) n += b.size();
    return n;
}

CoefficientVector Autoencoder::encode(const Tensor& x, EncodeTape* tape) const {
    if (x.channels != 1 || x.height != image_size_ || x.width != image_size_) {
        throw DimensionError("Autoencoder::encode: expected a 1 x " + std::to_string(image_size_) + " x " +
                             std::to_string(image_size_) + " input");
    }
    Tensor h[3];
    h[0] = blocks_[0].forward(x, tape ? &tape->level[0] : nullptr);
    h[1] = blocks_[1].forward(h[0], tape ? &tape->level[1] : nullptr);
    h[2] = blocks_[2].forward(h[1], tape ? &tape->level[2] : nullptr);
    Vector values(h[0].size() + h[1].size() + h[2].size());
    values << h[0].data, h[1].data, h[2].data;
    std::vector<BlockShape> layout;
    for (const auto& t : h) layout.push_back({t.channels, t.height, t.width});
    return CoefficientVector(std::move(values), std::move(layout));
}

Tensor Autoencoder::decode(const Vector& xi, DecodeTape* tape) const {
    const std::vector<BlockShape> layout = code_layout();
    detail::require_same_size(xi.size(), code_dim(), "Autoencoder::decode");
    const Tensor h1 = slice(xi, 0, layout[0]);
    const Tensor h2 = slice(xi, layout[0].size(), layout[1]);
    const Tensor h3 = slice(xi, layout[0].size() + layout[1].size(), layout[2]);
    const Tensor a3 = blocks_[3].forward(h3, tape ? &tape->dec3 : nullptr);
    const Tensor a2 = blocks_[4].forward(add(a3, h2), tape ? &tape->dec2 : nullptr);
    return blocks_[5].forward(add(a2, h1), tape ? &tape->dec1 : nullptr);
}

Tensor Autoencoder::encode_backward(const EncodeTape& tape, const Vector& grad_xi, ModelGrads* grads) const {
    const std::vector<BlockShape> layout = code_layout();
    detail::require_same_size(grad_xi.size(), code_dim(), "Autoencoder::encode_backward");
    const Eigen::Index o2 = layout[0].size();
    const Eigen::Index o3 = o2 + layout[1].size();
    Sequential::Grads* g[3] = {nullptr, nullptr, nullptr};
    if (grads) {
        for (int i = 0; i < 3; ++i) g[i] = &(*grads)[i];
    }
    Tensor gh3 = slice(grad_xi, o3, layout[2]);
    Tensor gh2 = blocks_[2].backward(tape.level[2], gh3, g[2]);
    gh2.data += grad_xi.segment(o2, layout[1].size());
    Tensor gh1 = blocks_[1].backward(tape.level[1], gh2, g[1]);
    gh1.data += grad_xi.segment(0, layout[0].size());
    return blocks_[0].backward(tape.level[0], gh1, g[0]);
}

Vector Autoencoder::decode_backward(const DecodeTape& tape, const Tensor& grad_out, ModelGrads* grads) const {
    Sequential::Grads* g[3] = {nullptr, nullptr, nullptr};
    if (grads) {
        for (int i = 0; i < 3; ++i) g[i] = &(*grads)[3 + i];
    }
    const Tensor g_s1 = blocks_[5].backward(tape.dec1, grad_out, g[2]);
    const Tensor g_s2 = blocks_[4].backward(tape.dec2, g_s1, g[1]);
    const Tensor g_h3 = blocks_[3].backward(tape.dec3, g_s2, g[0]);
    Vector grad_xi(g_s1.size() + g_s2.size() + g_h3.size());
    grad_xi << g_s1.data, g_s2.data, g_h3.data;
    return grad_xi;
}

ModelGrads Autoencoder::zero_grads() const {
    ModelGrads grads;
    for (const auto& block : blocks_) append_grads(grads, block);
    return grads;
}

std::vector<Vector*> Autoencoder::parameters() {
    std::vector<Vector*> out;
    for (auto& block : blocks_) {
        for (Vector* p : block.parameters()) out.push_back(p);
    }
    return out;
}

Eigen::Index Autoencoder::parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& block : blocks_) n += block.parameter_count();
    return n;
}

bool Autoencoder::smooth() const {
    for (const auto& block : blocks_) {
        if (!block.smooth()) return false;
    }
    return true;
}

// ---------------------------------------------------------------- TaskNet

TaskNet::TaskNet(const TaskNetArch& arch, int image_size, std::uint64_t seed) : image_size_(image_size) {
    check_image_size(image_size);
    const int c = arch.channels;
    const ActivationKind act = arch.activation;
    blocks_[0] = Sequential({Layer::conv(1, c, 1), Layer::act(act)});
    blocks_[1] = Sequential({Layer::downsample(), Layer::conv(c, 2 * c, 1), Layer::act(act), Layer::conv(2 * c, 2 * c, 1),
                             Layer::act(act), Layer::conv(2 * c, c, 1), Layer::act(act), Layer::upsample()});
    blocks_[2] = Sequential({Layer::conv(c, c, 1), Layer::act(act), Layer::conv(c, 1, 1)});
    std::mt19937_64 rng(seed);
    for (auto& block : blocks_) block.initialize(rng);
    // Start as the identity map: the residual branch is switched off.
    blocks_[2].layers().back().weights.setZero();
}

TaskNet TaskNet::from_params(NetworkParams params) {
    if (params.kind != kind_tag) {
        throw ConfigError("checkpoint holds '" + params.kind + "', expected '" + kind_tag + "'");
    }
    check_image_size(params.image_size);
    TaskNet net;
    net.image_size_ = params.image_size;
    for (int i = 0; i < 3; ++i) net.blocks_[i] = params.block(task_block_names[i]);
    const Tensor probe = net.forward(Tensor(1, net.image_size_, net.image_size_));
    if (probe.channels != 1) {
        throw ConfigError("task network blocks do not compose to an image-to-image map");
    }
    return net;
}

NetworkParams TaskNet::to_params() const {
    NetworkParams p;
    p.kind = kind_tag;
    p.image_size = image_size_;
    for (int i = 0; i < 3; ++i) p.blocks.emplace_back(task_block_names[i], blocks_[i]);
    return p;
}

Tensor TaskNet::forward(const Tensor& z, Tape* tape) const {
    if (z.channels != 1 || z.height != image_size_ || z.width != image_size_) {
        throw DimensionError("TaskNet::forward: input shape does not match the network");
    }
    const Tensor f1 = blocks_[0].forward(z, tape ? &tape->head : nullptr);
    const Tensor f2 = blocks_[1].forward(f1, tape ? &tape->down : nullptr);
    Tensor out = blocks_[2].forward(add(f1, f2), tape ? &tape->tail : nullptr);
    out.data += z.data;
    return out;
}

Tensor TaskNet::backward(const Tape& tape, const Tensor& grad_out, ModelGrads* grads) const {
    Sequential::Grads* g[3] = {nullptr, nullptr, nullptr};
    if (grads) {
        for (int i = 0; i < 3; ++i) g[i] = &(*grads)[i];
    }
    const Tensor g_sum = blocks_[2].backward(tape.tail, grad_out, g[2]);
    Tensor g_f1 = blocks_[1].backward(tape.down, g_sum, g[1]);
    g_f1.data += g_sum.data;
    Tensor g_z = blocks_[0].backward(tape.head, g_f1, g[0]);
    g_z.data += grad_out.data;
    return g_z;
}

ModelGrads TaskNet::zero_grads() const {
    ModelGrads grads;
    for (const auto& block : blocks_) append_grads(grads, block);
    return grads;
}

std::vector<Vector*> TaskNet::parameters() {
    std::vector<Vector*> out;
    for (auto& block : blocks_) {
        for (Vector* p : block.parameters()) out.push_back(p);
    }
    return out;
}

bool TaskNet::smooth() const {
    for (const auto& block : blocks_) {
        if (!block.smooth()) return false;
    }
    return true;
}

// ---------------------------------------------------------------- NetworkCodec

NetworkCodec::NetworkCodec(std::shared_ptr<const Autoencoder> autoencoder, std::shared_ptr<const TaskNet> task)
    : autoencoder_(std::move(autoencoder)), task_(std::move(task)) {
    if (!autoencoder_) {
        throw DomainError("NetworkCodec: autoencoder is required");
    }
    if (task_ && task_->image_size() != autoencoder_->image_size()) {
        throw DimensionError("NetworkCodec: task network and autoencoder image sizes differ");
    }
}

Eigen::Index NetworkCodec::signal_dim() const {
    const Eigen::Index n = autoencoder_->image_size();
    return n * n;
}

CoefficientVector NetworkCodec::encode(const Vector& x) const {
    detail::require_same_size(x.size(), signal_dim(), "NetworkCodec::encode");
    const int n = autoencoder_->image_size();
    return autoencoder_->encode(Tensor(1, n, n, x));
}

Vector NetworkCodec::decode(const Vector& xi) const {
    Tensor out = autoencoder_->decode(xi);
    if (task_) out = task_->forward(out);
    return out.data;
}

EncoderDecoder::EncodePass NetworkCodec::encode_pass(const Vector& x) const {
    detail::require_same_size(x.size(), signal_dim(), "NetworkCodec::encode");
    const int n = autoencoder_->image_size();
    auto tape = std::make_shared<Autoencoder::EncodeTape>();
    CoefficientVector xi = autoencoder_->encode(Tensor(1, n, n, x), tape.get());
    auto ae = autoencoder_;
    return {std::move(xi), [ae, tape](const Vector& g) { return ae->encode_backward(*tape, g, nullptr).data; }};
}

EncoderDecoder::DecodePass NetworkCodec::decode_pass(const Vector& xi) const {
    auto dtape = std::make_shared<Autoencoder::DecodeTape>();
    Tensor mid = autoencoder_->decode(xi, dtape.get());
    auto ae = autoencoder_;
    if (!task_) {
        const int n = mid.height;
        return {mid.data, [ae, dtape, n](const Vector& g) {
                    return ae->decode_backward(*dtape, Tensor(1, n, n, g), nullptr);
                }};
    }
    auto ttape = std::make_shared<TaskNet::Tape>();
    Tensor out = task_->forward(mid, ttape.get());
    auto task = task_;
    const int n = out.height;
    return {out.data, [ae, task, dtape, ttape, n](const Vector& g) {
                const Tensor g_mid = task->backward(*ttape, Tensor(1, n, n, g), nullptr);
                return ae->decode_backward(*dtape, g_mid, nullptr);
            }};
}

bool NetworkCodec::smooth() const {
    return autoencoder_->smooth() && (!task_ || task_->smooth());
}

} // namespace anett

#include "anett/error.hpp"
#include "anett/network.hpp"
#include "anett/regularizer.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

using namespace anett;
using anett::testing::random_vector;

namespace {

Tensor random_tensor(int c, int h, int w, std::uint64_t seed) {
    return Tensor(c, h, w, random_vector(static_cast<Eigen::Index>(c) * h * w, seed));
}

Autoencoder small_autoencoder(ActivationKind act, std::uint64_t seed, int n = 8) {
    AutoencoderArch arch;
    arch.channels = {2, 3, 4};
    arch.activation = act;
    Autoencoder ae(arch, n, seed);
    // Nonzero biases so every code path is exercised.
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> g(0.0, 0.1);
    for (auto& block : ae.blocks()) {
        for (auto& layer : block.layers()) {
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = g(rng);
        }
    }
    return ae;
}

// Relative error of a directional derivative against central differences.
double directional_check(const std::function<double(const Vector&)>& f, const Vector& x, const Vector& grad,
                         std::uint64_t seed) {
    const Vector d = random_vector(x.size(), seed).normalized();
    const double fd = anett::testing::directional_fd(f, x, d, 1e-5);
    return anett::testing::relative_error(fd, grad.dot(d));
}

double flat_inner(const Tensor& a, const Tensor& b) { return a.data.dot(b.data); }

} // namespace

TEST(Layer, ConvOutputShape) {
    const Layer c1 = Layer::conv(2, 5, 1);
    const Layer c2 = Layer::conv(2, 5, 2);
    const Tensor x = random_tensor(2, 8, 8, 1);
    const Tensor y1 = c1.forward(x), y2 = c2.forward(x);
    EXPECT_EQ(y1.channels, 5);
    EXPECT_EQ(y1.height, 8);
    EXPECT_EQ(y2.height, 4);
    EXPECT_EQ(y2.width, 4);
    EXPECT_EQ(Layer::conv_transpose(5, 2, 2).forward(y2).height, 8);
    EXPECT_THROW(c1.forward(random_tensor(3, 8, 8, 2)), DimensionError);
}

TEST(Layer, ConvBackwardIsTransposeForLinearMaps) {
    std::mt19937_64 rng(3);
    for (int stride : {1, 2}) {
        Layer conv = Layer::conv(2, 3, stride);
        Sequential(std::vector<Layer>{conv}).initialize(rng);
        conv.weights = random_vector(conv.weights.size(), 4 + stride);
        const Tensor x = random_tensor(2, 8, 8, 5);
        const Tensor y = conv.forward(x);
        const Tensor v = random_tensor(y.channels, y.height, y.width, 6);
        const Tensor back = conv.backward(x, v, nullptr, nullptr);
        EXPECT_NEAR(flat_inner(y, v), flat_inner(x, back), 1e-12 * std::abs(flat_inner(y, v)));
    }
}

TEST(Layer, TransposedConvIsAdjointOfStridedConv) {
    Layer conv = Layer::conv(2, 3, 2);
    conv.weights = random_vector(conv.weights.size(), 7);
    Layer convt = Layer::conv_transpose(3, 2, 2);
    convt.weights = conv.weights;
    const Tensor x = random_tensor(2, 8, 8, 8);
    const Tensor v = random_tensor(3, 4, 4, 9);
    EXPECT_NEAR(flat_inner(conv.forward(x), v), flat_inner(x, convt.forward(v)), 1e-12);
}

TEST(Layer, PoolingPairIsAdjoint) {
    const Tensor x = random_tensor(2, 6, 6, 10);
    const Tensor v = random_tensor(2, 3, 3, 11);
    const Layer down = Layer::downsample(), up = Layer::upsample();
    EXPECT_NEAR(flat_inner(down.forward(x), v), 0.25 * flat_inner(x, up.forward(v)), 1e-13);
    EXPECT_THROW(down.forward(random_tensor(1, 5, 5, 1)), DimensionError);
}

TEST(Layer, ActivationValues) {
    Tensor x(1, 1, 3);
    x.data << -2.0, 0.0, 3.0;
    const Tensor relu = Layer::act(ActivationKind::relu).forward(x);
    const Tensor leaky = Layer::act(ActivationKind::leaky_relu).forward(x);
    const Tensor soft = Layer::act(ActivationKind::softplus).forward(x);
    EXPECT_DOUBLE_EQ(relu.data[0], 0.0);
    EXPECT_DOUBLE_EQ(relu.data[2], 3.0);
    EXPECT_DOUBLE_EQ(leaky.data[0], -2.0 * leaky_slope);
    EXPECT_DOUBLE_EQ(soft.data[1], 0.0);
    EXPECT_NEAR(soft.data[2], std::log1p(std::exp(3.0)) - std::log(2.0), 1e-14);
    EXPECT_EQ(parse_activation("softplus"), ActivationKind::softplus);
    EXPECT_EQ(to_string(ActivationKind::leaky_relu), "leaky_relu");
    EXPECT_THROW(parse_activation("tanh"), ConfigError);
}

TEST(Autoencoder, CodeLayout) {
    const Autoencoder ae = small_autoencoder(ActivationKind::softplus, 1, 8);
    const auto layout = ae.code_layout();
    ASSERT_EQ(layout.size(), 3U);
    EXPECT_EQ(layout[0], (BlockShape{2, 8, 8}));
    EXPECT_EQ(layout[1], (BlockShape{3, 4, 4}));
    EXPECT_EQ(layout[2], (BlockShape{4, 2, 2}));
    EXPECT_EQ(ae.code_dim(), 128 + 48 + 16);
    EXPECT_THROW(Autoencoder(AutoencoderArch{}, 10, 0), DimensionError);
}

TEST(Autoencoder, ZeroInputGivesZeroOutputWithZeroBiases) {
    for (ActivationKind act : {ActivationKind::relu, ActivationKind::leaky_relu, ActivationKind::softplus}) {
        const Autoencoder ae(AutoencoderArch{{2, 3, 4}, act}, 8, 5);
        const CoefficientVector xi = ae.encode(Tensor(1, 8, 8));
        EXPECT_EQ(xi.values.cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(ae.decode(xi.values).data.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Autoencoder, DeterministicInitializationAndForward) {
    const Autoencoder a(AutoencoderArch{{2, 3, 4}, ActivationKind::leaky_relu}, 8, 42);
    const Autoencoder b(AutoencoderArch{{2, 3, 4}, ActivationKind::leaky_relu}, 8, 42);
    const Autoencoder c(AutoencoderArch{{2, 3, 4}, ActivationKind::leaky_relu}, 8, 43);
    const Tensor x = random_tensor(1, 8, 8, 3);
    const Vector ya = a.decode(a.encode(x).values).data;
    const Vector yb = b.decode(b.encode(x).values).data;
    EXPECT_EQ(std::memcmp(ya.data(), yb.data(), sizeof(double) * ya.size()), 0);
    EXPECT_GT((ya - c.decode(c.encode(x).values).data).norm(), 0.0);
}

TEST(Autoencoder, EncoderInputGradient) {
    const Autoencoder ae = small_autoencoder(ActivationKind::softplus, 11);
    const Vector x = random_vector(64, 12);
    const Vector w = random_vector(ae.code_dim(), 13);
    auto f = [&](const Vector& z) { return w.dot(ae.encode(Tensor(1, 8, 8, z)).values); };
    Autoencoder::EncodeTape tape;
    ae.encode(Tensor(1, 8, 8, x), &tape);
    const Vector g = ae.encode_backward(tape, w, nullptr).data;
    for (std::uint64_t s = 0; s < 5; ++s) EXPECT_LT(directional_check(f, x, g, 100 + s), 1e-4);
}

TEST(Autoencoder, DecoderInputGradient) {
    const Autoencoder ae = small_autoencoder(ActivationKind::softplus, 14);
    const Vector xi = random_vector(ae.code_dim(), 15);
    const Vector w = random_vector(64, 16);
    auto f = [&](const Vector& z) { return w.dot(ae.decode(z).data); };
    Autoencoder::DecodeTape tape;
    ae.decode(xi, &tape);
    const Vector g = ae.decode_backward(tape, Tensor(1, 8, 8, w), nullptr);
    for (std::uint64_t s = 0; s < 5; ++s) EXPECT_LT(directional_check(f, xi, g, 200 + s), 1e-4);
}

TEST(Autoencoder, ParameterGradient) {
    Autoencoder ae = small_autoencoder(ActivationKind::softplus, 17);
    const Tensor x = random_tensor(1, 8, 8, 18);
    const Vector target = random_vector(64, 19);
    auto loss = [&](const Autoencoder& net) {
        return 0.5 * (net.decode(net.encode(x).values).data - target).squaredNorm();
    };
    Autoencoder::EncodeTape etape;
    Autoencoder::DecodeTape dtape;
    const CoefficientVector xi = ae.encode(x, &etape);
    const Tensor out = ae.decode(xi.values, &dtape);
    ModelGrads grads = ae.zero_grads();
    const Vector gxi = ae.decode_backward(dtape, Tensor(1, 8, 8, out.data - target), &grads);
    ae.encode_backward(etape, gxi, &grads);

    const auto params = ae.parameters();
    const auto grad_refs = gradient_refs(grads);
    ASSERT_EQ(params.size(), grad_refs.size());
    Eigen::Index total = 0;
    for (const Vector* p : params) total += p->size();
    EXPECT_EQ(total, ae.parameter_count());

    std::mt19937_64 rng(20);
    std::normal_distribution<double> g;
    for (int probe = 0; probe < 5; ++probe) {
        std::vector<Vector> dirs;
        double analytic = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            Vector d(params[i]->size());
            for (Eigen::Index j = 0; j < d.size(); ++j) d[j] = g(rng);
            analytic += grad_refs[i]->dot(d);
            dirs.push_back(std::move(d));
        }
        const double h = 1e-6;
        auto shifted = [&](double s) {
            Autoencoder copy = ae;
            auto cp = copy.parameters();
            for (std::size_t i = 0; i < cp.size(); ++i) *cp[i] += s * dirs[i];
            return loss(copy);
        };
        const double fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        EXPECT_LT(anett::testing::relative_error(fd, analytic), 1e-4) << "probe " << probe;
    }
}

TEST(TaskNet, StartsAsIdentity) {
    const TaskNet u(TaskNetArch{4, ActivationKind::leaky_relu}, 8, 3);
    const Tensor z = random_tensor(1, 8, 8, 21);
    EXPECT_LT((u.forward(z).data - z.data).norm(), 1e-15);
}

TEST(TaskNet, InputGradient) {
    TaskNet u(TaskNetArch{3, ActivationKind::softplus}, 8, 4);
    // Move away from the zero-initialized tail.
    for (auto* p : u.parameters()) *p += 0.1 * random_vector(p->size(), p->size());
    const Vector z = random_vector(64, 22);
    const Vector w = random_vector(64, 23);
    auto f = [&](const Vector& v) { return w.dot(u.forward(Tensor(1, 8, 8, v)).data); };
    TaskNet::Tape tape;
    u.forward(Tensor(1, 8, 8, z), &tape);
    const Vector g = u.backward(tape, Tensor(1, 8, 8, w), nullptr).data;
    for (std::uint64_t s = 0; s < 5; ++s) EXPECT_LT(directional_check(f, z, g, 300 + s), 1e-4);
}

TEST(NetworkCodec, FullRegularizerGradient) {
    auto ae = std::make_shared<Autoencoder>(small_autoencoder(ActivationKind::softplus, 24));
    auto task = std::make_shared<TaskNet>(TaskNetArch{3, ActivationKind::softplus}, 8, 25);
    for (auto* p : task->parameters()) *p += 0.1 * random_vector(p->size(), 26);
    for (auto t : {std::shared_ptr<TaskNet>(), task}) {
        const AnettRegularizer reg(std::make_shared<NetworkCodec>(ae, t), PhiSpec{1.0, {}, 1e-2}, 10.0);
        ASSERT_TRUE(reg.differentiable());
        const Vector x = random_vector(64, 27);
        const Vector g = reg.gradient(x);
        for (std::uint64_t s = 0; s < 5; ++s) {
            EXPECT_LT(directional_check([&](const Vector& v) { return reg.value(v); }, x, g, 400 + s), 1e-4);
        }
    }
}

TEST(NetworkCodec, ReluIsNotSmooth) {
    auto ae = std::make_shared<Autoencoder>(AutoencoderArch{{2, 2, 2}, ActivationKind::relu}, 8, 1);
    EXPECT_FALSE(NetworkCodec(ae).smooth());
    EXPECT_THROW(NetworkCodec(nullptr), DomainError);
    auto u = std::make_shared<TaskNet>(TaskNetArch{2, ActivationKind::relu}, 12, 1);
    EXPECT_THROW(NetworkCodec(ae, u), DimensionError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    const Autoencoder ae = small_autoencoder(ActivationKind::leaky_relu, 30);
    const NetworkParams params = ae.to_params();
    const auto bytes = encode_checkpoint(params);
    const Autoencoder back = Autoencoder::from_params(decode_checkpoint(bytes));
    EXPECT_EQ(encode_checkpoint(back.to_params()), bytes);
    const Tensor x = random_tensor(1, 8, 8, 31);
    const Vector a = ae.decode(ae.encode(x).values).data;
    const Vector b = back.decode(back.encode(x).values).data;
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);

    const auto path = std::filesystem::temp_directory_path() / "anett_ckpt_roundtrip.bin";
    const TaskNet u(TaskNetArch{2, ActivationKind::softplus}, 8, 32);
    save_checkpoint(u.to_params(), path.string());
    const TaskNet u2 = TaskNet::from_params(load_checkpoint(path.string()));
    EXPECT_EQ(encode_checkpoint(u2.to_params()), encode_checkpoint(u.to_params()));
    std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsCorruptInput) {
    auto bytes = encode_checkpoint(small_autoencoder(ActivationKind::softplus, 33).to_params());
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad_magic), ConfigError);
    auto truncated = bytes;
    truncated.resize(bytes.size() / 2);
    EXPECT_THROW(decode_checkpoint(truncated), ConfigError);
    EXPECT_THROW(load_checkpoint("/nonexistent/dir/model.bin"), IoError);
    // An autoencoder checkpoint is not a task network.
    EXPECT_THROW(TaskNet::from_params(decode_checkpoint(bytes)), ConfigError);
}

#include "anett/train.hpp"

#include "anett/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace anett {

namespace {

constexpr std::uint64_t validation_salt = 0x5eed0001;
constexpr std::uint64_t training_eval_salt = 0x5eed0002;

// Deterministic per-sample stream for the fixed evaluation corruptions.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t salt, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

struct Corruption {
    bool corrupted = false;
    Vector eps;
};

Corruption draw_corruption(std::mt19937_64& rng, const Image& x, const TrainConfig& cfg) {
    Corruption c;
    c.corrupted = std::bernoulli_distribution(cfg.corruption_probability)(rng);
    if (c.corrupted) {
        const double sigma = cfg.noise_factor * x.pixels.mean();
        std::normal_distribution<double> normal(0.0, 1.0);
        c.eps.resize(x.pixels.size());
        for (Eigen::Index i = 0; i < c.eps.size(); ++i) c.eps[i] = sigma * normal(rng);
    }
    return c;
}

double squared_norm(const std::vector<Vector*>& params) {
    double s = 0.0;
    for (const Vector* p : params) s += p->squaredNorm();
    return s;
}

// grads /= batch, then grads += 2 decay theta.
void finish_gradients(ModelGrads& grads, const std::vector<Vector*>& params, int batch, double decay) {
    const double scale = 1.0 / batch;
    std::size_t k = 0;
    for (auto& block : grads) {
        for (auto& layer : block) {
            if (layer.weights.size() == 0 && layer.bias.size() == 0) continue;
            layer.weights = scale * layer.weights + 2.0 * decay * *params[k];
            layer.bias = scale * layer.bias + 2.0 * decay * *params[k + 1];
            k += 2;
        }
    }
}

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(nu >= 0.0) || !(weight_decay >= 0.0) || !(noise_factor >= 0.0)) {
        throw ConfigError("nu, weight decay and noise factor must be nonnegative");
    }
    if (!(corruption_probability >= 0.0 && corruption_probability <= 1.0)) {
        throw ConfigError("corruption probability must lie in [0, 1]");
    }
}

void adam_step(AdamState& state, const std::vector<Vector*>& params, const std::vector<const Vector*>& grads,
               double lr) {
    if (params.size() != grads.size()) {
        throw DimensionError("adam_step: parameter and gradient counts differ");
    }
    if (state.m.empty()) {
        for (const Vector* p : params) {
            state.m.push_back(Vector::Zero(p->size()));
            state.v.push_back(Vector::Zero(p->size()));
        }
    }
    if (state.m.size() != params.size()) {
        throw DimensionError("adam_step: state does not match the parameter set");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        detail::require_same_size(params[k]->size(), grads[k]->size(), "adam_step");
        const Vector& g = *grads[k];
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g.cwiseAbs2();
        const auto m_hat = state.m[k].array() / c1;
        const auto v_hat = state.v[k].array() / c2;
        params[k]->array() -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
}

double cosine_learning_rate(double eta0, int t, int total) {
    if (total < 1) throw DomainError("cosine_learning_rate: total must be positive");
    return 0.5 * eta0 * (1.0 + std::cos(std::numbers::pi * t / total));
}

SampleLoss autoencoder_sample_loss(const Autoencoder& ae, const Image& x, bool corrupted, const Vector& eps,
                                   double nu, const PhiSpec& phi, ModelGrads* grads) {
    Tensor input = Tensor::from_image(x);
    if (corrupted) {
        detail::require_same_size(eps.size(), input.size(), "autoencoder_sample_loss");
        input.data += eps;
    }
    Autoencoder::EncodeTape etape;
    Autoencoder::DecodeTape dtape;
    const bool need_tape = grads != nullptr;
    const CoefficientVector xi = ae.encode(input, need_tape ? &etape : nullptr);
    const Tensor out = ae.decode(xi.values, need_tape ? &dtape : nullptr);
    const Vector residual = out.data - x.pixels;

    SampleLoss loss;
    loss.reconstruction = residual.squaredNorm();
    // The penalty is applied to clean samples only, where E(x) is the pass above.
    const bool penalized = !corrupted && nu > 0.0;
    if (penalized) loss.penalty = nu * phi_eval(phi, xi.values);

    if (grads) {
        const Tensor g_out(1, out.height, out.width, 2.0 * residual);
        Vector g_xi = ae.decode_backward(dtape, g_out, grads);
        if (penalized) g_xi += nu * phi_grad(phi, xi.values);
        ae.encode_backward(etape, g_xi, grads);
    }
    return loss;
}

Autoencoder train_autoencoder(const Dataset& data, const TrainConfig& cfg, const PhiSpec& phi,
                              const AutoencoderArch& arch, TrainReport* report, const EpochCallback& on_epoch) {
    cfg.validate();
    const std::vector<Image> train = data.subset(Split::train);
    if (train.empty()) throw DomainError("train_autoencoder: empty training split");
    std::vector<Image> val = data.subset(Split::validation);
    if (val.empty()) val = train;
    const int n = train.front().size;

    std::mt19937_64 rng(cfg.seed);
    Autoencoder ae(arch, n, rng());

    auto objective = [&](const std::vector<Image>& set, std::uint64_t salt) {
        double total = 0.0;
        for (std::size_t i = 0; i < set.size(); ++i) {
            auto stream = sample_stream(cfg.seed, salt, i);
            const Corruption c = draw_corruption(stream, set[i], cfg);
            total += autoencoder_sample_loss(ae, set[i], c.corrupted, c.eps, cfg.nu, phi).total();
        }
        return total / static_cast<double>(set.size()) + cfg.weight_decay * squared_norm(ae.parameters());
    };

    TrainReport local;
    TrainReport& rep = report ? *report : local;
    rep = TrainReport{};
    rep.initial_loss = objective(train, training_eval_salt);
    Autoencoder best = ae;
    rep.best_validation_loss = std::numeric_limits<double>::infinity();

    AdamState adam;
    std::size_t draws = 0;
    std::size_t corrupted = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_learning_rate(cfg.learning_rate, epoch, cfg.epochs);
        const std::vector<std::size_t> order = shuffled(train.size(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            ModelGrads grads = ae.zero_grads();
            for (std::size_t b = start; b < stop; ++b) {
                const Image& x = train[order[b]];
                const Corruption c = draw_corruption(rng, x, cfg);
                ++draws;
                corrupted += c.corrupted ? 1 : 0;
                autoencoder_sample_loss(ae, x, c.corrupted, c.eps, cfg.nu, phi, &grads);
            }
            auto params = ae.parameters();
            finish_gradients(grads, params, static_cast<int>(stop - start), cfg.weight_decay);
            adam_step(adam, params, gradient_refs(grads), lr);
        }
        const double train_loss = objective(train, training_eval_salt);
        const double val_loss = objective(val, validation_salt);
        if (!std::isfinite(train_loss)) throw DomainError("train_autoencoder: loss became non-finite");
        rep.train_loss.push_back(train_loss);
        rep.validation_loss.push_back(val_loss);
        if (val_loss < rep.best_validation_loss) {
            rep.best_validation_loss = val_loss;
            rep.best_epoch = epoch;
            best = ae;
        }
        if (on_epoch) on_epoch(epoch, train_loss, val_loss);
    }
    rep.artifact_fraction = draws ? static_cast<double>(corrupted) / static_cast<double>(draws) : 0.0;
    return best;
}

Tensor task_network_input(const Autoencoder& ae, const LinearOperator& op, const NoiseModel& noise, const Image& x,
                          bool artifact, std::uint64_t seed) {
    const int n = x.size;
    Vector source = x.pixels;
    if (artifact) {
        detail::require_same_size(op.domain_dim(), x.pixels.size(), "task_network_input");
        source = op.approximate_inverse(noise.apply(op.apply(x.pixels), seed));
    }
    return ae.decode(ae.encode(Tensor(1, n, n, std::move(source))).values);
}

TaskNet train_task_network(const Dataset& data, const Autoencoder& ae, const LinearOperator& op,
                           const NoiseModel& noise, const TrainConfig& cfg, const TaskNetArch& arch,
                           TrainReport* report, const EpochCallback& on_epoch) {
    cfg.validate();
    const std::vector<Image> train = data.subset(Split::train);
    if (train.empty()) throw DomainError("train_task_network: empty training split");
    std::vector<Image> val = data.subset(Split::validation);
    if (val.empty()) val = train;

    std::mt19937_64 rng(cfg.seed);
    TaskNet net(arch, ae.image_size(), rng());

    // Fixed evaluation inputs, drawn once.
    auto fixed_inputs = [&](const std::vector<Image>& set, std::uint64_t salt) {
        std::vector<Tensor> inputs;
        for (std::size_t i = 0; i < set.size(); ++i) {
            auto stream = sample_stream(cfg.seed, salt, i);
            const bool artifact = std::bernoulli_distribution(cfg.corruption_probability)(stream);
            inputs.push_back(task_network_input(ae, op, noise, set[i], artifact, stream()));
        }
        return inputs;
    };
    const std::vector<Tensor> train_eval = fixed_inputs(train, training_eval_salt);
    const std::vector<Tensor> val_eval = fixed_inputs(val, validation_salt);

    auto objective = [&](const std::vector<Image>& set, const std::vector<Tensor>& inputs) {
        double total = 0.0;
        for (std::size_t i = 0; i < set.size(); ++i) {
            total += (net.forward(inputs[i]).data - set[i].pixels).squaredNorm();
        }
        return total / static_cast<double>(set.size()) + cfg.weight_decay * squared_norm(net.parameters());
    };

    TrainReport local;
    TrainReport& rep = report ? *report : local;
    rep = TrainReport{};
    rep.initial_loss = objective(train, train_eval);
    TaskNet best = net;
    rep.best_validation_loss = std::numeric_limits<double>::infinity();

    AdamState adam;
    std::size_t draws = 0;
    std::size_t artifacts = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_learning_rate(cfg.learning_rate, epoch, cfg.epochs);
        const std::vector<std::size_t> order = shuffled(train.size(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            ModelGrads grads = net.zero_grads();
            for (std::size_t b = start; b < stop; ++b) {
                const Image& x = train[order[b]];
                const bool artifact = std::bernoulli_distribution(cfg.corruption_probability)(rng);
                ++draws;
                artifacts += artifact ? 1 : 0;
                const Tensor z = task_network_input(ae, op, noise, x, artifact, rng());
                TaskNet::Tape tape;
                const Tensor out = net.forward(z, &tape);
                net.backward(tape, Tensor(1, out.height, out.width, 2.0 * (out.data - x.pixels)), &grads);
            }
            auto params = net.parameters();
            finish_gradients(grads, params, static_cast<int>(stop - start), cfg.weight_decay);
            adam_step(adam, params, gradient_refs(grads), lr);
        }
        const double train_loss = objective(train, train_eval);
        const double val_loss = objective(val, val_eval);
        if (!std::isfinite(train_loss)) throw DomainError("train_task_network: loss became non-finite");
        rep.train_loss.push_back(train_loss);
        rep.validation_loss.push_back(val_loss);
        if (val_loss < rep.best_validation_loss) {
            rep.best_validation_loss = val_loss;
            rep.best_epoch = epoch;
            best = net;
        }
        if (on_epoch) on_epoch(epoch, train_loss, val_loss);
    }
    rep.artifact_fraction = draws ? static_cast<double>(artifacts) / static_cast<double>(draws) : 0.0;
    return best;
}

} // namespace anett

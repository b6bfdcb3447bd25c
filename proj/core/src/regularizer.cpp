#include "anett/regularizer.hpp"

#include "anett/error.hpp"

#include <cmath>
#include <string>

namespace anett {

void PhiSpec::validate(Eigen::Index n) const {
    if (!(q >= 1.0 && q <= 2.0)) {
        throw DomainError("phi: exponent q must lie in [1, 2]");
    }
    if (!(mu >= 0.0)) {
        throw DomainError("phi: smoothing radius must be nonnegative");
    }
    if (weights.size() != 0) {
        detail::require_same_size(weights.size(), n, "phi weights");
        if (!(weights.minCoeff() > 0.0)) {
            throw DomainError("phi: weights must be positive");
        }
    }
}

CoefficientVector::CoefficientVector(Vector v, std::vector<BlockShape> b) : values(std::move(v)), blocks(std::move(b)) {
    Eigen::Index total = 0;
    for (const auto& block : blocks) total += block.size();
    detail::require_same_size(total, values.size(), "CoefficientVector blocks");
}

namespace {

// |t|^q with the matched quadratic inside |t| <= mu.
double phi_entry(double t, double q, double mu) {
    const double a = std::abs(t);
    if (mu > 0.0 && a <= mu) {
        const double curvature = 0.5 * q * std::pow(mu, q - 2.0);
        return std::pow(mu, q) * (1.0 - 0.5 * q) + curvature * t * t;
    }
    return q == 1.0 ? a : std::pow(a, q);
}

double phi_entry_derivative(double t, double q, double mu) {
    const double a = std::abs(t);
    if (mu > 0.0 && a <= mu) {
        return q * std::pow(mu, q - 2.0) * t;
    }
    if (t == 0.0) {
        return 0.0;
    }
    const double sign = t > 0.0 ? 1.0 : -1.0;
    return q == 1.0 ? sign : q * std::pow(a, q - 1.0) * sign;
}

} // namespace

double phi_eval(const PhiSpec& spec, const Vector& xi) {
    spec.validate(xi.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        total += spec.weight(i) * phi_entry(xi[i], spec.q, spec.mu);
    }
    return total;
}

Vector phi_grad(const PhiSpec& spec, const Vector& xi) {
    spec.validate(xi.size());
    Vector g(xi.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        g[i] = spec.weight(i) * phi_entry_derivative(xi[i], spec.q, spec.mu);
    }
    return g;
}

Vector prox_phi(const PhiSpec& spec, const Vector& xi, double tau) {
    spec.validate(xi.size());
    if (!(tau > 0.0)) {
        throw DomainError("prox_phi: tau must be positive");
    }
    if (spec.mu != 0.0) {
        throw UnsupportedError("prox_phi: smoothed penalties have no closed-form prox here");
    }
    Vector z(xi.size());
    if (spec.q == 1.0) {
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
            const double threshold = tau * spec.weight(i);
            const double a = std::abs(xi[i]) - threshold;
            z[i] = a > 0.0 ? std::copysign(a, xi[i]) : 0.0;
        }
    } else if (spec.q == 2.0) {
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
            z[i] = xi[i] / (1.0 + 2.0 * tau * spec.weight(i));
        }
    } else {
        throw UnsupportedError("prox_phi: only q = 1 and q = 2 are supported");
    }
    return z;
}

EncoderDecoder::EncodePass IdentityCodec::encode_pass(const Vector& x) const {
    detail::require_same_size(x.size(), n_, "IdentityCodec::encode");
    return {CoefficientVector(x), [](const Vector& g) { return g; }};
}

EncoderDecoder::DecodePass IdentityCodec::decode_pass(const Vector& xi) const {
    detail::require_same_size(xi.size(), n_, "IdentityCodec::decode");
    return {xi, [](const Vector& g) { return g; }};
}

LinearCodec::LinearCodec(Matrix encoder, Matrix decoder) : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
    if (decoder_.rows() != encoder_.cols() || decoder_.cols() != encoder_.rows()) {
        throw DimensionError("LinearCodec: encoder is m x n, decoder must be n x m");
    }
}

EncoderDecoder::EncodePass LinearCodec::encode_pass(const Vector& x) const {
    detail::require_same_size(x.size(), encoder_.cols(), "LinearCodec::encode");
    return {CoefficientVector(encoder_ * x), [this](const Vector& g) -> Vector { return encoder_.transpose() * g; }};
}

EncoderDecoder::DecodePass LinearCodec::decode_pass(const Vector& xi) const {
    detail::require_same_size(xi.size(), decoder_.cols(), "LinearCodec::decode");
    return {decoder_ * xi, [this](const Vector& g) -> Vector { return decoder_.transpose() * g; }};
}

AnettRegularizer::AnettRegularizer(std::shared_ptr<const EncoderDecoder> codec, PhiSpec phi, double c)
    : codec_(std::move(codec)), phi_(std::move(phi)), c_(c) {
    if (!codec_) {
        throw DomainError("AnettRegularizer: null encoder-decoder");
    }
    if (!(c_ > 0.0)) {
        throw DomainError("AnettRegularizer: c must be positive");
    }
}

double AnettRegularizer::value(const Vector& x) const {
    const CoefficientVector xi = codec_->encode(x);
    const Vector residual = x - codec_->decode(xi.values);
    return phi_eval(phi_, xi.values) + 0.5 * c_ * residual.squaredNorm();
}

Vector AnettRegularizer::gradient(const Vector& x) const {
    const auto enc = codec_->encode_pass(x);
    const auto dec = codec_->decode_pass(enc.value.values);
    const Vector residual = x - dec.value;
    // grad = J_E^T phi'(xi) + c (r - J_E^T J_D^T r)
    const Vector upstream = phi_grad(phi_, enc.value.values) - c_ * dec.pullback(residual);
    return c_ * residual + enc.pullback(upstream);
}

Vector AnettRegularizer::autoencode(const Vector& x) const {
    return codec_->decode(codec_->encode(x).values);
}

double anett_reg(const EncoderDecoder& codec, const PhiSpec& phi, double c, const Image& x) {
    detail::require_same_size(x.pixels.size(), codec.signal_dim(), "anett_reg");
    const CoefficientVector xi = codec.encode(x.pixels);
    const Vector residual = x.pixels - codec.decode(xi.values);
    return phi_eval(phi, xi.values) + 0.5 * c * residual.squaredNorm();
}

void AnettConfig::validate() const {
    if (!(alpha > 0.0) || !(c > 0.0) || !(gamma > 0.0) || !(rho >= 0.0)) {
        throw DomainError("AnettConfig: alpha, c, gamma must be positive and rho nonnegative");
    }
    if (n_iter < 1 || inner_max_iters < 1) {
        throw DomainError("AnettConfig: iteration counts must be >= 1");
    }
    if (!(inner_tol >= 0.0)) {
        throw DomainError("AnettConfig: inner tolerance must be nonnegative");
    }
    similarity.validate();
}

AnettConfig AnettConfig::sparse_view() {
    AnettConfig cfg;
    cfg.alpha = 1e-4;
    cfg.c = 1e2;
    cfg.gamma = 5e-1;
    cfg.n_iter = 50;
    cfg.similarity = SimilaritySpec::l2sq();
    return cfg;
}

AnettConfig AnettConfig::low_dose() {
    AnettConfig cfg;
    cfg.alpha = 5e-3;
    cfg.c = 1e2;
    cfg.gamma = 1e-3;
    cfg.n_iter = 20;
    cfg.similarity = SimilaritySpec::kl();
    return cfg;
}

AnettConfig AnettConfig::universality() {
    return sparse_view();
}

ObjectiveTerms anett_objective(const LinearOperator& op, const AnettConfig& config,
                               const AnettRegularizer& reg, const Vector& y, const Vector& x) {
    detail::require_same_size(x.size(), op.domain_dim(), "anett_objective (image)");
    detail::require_same_size(y.size(), op.range_dim(), "anett_objective (data)");
    ObjectiveTerms terms;
    terms.similarity = sim_eval(config.similarity, op.apply(x), y);
    terms.regularizer = reg.value(x);
    terms.total = terms.similarity + config.alpha * terms.regularizer;
    return terms;
}

double bregman_distance(const AnettRegularizer& reg, const Vector& x, const Vector& x_star) {
    if (!reg.differentiable()) {
        throw UnsupportedError("bregman_distance: regularizer is not differentiable (need q > 1 or mu > 0 and smooth networks)");
    }
    detail::require_same_size(x.size(), x_star.size(), "bregman_distance");
    const double linear = reg.gradient(x_star).dot(x - x_star);
    return std::abs(reg.value(x) - reg.value(x_star) - linear);
}

} // namespace anett

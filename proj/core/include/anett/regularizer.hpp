#pragma once

#include "anett/grid.hpp"
#include "anett/operators.hpp"
#include "anett/similarity.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace anett {

/// Weighted l^q penalty phi(xi) = sum_l w_l |xi_l|^q, optionally Huber-smoothed.
///
/// With smoothing radius mu > 0 each entry uses a quadratic inside |t| <= mu
/// whose value and slope match |t|^q at |t| = mu.
struct PhiSpec {
    double q = 1.0;
    /// Per-index weights; empty means all ones.
    Vector weights;
    double mu = 0.0;

    void validate(Eigen::Index n) const;
    double weight(Eigen::Index i) const { return weights.size() == 0 ? 1.0 : weights[i]; }
    /// True when phi is differentiable everywhere.
    bool differentiable() const { return mu > 0.0 || q > 1.0; }
};

/// Shape of one block of encoder coefficients (one channel grid per encoder level).
struct BlockShape {
    int channels = 0;
    int height = 0;
    int width = 0;

    Eigen::Index size() const { return static_cast<Eigen::Index>(channels) * height * width; }
    bool operator==(const BlockShape&) const = default;
};

/// Encoder output xi over the index set Lambda, with the multiscale layout.
struct CoefficientVector {
    Vector values;
    std::vector<BlockShape> blocks;

    CoefficientVector() = default;
    explicit CoefficientVector(Vector v) : values(std::move(v)) {}
    CoefficientVector(Vector v, std::vector<BlockShape> b);

    Eigen::Index size() const { return values.size(); }
};

double phi_eval(const PhiSpec& spec, const Vector& xi);
/// Gradient of phi; at the kink of the unsmoothed l^1 term the subgradient 0 is returned.
Vector phi_grad(const PhiSpec& spec, const Vector& xi);
/// argmin_z tau phi(z) + 1/2 ||z - xi||^2. Requires mu = 0 and q in {1, 2}.
Vector prox_phi(const PhiSpec& spec, const Vector& xi, double tau);

/// An encoder E: X -> Xi and decoder D: Xi -> X with reverse-mode derivatives.
///
/// The pullback of a pass maps an upstream gradient to J^T * upstream at the
/// point where the pass was evaluated.
class EncoderDecoder {
public:
    struct EncodePass {
        CoefficientVector value;
        std::function<Vector(const Vector&)> pullback;
    };
    struct DecodePass {
        Vector value;
        std::function<Vector(const Vector&)> pullback;
    };

    virtual ~EncoderDecoder() = default;

    virtual Eigen::Index signal_dim() const = 0;
    virtual Eigen::Index code_dim() const = 0;

    virtual EncodePass encode_pass(const Vector& x) const = 0;
    virtual DecodePass decode_pass(const Vector& xi) const = 0;

    virtual CoefficientVector encode(const Vector& x) const { return encode_pass(x).value; }
    virtual Vector decode(const Vector& xi) const { return decode_pass(xi).value; }

    /// False when the maps are only piecewise smooth (relu networks).
    virtual bool smooth() const { return true; }
};

/// E = D = Id.
class IdentityCodec final : public EncoderDecoder {
public:
    explicit IdentityCodec(Eigen::Index n) : n_(n) {}

    Eigen::Index signal_dim() const override { return n_; }
    Eigen::Index code_dim() const override { return n_; }
    EncodePass encode_pass(const Vector& x) const override;
    DecodePass decode_pass(const Vector& xi) const override;

private:
    Eigen::Index n_;
};

/// E and D given by explicit matrices (code_dim x n and n x code_dim).
class LinearCodec final : public EncoderDecoder {
public:
    LinearCodec(Matrix encoder, Matrix decoder);

    Eigen::Index signal_dim() const override { return encoder_.cols(); }
    Eigen::Index code_dim() const override { return encoder_.rows(); }
    EncodePass encode_pass(const Vector& x) const override;
    DecodePass decode_pass(const Vector& xi) const override;

    const Matrix& encoder() const { return encoder_; }
    const Matrix& decoder() const { return decoder_; }

private:
    Matrix encoder_;
    Matrix decoder_;
};

/// R(x) = phi(E(x)) + (c/2) ||x - D(E(x))||^2.
class AnettRegularizer {
public:
    AnettRegularizer(std::shared_ptr<const EncoderDecoder> codec, PhiSpec phi, double c);

    double value(const Vector& x) const;
    /// Gradient (or the subgradient with zero at l^1 kinks).
    Vector gradient(const Vector& x) const;
    bool differentiable() const { return phi_.differentiable() && codec_->smooth(); }

    /// N(x) = D(E(x)).
    Vector autoencode(const Vector& x) const;

    const EncoderDecoder& codec() const { return *codec_; }
    std::shared_ptr<const EncoderDecoder> codec_ptr() const { return codec_; }
    const PhiSpec& phi() const { return phi_; }
    double c() const { return c_; }

private:
    std::shared_ptr<const EncoderDecoder> codec_;
    PhiSpec phi_;
    double c_;
};

double anett_reg(const EncoderDecoder& codec, const PhiSpec& phi, double c, const Image& x);

/// Parameters of the augmented functional and of its ADMM minimization.
struct AnettConfig {
    double alpha = 1e-4;
    double c = 1e2;
    /// ADMM scaling; a non-positive value selects rho = alpha * c.
    double rho = 0.0;
    double gamma = 5e-1;
    int n_iter = 50;
    int inner_max_iters = 10;
    double inner_tol = 1e-5;
    SimilaritySpec similarity;
    PhiSpec phi;

    double effective_rho() const { return rho > 0.0 ? rho : alpha * c; }
    void validate() const;

    static AnettConfig sparse_view();
    static AnettConfig low_dose();
    static AnettConfig universality();
};

struct ObjectiveTerms {
    double similarity = 0.0;
    double regularizer = 0.0;
    double total = 0.0;
};

/// D(Kx, y) + alpha R(x).
ObjectiveTerms anett_objective(const LinearOperator& op, const AnettConfig& config,
                               const AnettRegularizer& reg, const Vector& y, const Vector& x);

/// |R(x) - R(x*) - <grad R(x*), x - x*>|. Throws UnsupportedError if R is not differentiable.
double bregman_distance(const AnettRegularizer& reg, const Vector& x, const Vector& x_star);

} // namespace anett

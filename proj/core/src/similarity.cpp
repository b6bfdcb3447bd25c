#include "anett/similarity.hpp"

#include "anett/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace anett {

namespace {

void check_kl_data(const Vector& v) {
    if ((v.array() < 0.0).any()) {
        throw DomainError("kl similarity: data entries must be nonnegative");
    }
}

} // namespace

void SimilaritySpec::validate() const {
    if (kind == SimilarityKind::kl && !(kl_floor > 0.0)) {
        throw DomainError("kl similarity: floor must be positive");
    }
}

SimilarityKind parse_similarity_kind(std::string_view name) {
    if (name == "l2sq" || name == "l2") return SimilarityKind::l2sq;
    if (name == "kl") return SimilarityKind::kl;
    if (name == "unstable") return SimilarityKind::unstable;
    throw ConfigError("unknown similarity kind '" + std::string(name) + "'");
}

std::string_view to_string(SimilarityKind kind) {
    switch (kind) {
    case SimilarityKind::l2sq: return "l2sq";
    case SimilarityKind::kl: return "kl";
    case SimilarityKind::unstable: return "unstable";
    }
    return "?";
}

double sim_eval(const SimilaritySpec& spec, const Vector& u, const Vector& v) {
    detail::require_same_size(u.size(), v.size(), "sim_eval");
    spec.validate();
    switch (spec.kind) {
    case SimilarityKind::l2sq:
        return (u - v).squaredNorm();
    case SimilarityKind::kl: {
        check_kl_data(v);
        double total = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            total += u[i] - v[i];
            if (v[i] > 0.0) {
                total += v[i] * std::log(v[i] / std::max(u[i], spec.kl_floor));
            }
        }
        return total;
    }
    case SimilarityKind::unstable: {
        const double weight = v.norm() <= 1.0 ? 1.0 : 2.0;
        return weight * (u - v).squaredNorm();
    }
    }
    return 0.0;
}

double sim_eval(const SimilaritySpec& spec, const Sinogram& u, const Sinogram& v) {
    if (!(u.geometry == v.geometry)) {
        throw DimensionError("sim_eval: sinogram geometries differ");
    }
    return sim_eval(spec, u.values, v.values);
}

Vector sim_grad(const SimilaritySpec& spec, const Vector& u, const Vector& v) {
    detail::require_same_size(u.size(), v.size(), "sim_grad");
    spec.validate();
    switch (spec.kind) {
    case SimilarityKind::l2sq:
        return 2.0 * (u - v);
    case SimilarityKind::kl: {
        check_kl_data(v);
        Vector g(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            g[i] = 1.0 - v[i] / std::max(u[i], spec.kl_floor);
        }
        return g;
    }
    case SimilarityKind::unstable:
        throw UnsupportedError("sim_grad: the unstable measure is only used in closed-form demos");
    }
    return {};
}

Sinogram sim_grad(const SimilaritySpec& spec, const Sinogram& u, const Sinogram& v) {
    if (!(u.geometry == v.geometry)) {
        throw DimensionError("sim_grad: sinogram geometries differ");
    }
    return Sinogram(u.geometry, sim_grad(spec, u.values, v.values));
}

} // namespace anett

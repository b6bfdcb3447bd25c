#pragma once

#include "anett/grid.hpp"

#include <string_view>

namespace anett {

enum class SimilarityKind {
    l2sq,     ///< ||u - v||^2
    kl,       ///< sum u - v + v log(v / u)
    unstable  ///< H(v) ||u - v||^2, H(v) = 1 if ||v|| <= 1 else 2
};

struct SimilaritySpec {
    SimilarityKind kind = SimilarityKind::l2sq;
    /// Lower clamp for u inside log and division (kl only).
    double kl_floor = 1e-8;

    static SimilaritySpec l2sq() { return {SimilarityKind::l2sq, 1e-8}; }
    static SimilaritySpec kl(double floor = 1e-8) { return {SimilarityKind::kl, floor}; }
    static SimilaritySpec unstable() { return {SimilarityKind::unstable, 1e-8}; }

    void validate() const;
};

SimilarityKind parse_similarity_kind(std::string_view name);
std::string_view to_string(SimilarityKind kind);

/// D(u, v). The first argument plays the role of K x, the second of the data.
double sim_eval(const SimilaritySpec& spec, const Vector& u, const Vector& v);
double sim_eval(const SimilaritySpec& spec, const Sinogram& u, const Sinogram& v);

/// Gradient of D(u, v) with respect to u. Throws UnsupportedError for the unstable measure.
Vector sim_grad(const SimilaritySpec& spec, const Vector& u, const Vector& v);
Sinogram sim_grad(const SimilaritySpec& spec, const Sinogram& u, const Sinogram& v);

} // namespace anett

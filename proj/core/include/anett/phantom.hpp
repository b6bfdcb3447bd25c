#pragma once

#include "anett/grid.hpp"

#include <cstdint>
#include <vector>

namespace anett {

struct Ellipse {
    double value;
    double semi_x;
    double semi_y;
    double center_x;
    double center_y;
    /// Rotation in degrees, counter-clockwise.
    double angle_deg;

    bool contains(double x, double y) const;
};

/// Modified (high-contrast) Shepp-Logan head phantom, values in [0, 1].
Image shepp_logan(int n);
const std::vector<Ellipse>& shepp_logan_ellipses();

/// Rasterize a sum of ellipses: each pixel averages supersample x supersample
/// point samples of the clamped sum, so values stay in [0, 1].
Image rasterize(const std::vector<Ellipse>& ellipses, int n, int supersample = 4);

/// Random head-like phantom: a skull ellipse (value 1), a brain ellipse (-0.8)
/// inside it and 3 to 8 interior features with values in [-0.2, 0.3].
std::vector<Ellipse> random_ellipses(std::uint64_t seed);
Image random_phantom(int n, std::uint64_t seed);

enum class Split { train, validation, test };

/// Phantoms with their split; each phantom is drawn from its own seed group.
struct Dataset {
    std::vector<Image> images;
    std::vector<Split> splits;

    std::vector<Image> subset(Split split) const;
    std::size_t count(Split split) const;
    void add(Image img, Split split);
};

/// n_train training phantoms plus validation and test sets in the ratio 7/2/1.
Dataset make_phantom_dataset(int image_size, int n_train, std::uint64_t seed);

} // namespace anett

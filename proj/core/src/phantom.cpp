#include "anett/phantom.hpp"

#include "anett/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace anett {

bool Ellipse::contains(double x, double y) const {
    const double t = angle_deg * std::numbers::pi / 180.0;
    const double dx = x - center_x;
    const double dy = y - center_y;
    const double u = dx * std::cos(t) + dy * std::sin(t);
    const double v = -dx * std::sin(t) + dy * std::cos(t);
    return (u * u) / (semi_x * semi_x) + (v * v) / (semi_y * semi_y) <= 1.0;
}

const std::vector<Ellipse>& shepp_logan_ellipses() {
    static const std::vector<Ellipse> table = {
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
        {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
        {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
        {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
        {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
        {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
    };
    return table;
}

Image rasterize(const std::vector<Ellipse>& ellipses, int n, int supersample) {
    if (supersample < 1) throw DomainError("rasterize: supersample must be >= 1");
    Image img(n);
    const double h = img.pixel_width();
    const double weight = 1.0 / (supersample * supersample);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int a = 0; a < supersample; ++a) {
                const double y = 1.0 - (i + (a + 0.5) / supersample) * h;
                for (int b = 0; b < supersample; ++b) {
                    const double x = -1.0 + (j + (b + 0.5) / supersample) * h;
                    double v = 0.0;
                    for (const Ellipse& e : ellipses) {
                        if (e.contains(x, y)) v += e.value;
                    }
                    acc += std::clamp(v, 0.0, 1.0);
                }
            }
            img(i, j) = weight * acc;
        }
    }
    return img;
}

Image shepp_logan(int n) {
    if (n < 16) throw DimensionError("shepp_logan: image size must be at least 16");
    return rasterize(shepp_logan_ellipses(), n);
}

std::vector<Ellipse> random_ellipses(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    std::vector<Ellipse> out;
    const double skull_x = uniform(0.60, 0.78);
    const double skull_y = uniform(0.78, 0.92);
    const double skull_angle = uniform(-10.0, 10.0);
    out.push_back({1.0, skull_x, skull_y, 0.0, 0.0, skull_angle});
    const double wall = uniform(0.03, 0.07);
    out.push_back({-0.8, skull_x - wall, skull_y - wall, 0.0, uniform(-0.02, 0.02), skull_angle});

    const int features = std::uniform_int_distribution<int>(3, 8)(rng);
    const double inner_x = skull_x - wall;
    const double inner_y = skull_y - wall;
    for (int k = 0; k < features; ++k) {
        const double a = uniform(0.03, 0.25);
        const double b = uniform(0.03, 0.25);
        // Keep the feature inside the brain region.
        const double r = uniform(0.0, 1.0 - std::max(a / inner_x, b / inner_y));
        const double t = uniform(0.0, 2.0 * std::numbers::pi);
        const double cx = r * inner_x * std::cos(t);
        const double cy = r * inner_y * std::sin(t);
        double value = uniform(-0.2, 0.3);
        if (std::abs(value) < 0.05) value = std::copysign(0.05, value);
        out.push_back({value, a, b, cx, cy, uniform(0.0, 180.0)});
    }
    return out;
}

Image random_phantom(int n, std::uint64_t seed) {
    return rasterize(random_ellipses(seed), n);
}

std::vector<Image> Dataset::subset(Split split) const {
    std::vector<Image> out;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (splits[i] == split) out.push_back(images[i]);
    }
    return out;
}

std::size_t Dataset::count(Split split) const {
    return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), split));
}

void Dataset::add(Image img, Split split) {
    images.push_back(std::move(img));
    splits.push_back(split);
}

Dataset make_phantom_dataset(int image_size, int n_train, std::uint64_t seed) {
    if (n_train < 1) throw DomainError("make_phantom_dataset: need at least one training phantom");
    const int n_val = std::max(1, static_cast<int>(std::lround(n_train * 2.0 / 7.0)));
    const int n_test = std::max(1, static_cast<int>(std::lround(n_train * 1.0 / 7.0)));
    // Seed groups are disjoint by construction: one stream per phantom.
    std::seed_seq seq{seed};
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_train + n_val + n_test));
    std::vector<std::uint32_t> raw(seeds.size() * 2);
    seq.generate(raw.begin(), raw.end());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        seeds[i] = (static_cast<std::uint64_t>(raw[2 * i]) << 32) | raw[2 * i + 1];
    }
    Dataset data;
    std::size_t k = 0;
    for (int i = 0; i < n_train; ++i) data.add(random_phantom(image_size, seeds[k++]), Split::train);
    for (int i = 0; i < n_val; ++i) data.add(random_phantom(image_size, seeds[k++]), Split::validation);
    for (int i = 0; i < n_test; ++i) data.add(random_phantom(image_size, seeds[k++]), Split::test);
    return data;
}

} // namespace anett

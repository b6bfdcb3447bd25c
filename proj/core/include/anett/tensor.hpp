#pragma once

#include "anett/grid.hpp"

namespace anett {

/// Channel-major 3-D array (channels x height x width) of doubles.
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    Vector data;

    Tensor() = default;
    Tensor(int c, int h, int w);
    Tensor(int c, int h, int w, Vector values);

    static Tensor from_image(const Image& img);
    Image to_image() const;

    Eigen::Index plane() const { return static_cast<Eigen::Index>(height) * width; }
    Eigen::Index size() const { return data.size(); }
    double* channel(int c) { return data.data() + c * plane(); }
    const double* channel(int c) const { return data.data() + c * plane(); }

    double& operator()(int c, int y, int x) { return data[c * plane() + static_cast<Eigen::Index>(y) * width + x]; }
    double operator()(int c, int y, int x) const { return data[c * plane() + static_cast<Eigen::Index>(y) * width + x]; }

    bool same_shape(const Tensor& other) const {
        return channels == other.channels && height == other.height && width == other.width;
    }
};

} // namespace anett

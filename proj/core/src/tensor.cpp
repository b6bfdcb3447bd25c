#include "anett/tensor.hpp"

#include "anett/error.hpp"

namespace anett {

Tensor::Tensor(int c, int h, int w) : Tensor(c, h, w, Vector::Zero(static_cast<Eigen::Index>(c) * h * w)) {}

Tensor::Tensor(int c, int h, int w, Vector values) : channels(c), height(h), width(w), data(std::move(values)) {
    if (c < 1 || h < 1 || w < 1) {
        throw DimensionError("Tensor: all extents must be positive");
    }
    detail::require_same_size(data.size(), static_cast<long>(c) * h * w, "Tensor");
}

Tensor Tensor::from_image(const Image& img) {
    return Tensor(1, img.size, img.size, img.pixels);
}

Image Tensor::to_image() const {
    if (channels != 1 || height != width) {
        throw DimensionError("Tensor::to_image: need a single square channel");
    }
    return Image(height, data);
}

} // namespace anett

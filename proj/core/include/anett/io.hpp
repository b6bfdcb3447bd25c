#pragma once

#include "anett/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace anett {

/// N-dimensional array of doubles as stored on disk.
///
/// Layout: magic "ANETTGRD", u16 version, u16 rank, rank x u64 dims,
/// then product(dims) little-endian f64 values, row-major.
struct GridFile {
    std::vector<std::uint64_t> dims;
    Vector values;

    static GridFile from_image(const Image& img);
    static GridFile from_sinogram(const Sinogram& sino);
    Image to_image() const;
    Sinogram to_sinogram() const;
};

std::vector<std::uint8_t> encode_grid(const GridFile& grid);
GridFile decode_grid(const std::vector<std::uint8_t>& bytes);
void write_grid(const GridFile& grid, const std::string& path);
GridFile read_grid(const std::string& path);

/// 8-bit grayscale PNG; values are clipped to [lo, hi] and mapped to [0, 255].
void write_png(const Image& img, const std::string& path, double lo = 0.0, double hi = 1.0);

} // namespace anett

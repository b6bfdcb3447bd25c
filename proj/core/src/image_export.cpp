#include "anett/error.hpp"
#include "anett/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace anett {

void write_png(const Image& img, const std::string& path, double lo, double hi) {
    if (!(hi > lo)) throw DomainError("write_png: window must satisfy lo < hi");
    const int n = img.size;
    std::vector<png_byte> rows(static_cast<std::size_t>(n) * n);
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
        const double t = std::clamp((img.pixels[i] - lo) / (hi - lo), 0.0, 1.0);
        rows[static_cast<std::size_t>(i)] = static_cast<png_byte>(std::lround(255.0 * t));
    }

    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) throw IoError("cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed for '" + path + "'");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(n), static_cast<png_uint_32>(n), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < n; ++r) png_write_row(png, rows.data() + static_cast<std::size_t>(r) * n);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace anett

#include "anett/error.hpp"
#include "anett/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace anett {

namespace {

constexpr char magic[8] = {'A', 'N', 'E', 'T', 'T', 'G', 'R', 'D'};
constexpr std::uint16_t format_version = 1;

static_assert(std::endian::native == std::endian::little, "grid I/O assumes a little-endian host");

template <typename T>
void append(std::vector<std::uint8_t>& out, const T& value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T take(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (in.size() - pos < sizeof(T)) throw ConfigError("grid file: unexpected end of data");
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

} // namespace

GridFile GridFile::from_image(const Image& img) {
    return {{static_cast<std::uint64_t>(img.size), static_cast<std::uint64_t>(img.size)}, img.pixels};
}

GridFile GridFile::from_sinogram(const Sinogram& sino) {
    return {{static_cast<std::uint64_t>(sino.geometry.n_angles), static_cast<std::uint64_t>(sino.geometry.n_detectors)},
            sino.values};
}

Image GridFile::to_image() const {
    if (dims.size() != 2 || dims[0] != dims[1]) {
        throw DimensionError("grid file does not hold a square image");
    }
    return Image(static_cast<int>(dims[0]), values);
}

Sinogram GridFile::to_sinogram() const {
    if (dims.size() != 2) throw DimensionError("grid file does not hold a sinogram");
    return Sinogram(ScanGeometry(static_cast<int>(dims[0]), static_cast<int>(dims[1])), values);
}

std::vector<std::uint8_t> encode_grid(const GridFile& grid) {
    std::uint64_t count = 1;
    for (auto d : grid.dims) count *= d;
    if (count != static_cast<std::uint64_t>(grid.values.size())) {
        throw DimensionError("grid file: payload length does not match dims");
    }
    std::vector<std::uint8_t> out(std::begin(magic), std::end(magic));
    append(out, format_version);
    append(out, static_cast<std::uint16_t>(grid.dims.size()));
    for (auto d : grid.dims) append(out, d);
    const auto* p = reinterpret_cast<const std::uint8_t*>(grid.values.data());
    out.insert(out.end(), p, p + grid.values.size() * sizeof(double));
    return out;
}

GridFile decode_grid(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(magic) || std::memcmp(bytes.data(), magic, sizeof(magic)) != 0) {
        throw ConfigError("grid file: bad magic");
    }
    std::size_t pos = sizeof(magic);
    const auto version = take<std::uint16_t>(bytes, pos);
    if (version != format_version) throw ConfigError("grid file: unsupported version " + std::to_string(version));
    const auto rank = take<std::uint16_t>(bytes, pos);
    GridFile grid;
    std::uint64_t count = 1;
    for (std::uint16_t r = 0; r < rank; ++r) {
        grid.dims.push_back(take<std::uint64_t>(bytes, pos));
        count *= grid.dims.back();
    }
    if ((bytes.size() - pos) != count * sizeof(double)) {
        throw ConfigError("grid file: payload length does not match dims");
    }
    grid.values.resize(static_cast<Eigen::Index>(count));
    std::memcpy(grid.values.data(), bytes.data() + pos, count * sizeof(double));
    return grid;
}

void write_grid(const GridFile& grid, const std::string& path) {
    const auto bytes = encode_grid(grid);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path + "'");
}

GridFile read_grid(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_grid(bytes);
}

} // namespace anett

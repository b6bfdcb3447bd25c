#include "anett/error.hpp"
#include "anett/network.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace anett {

namespace {

constexpr char magic[8] = {'A', 'N', 'E', 'T', 'T', 'N', 'E', 'T'};
constexpr std::uint16_t format_version = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_string(const std::string& s) {
        put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void put_vector(const Vector& v) {
        put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
        const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
        bytes.insert(bytes.end(), p, p + v.size() * sizeof(double));
    }

    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    std::string get_string() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    Vector get_vector() {
        const auto n = get<std::uint64_t>();
        if (n > (bytes_.size() - pos_) / sizeof(double)) {
            throw ConfigError("checkpoint: truncated parameter blob");
        }
        Vector v(static_cast<Eigen::Index>(n));
        std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
        return v;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw ConfigError("checkpoint: unexpected end of data");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

Layer read_layer(Reader& in) {
    const auto kind = in.get<std::uint8_t>();
    const auto act = in.get<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(LayerKind::upsample) || act > static_cast<std::uint8_t>(ActivationKind::identity)) {
        throw ConfigError("checkpoint: unknown layer or activation code");
    }
    Layer layer;
    layer.kind = static_cast<LayerKind>(kind);
    layer.activation = static_cast<ActivationKind>(act);
    layer.in_channels = in.get<std::int32_t>();
    layer.out_channels = in.get<std::int32_t>();
    layer.kernel = in.get<std::int32_t>();
    layer.stride = in.get<std::int32_t>();
    layer.weights = in.get_vector();
    layer.bias = in.get_vector();
    if (layer.has_parameters()) {
        const Eigen::Index expected =
            static_cast<Eigen::Index>(layer.in_channels) * layer.out_channels * layer.kernel * layer.kernel;
        if (layer.in_channels <= 0 || layer.out_channels <= 0 || layer.kernel <= 0 || layer.kernel % 2 == 0 ||
            layer.stride < 1 || layer.weights.size() != expected || layer.bias.size() != layer.out_channels) {
            throw ConfigError("checkpoint: inconsistent layer dimensions");
        }
    }
    return layer;
}

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const NetworkParams& params) {
    Writer out;
    out.bytes.insert(out.bytes.end(), std::begin(magic), std::end(magic));
    out.put<std::uint16_t>(format_version);
    out.put_string(params.kind);
    out.put<std::int32_t>(params.image_size);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(params.blocks.size()));
    for (const auto& [name, block] : params.blocks) {
        out.put_string(name);
        out.put<std::uint32_t>(static_cast<std::uint32_t>(block.layers().size()));
        for (const Layer& layer : block.layers()) {
            out.put<std::uint8_t>(static_cast<std::uint8_t>(layer.kind));
            out.put<std::uint8_t>(static_cast<std::uint8_t>(layer.activation));
            out.put<std::int32_t>(layer.in_channels);
            out.put<std::int32_t>(layer.out_channels);
            out.put<std::int32_t>(layer.kernel);
            out.put<std::int32_t>(layer.stride);
            out.put_vector(layer.weights);
            out.put_vector(layer.bias);
        }
    }
    return std::move(out.bytes);
}

NetworkParams decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(magic) || std::memcmp(bytes.data(), magic, sizeof(magic)) != 0) {
        throw ConfigError("checkpoint: bad magic");
    }
    std::vector<std::uint8_t> body(bytes.begin() + sizeof(magic), bytes.end());
    Reader in(body);
    const auto version = in.get<std::uint16_t>();
    if (version != format_version) {
        throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    }
    NetworkParams params;
    params.kind = in.get_string();
    params.image_size = in.get<std::int32_t>();
    const auto n_blocks = in.get<std::uint32_t>();
    for (std::uint32_t b = 0; b < n_blocks; ++b) {
        std::string name = in.get_string();
        const auto n_layers = in.get<std::uint32_t>();
        std::vector<Layer> layers;
        for (std::uint32_t l = 0; l < n_layers; ++l) layers.push_back(read_layer(in));
        params.blocks.emplace_back(std::move(name), Sequential(std::move(layers)));
    }
    if (!in.at_end()) throw ConfigError("checkpoint: trailing bytes");
    return params;
}

void save_checkpoint(const NetworkParams& params, const std::string& path) {
    const std::vector<std::uint8_t> bytes = encode_checkpoint(params);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path + "'");
}

NetworkParams load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

} // namespace anett

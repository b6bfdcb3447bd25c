#include "anett/config.hpp"

#include "anett/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace anett {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
    return out;
}

long long to_integer(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    return static_cast<int>(to_integer(key, value));
}

std::array<int, 3> to_triple(const std::string& key, const std::string& value) {
    std::array<int, 3> out{};
    std::stringstream ss(value);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i == 3) break;
        out[static_cast<std::size_t>(i++)] = to_int(key, trim(item));
    }
    if (i != 3 || std::getline(ss, item, ',')) {
        throw ConfigError("config key '" + key + "': expected three comma-separated integers");
    }
    return out;
}

ActivationKind to_activation(const std::string& key, const std::string& value) {
    try {
        return parse_activation(value);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': unknown activation '" + value + "'");
    }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"alpha", [](auto& c, auto& k, auto& v) { c.anett.alpha = to_double(k, v); }},
        {"c", [](auto& c, auto& k, auto& v) { c.anett.c = to_double(k, v); }},
        {"rho", [](auto& c, auto& k, auto& v) { c.anett.rho = to_double(k, v); }},
        {"gamma", [](auto& c, auto& k, auto& v) { c.anett.gamma = to_double(k, v); }},
        {"n_iter", [](auto& c, auto& k, auto& v) { c.anett.n_iter = to_int(k, v); }},
        {"inner_max_iters", [](auto& c, auto& k, auto& v) { c.anett.inner_max_iters = to_int(k, v); }},
        {"inner_tol", [](auto& c, auto& k, auto& v) { c.anett.inner_tol = to_double(k, v); }},
        {"similarity", [](auto& c, auto&, auto& v) { c.anett.similarity.kind = parse_similarity_kind(v); }},
        {"kl_floor", [](auto& c, auto& k, auto& v) { c.anett.similarity.kl_floor = to_double(k, v); }},
        {"phi.q", [](auto& c, auto& k, auto& v) { c.anett.phi.q = to_double(k, v); }},
        {"phi.mu", [](auto& c, auto& k, auto& v) { c.anett.phi.mu = to_double(k, v); }},
        {"image_size", [](auto& c, auto& k, auto& v) { c.image_size = to_int(k, v); }},
        {"n_angles", [](auto& c, auto& k, auto& v) { c.geometry.n_angles = to_int(k, v); }},
        {"n_detectors", [](auto& c, auto& k, auto& v) { c.geometry.n_detectors = to_int(k, v); }},
        {"filter",
         [](auto& c, auto& k, auto& v) {
             if (v == "ramlak") c.filter = FbpFilter::ramlak;
             else if (v == "hann") c.filter = FbpFilter::hann;
             else throw ConfigError("config key '" + k + "': unknown filter '" + v + "'");
         }},
        {"noise.kind", [](auto& c, auto&, auto& v) { c.noise.kind = parse_noise_kind(v); }},
        {"noise.level", [](auto& c, auto& k, auto& v) { c.noise.level = to_double(k, v); }},
        {"seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_integer(k, v)); }},
        {"train.epochs", [](auto& c, auto& k, auto& v) { c.train.epochs = to_int(k, v); }},
        {"train.batch_size", [](auto& c, auto& k, auto& v) { c.train.batch_size = to_int(k, v); }},
        {"train.learning_rate", [](auto& c, auto& k, auto& v) { c.train.learning_rate = to_double(k, v); }},
        {"train.nu", [](auto& c, auto& k, auto& v) { c.train.nu = to_double(k, v); }},
        {"train.weight_decay", [](auto& c, auto& k, auto& v) { c.train.weight_decay = to_double(k, v); }},
        {"train.noise_factor", [](auto& c, auto& k, auto& v) { c.train.noise_factor = to_double(k, v); }},
        {"train.n_phantoms", [](auto& c, auto& k, auto& v) { c.n_phantoms = to_int(k, v); }},
        {"ae.channels", [](auto& c, auto& k, auto& v) { c.autoencoder.channels = to_triple(k, v); }},
        {"ae.activation", [](auto& c, auto& k, auto& v) { c.autoencoder.activation = to_activation(k, v); }},
        {"task.channels", [](auto& c, auto& k, auto& v) { c.task.channels = to_int(k, v); }},
        {"task.activation", [](auto& c, auto& k, auto& v) { c.task.activation = to_activation(k, v); }},
        {"window.min", [](auto& c, auto& k, auto& v) { c.window_min = to_double(k, v); }},
        {"window.max", [](auto& c, auto& k, auto& v) { c.window_max = to_double(k, v); }},
        {"paths.autoencoder", [](auto& c, auto&, auto& v) { c.paths["autoencoder"] = v; }},
        {"paths.task", [](auto& c, auto&, auto& v) { c.paths["task"] = v; }},
        {"paths.output", [](auto& c, auto&, auto& v) { c.paths["output"] = v; }},
    };
    return table;
}

} // namespace

const std::vector<std::string>& experiment_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k{"preset"};
        for (const auto& [name, setter] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

void ExperimentConfig::validate() const {
    try {
        anett.validate();
        anett.phi.validate(0);
        train.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (image_size < 16 || image_size % 4 != 0) throw ConfigError("image_size must be a multiple of 4 and >= 16");
    if (geometry.n_angles < 1 || geometry.n_detectors < 2) {
        throw ConfigError("n_angles must be >= 1 and n_detectors >= 2");
    }
    if (noise.kind == NoiseKind::gaussian && !(noise.level >= 0.0)) {
        throw ConfigError("noise.level must be nonnegative for gaussian noise");
    }
    if (noise.kind == NoiseKind::poisson && !(noise.level > 0.0)) {
        throw ConfigError("noise.level (photon count) must be positive for poisson noise");
    }
    if (n_phantoms < 1) throw ConfigError("train.n_phantoms must be >= 1");
    for (int ch : autoencoder.channels) {
        if (ch < 1) throw ConfigError("ae.channels must be positive");
    }
    if (task.channels < 1) throw ConfigError("task.channels must be positive");
    if (!(window_max > window_min)) throw ConfigError("window.max must exceed window.min");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string preset;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "preset") {
            preset = value;
            continue;
        }
        if (!setters().count(key)) {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        entries.emplace_back(std::move(key), std::move(value));
    }

    ExperimentConfig cfg;
    if (preset == "low_dose") {
        cfg.anett = AnettConfig::low_dose();
        cfg.noise = {NoiseKind::poisson, 1e4};
    } else if (preset == "universality") {
        cfg.anett = AnettConfig::universality();
    } else if (!preset.empty() && preset != "sparse_view") {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    for (const auto& [key, value] : entries) {
        try {
            setters().at(key)(cfg, key, value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << f.rdbuf();
    return parse_experiment_config(buffer.str());
}

} // namespace anett

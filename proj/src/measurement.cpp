#include "pat/measurement.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pat/error.hpp"

namespace pat {

SamplingPattern parse_pattern(std::string_view name) {
    if (name == "uniform") return SamplingPattern::uniform;
    if (name == "random") return SamplingPattern::random;
    if (name == "limited_view" || name == "limited-view") return SamplingPattern::limited_view;
    throw ConfigError("unknown sampling pattern '" + std::string(name) + "'");
}

std::string_view to_string(SamplingPattern pattern) {
    switch (pattern) {
        case SamplingPattern::uniform: return "uniform";
        case SamplingPattern::random: return "random";
        case SamplingPattern::limited_view: return "limited_view";
    }
    return "unknown";
}

ChannelMask::ChannelMask(std::size_t n_ch, std::vector<std::size_t> kept)
    : n_ch_(n_ch), kept_(std::move(kept)), flags_(n_ch, false) {
    if (kept_.empty() || kept_.size() > n_ch_) throw ConfigError("mask must keep between 1 and n_ch channels");
    for (std::size_t i = 0; i < kept_.size(); ++i) {
        if (kept_[i] >= n_ch_) throw ConfigError("mask index out of range");
        if (i > 0 && kept_[i] <= kept_[i - 1]) throw ConfigError("mask indices must be strictly increasing");
        flags_[kept_[i]] = true;
    }
}

ChannelMask ChannelMask::full(std::size_t n_ch) {
    std::vector<std::size_t> all(n_ch);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return ChannelMask(n_ch, std::move(all));
}

bool ChannelMask::contains(std::size_t ch) const { return ch < n_ch_ && flags_[ch]; }

ChannelMask make_mask(SamplingPattern pattern, std::size_t n_keep, std::size_t n_ch, RngSeed seed,
                      std::size_t view_offset) {
    if (n_keep < 1 || n_keep > n_ch)
        throw ConfigError("n_keep must lie in [1, n_ch], got " + std::to_string(n_keep));
    std::vector<std::size_t> kept;
    kept.reserve(n_keep);
    switch (pattern) {
        case SamplingPattern::uniform:
            for (std::size_t i = 0; i < n_keep; ++i) kept.push_back(i * n_ch / n_keep);
            break;
        case SamplingPattern::random: {
            std::vector<std::size_t> pool(n_ch);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            Rng rng(seed);
            for (std::size_t i = 0; i < n_keep; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.below(n_ch - i));
                std::swap(pool[i], pool[j]);
                kept.push_back(pool[i]);
            }
            std::sort(kept.begin(), kept.end());
            break;
        }
        case SamplingPattern::limited_view:
            for (std::size_t i = 0; i < n_keep; ++i) kept.push_back((view_offset + i) % n_ch);
            std::sort(kept.begin(), kept.end());
            break;
    }
    return ChannelMask(n_ch, std::move(kept));
}

void apply_mask_inplace(const ChannelMask& mask, std::span<double> y, std::size_t n_t) {
    if (y.size() != mask.n_ch() * n_t) throw ShapeError("mask does not match sensor data");
    for (std::size_t ch = 0; ch < mask.n_ch(); ++ch) {
        if (!mask.flags()[ch]) std::fill_n(y.begin() + static_cast<std::ptrdiff_t>(ch * n_t), n_t, 0.0);
    }
}

SensorData apply_mask(const ChannelMask& mask, const SensorData& y) {
    if (y.n_ch() != mask.n_ch()) throw ShapeError("mask channel count does not match sensor data");
    SensorData out = y;
    apply_mask_inplace(mask, out.values(), out.n_t());
    return out;
}

SensorData simulate_measurement(const ModelMatrix& a, const ImageGrid& x, const ChannelMask& mask,
                                double noise_std, RngSeed seed) {
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
    if (mask.n_ch() != a.geometry().n_ch) throw ShapeError("mask channel count does not match model matrix");
    SensorData y = apply_forward(a, x);
    if (noise_std > 0.0) {
        Rng rng(seed);
        for (std::size_t ch : mask.kept()) {
            for (double& v : y.channel(ch)) v += noise_std * rng.normal();
        }
    }
    apply_mask_inplace(mask, y.values(), y.n_t());
    return y;
}

void save_mask(const ChannelMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw PersistenceError("cannot open for writing", path.string());
    out << mask.n_ch() << '\n';
    for (std::size_t ch : mask.kept()) out << ch << '\n';
    if (!out) throw PersistenceError("write failed", path.string());
}

ChannelMask load_mask(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PersistenceError("cannot open for reading", path.string());
    std::size_t n_ch = 0;
    if (!(in >> n_ch)) throw FormatError("n_ch", "missing channel count in " + path.string());
    std::vector<std::size_t> kept;
    std::size_t ch = 0;
    while (in >> ch) kept.push_back(ch);
    if (!in.eof()) throw FormatError("kept", "non-integer entry in " + path.string());
    try {
        return ChannelMask(n_ch, std::move(kept));
    } catch (const ConfigError& e) {
        throw FormatError("kept", e.what());
    }
}

}  // namespace pat

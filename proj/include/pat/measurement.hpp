#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pat/forward_model.hpp"
#include "pat/rng.hpp"
#include "pat/tensor_io.hpp"

namespace pat {

enum class SamplingPattern { uniform, random, limited_view };

SamplingPattern parse_pattern(std::string_view name);
std::string_view to_string(SamplingPattern pattern);

// Set of transducer channels that were actually recorded.
class ChannelMask {
public:
    ChannelMask(std::size_t n_ch, std::vector<std::size_t> kept);

    static ChannelMask full(std::size_t n_ch);

    std::size_t n_ch() const noexcept { return n_ch_; }
    const std::vector<std::size_t>& kept() const noexcept { return kept_; }
    bool contains(std::size_t ch) const;
    const std::vector<bool>& flags() const noexcept { return flags_; }

    friend bool operator==(const ChannelMask& a, const ChannelMask& b) {
        return a.n_ch_ == b.n_ch_ && a.kept_ == b.kept_;
    }

private:
    std::size_t n_ch_;
    std::vector<std::size_t> kept_;
    std::vector<bool> flags_;
};

// uniform: floor(i*n_ch/n_keep); random: seeded draw without replacement;
// limited_view: the contiguous arc starting at view_offset.
ChannelMask make_mask(SamplingPattern pattern, std::size_t n_keep, std::size_t n_ch, RngSeed seed,
                      std::size_t view_offset = 0);

// Zero-fills every channel outside the mask.
SensorData apply_mask(const ChannelMask& mask, const SensorData& y);
void apply_mask_inplace(const ChannelMask& mask, std::span<double> y, std::size_t n_t);

// apply_mask(mask, A x + noise), with i.i.d. Gaussian noise drawn only for
// kept channels, channel by channel.
SensorData simulate_measurement(const ModelMatrix& a, const ImageGrid& x, const ChannelMask& mask,
                                double noise_std, RngSeed seed);

// Text format: first line n_ch, then one kept index per line.
void save_mask(const ChannelMask& mask, const std::filesystem::path& path);
ChannelMask load_mask(const std::filesystem::path& path);

}  // namespace pat

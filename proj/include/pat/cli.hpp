#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pat/baselines.hpp"
#include "pat/forward_model.hpp"
#include "pat/measurement.hpp"
#include "pat/phantoms.hpp"
#include "pat/priors.hpp"
#include "pat/samplers.hpp"

namespace pat::cli {

// Flat dotted-key settings ("geometry.n_ch" -> "64").
using Settings = std::map<std::string, std::string>;

// key = value lines; "[section]" prefixes following keys with "section.";
// '#' starts a comment.
Settings parse_settings(std::istream& in, const std::string& origin);
Settings load_settings(const std::filesystem::path& path);

// Typed, validated view over the geometry/grid/mask/method/prior settings.
struct RunConfig {
    std::size_t grid_side = 64;
    double pixel_size = 0.1;
    ArrayGeometry geometry;
    std::optional<double> adjoint_scale;

    SamplingPattern pattern = SamplingPattern::uniform;
    std::size_t n_keep = 0;
    RngSeed mask_seed{0};
    std::size_t view_offset = 0;

    double noise_std = 0.0;
    RngSeed noise_seed{0};

    std::string method = "linear";
    ReconConfig recon;
    // eps0 = auto: derived from the masked operator norm once A is built.
    bool auto_eps0 = true;
    double step_safety = 0.7;
    TvParams tv;

    std::string prior = "gmrf";
    double prior_beta = 1000.0;
    double prior_tau = 1.0;
    double prior_mean = 0.0;
    double prior_variance = 1.0;

    ChannelMask make_channel_mask() const;
    std::unique_ptr<ScoreModel> make_prior() const;
};

// Reads every recognised key, applying defaults; throws ConfigError on the
// first invalid field.
RunConfig make_run_config(const Settings& settings);

// Replaces an auto eps0 by stable_base_step for this operator and mask.
void resolve_step(RunConfig& config, const ModelMatrix& a, const ChannelMask& mask);

ImageGrid reconstruct(const RunConfig& config, const ModelMatrix& a, const ChannelMask& mask, const SensorData& y,
                      const ImageGrid* ground_truth = nullptr, TraceRecord* trace = nullptr);

// Entry point shared by the executable and the tests. Exit codes: 0 success,
// 1 runtime failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pat::cli

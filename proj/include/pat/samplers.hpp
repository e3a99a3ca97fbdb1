#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pat/forward_model.hpp"
#include "pat/measurement.hpp"
#include "pat/priors.hpp"
#include "pat/rng.hpp"
#include "pat/symmetry.hpp"
#include "pat/tensor_io.hpp"

namespace pat {

enum class RotationPolicy { fixed, cycle, random };
enum class InitMode { zeros, adjoint, random };

RotationPolicy parse_rotation_policy(std::string_view name);
InitMode parse_init_mode(std::string_view name);
std::string_view to_string(RotationPolicy policy);
std::string_view to_string(InitMode mode);

struct ReconConfig {
    NoiseSchedule schedule = make_schedule();
    std::size_t steps_per_scale = 5;
    double eps0 = 1e-5;
    double gamma = 0.0;
    double guidance_anneal = 1.0;
    double alpha = 0.0;
    RotationPolicy rotation_policy = RotationPolicy::random;
    std::size_t fixed_rotation = 1;
    RngSeed rotation_seed{0};
    InitMode init = InitMode::adjoint;
    RngSeed seed{0};

    // Throws ConfigError on any out-of-range field.
    void validate() const;
};

struct TraceEntry {
    double sigma;
    double fidelity_norm;
    double equiv_before;
    double equiv_after;
    std::optional<double> psnr;
};

struct TraceRecord {
    std::vector<TraceEntry> entries;
};

struct SamplerResult {
    ImageGrid image;
    TraceRecord trace;
};

// A^T M (y - M A x) / (gamma^2 + c sigma^2).
ImageGrid likelihood_gradient(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y, const ImageGrid& x,
                              double gamma, double sigma, double c);

// x + eps (score + guidance) + sqrt(2 eps) z. A null rng drops the noise term.
void ald_step(std::span<double> x, std::span<const double> score, std::span<const double> guidance, double eps,
              Rng* rng);
ImageGrid ald_step(const ImageGrid& x, std::span<const double> score, std::span<const double> guidance, double eps,
                   Rng* rng);

// eps0 * (sigma_i / sigma_last)^2
double step_size(double eps0, double sigma_i, double sigma_last);

// Largest eigenvalue of (MA)^T (MA), by power iteration from a constant start.
double masked_norm_sq(const ModelMatrix& a, const ChannelMask& mask, std::size_t iterations = 100);

// eps0 for which the guidance stiffness eps_i ||MA||^2 / (gamma^2 + c sigma_i^2)
// stays at or below `safety` on every scale. The explicit Euler step diverges
// once that product passes 2.
double stable_base_step(const ModelMatrix& a, const ChannelMask& mask, const NoiseSchedule& schedule, double gamma,
                        double c, double safety = 0.7);

// x + alpha * A_dagger [ shift(A x, r) - A rotate(x, r) ]
ImageGrid rcc_correction(const ImageGrid& x, const ModelMatrix& a, const RotationIndex& r, double alpha);

// Annealed Langevin dynamics with likelihood guidance.
SamplerResult run_langevin(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y,
                           const ScoreModel& prior, const ReconConfig& config,
                           const ImageGrid* ground_truth = nullptr);

// As run_langevin, plus one rotation-consistency correction after the steps
// of every noise scale.
SamplerResult run_rcc_sgm(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y,
                          const ScoreModel& prior, const ReconConfig& config,
                          const ImageGrid* ground_truth = nullptr);

// Columns: scale_index, sigma, fidelity_norm, equiv_before, equiv_after, psnr.
void write_trace_csv(const TraceRecord& trace, const std::filesystem::path& path);

}  // namespace pat

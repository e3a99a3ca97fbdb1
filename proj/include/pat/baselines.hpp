#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pat/forward_model.hpp"
#include "pat/measurement.hpp"
#include "pat/tensor_io.hpp"

namespace pat {

// A_dagger applied to the masked measurements.
ImageGrid reconstruct_linear(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y);

struct TvParams {
    double lambda = 2000.0;
    double tol = 2e-4;
    std::size_t max_iter = 200;
};

struct TvResult {
    ImageGrid image;
    std::size_t iterations;
    // Primal objective after each iteration, filled only when requested.
    std::vector<double> objective;
};

// Dual projection solver for min_u ||u - x||^2 / 2 + TV(u) / lambda with
// isotropic TV, forward differences and reflecting boundary, dual step 0.25.
// Stops when the largest change of the dual field drops below tol.
ImageGrid tv_denoise(const ImageGrid& x, const TvParams& params = {});
TvResult tv_denoise_traced(const ImageGrid& x, const TvParams& params, bool record_objective);

// Isotropic total variation with forward differences, zero flux at the far edge.
double total_variation(std::span<const double> u, std::size_t side);
double tv_objective(std::span<const double> u, std::span<const double> x, std::size_t side, double lambda);

}  // namespace pat

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "pat/tensor_io.hpp"

namespace pat {

// Returned by psnr when the two images are identical.
inline constexpr double kPsnrInfinite = std::numeric_limits<double>::infinity();

// max - min of the image; the default peak / dynamic range for both metrics.
double data_range_of(const ImageGrid& image);

double psnr(const ImageGrid& reference, const ImageGrid& test, double peak);
double psnr_values(std::span<const double> reference, std::span<const double> test, double peak);

// "inf" for the identical-image sentinel, %.17g otherwise.
std::string format_psnr(double value);

struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    std::size_t window = 11;
    double window_sigma = 1.5;
    double data_range = 1.0;
};

// Mean of the local SSIM map over the valid region of an 11x11 Gaussian
// window (no padding).
double ssim(const ImageGrid& reference, const ImageGrid& test, const SsimParams& params);

}  // namespace pat

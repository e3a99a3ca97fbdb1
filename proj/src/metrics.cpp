#include "pat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pat/error.hpp"
#include "pat/format.hpp"

namespace pat {

double data_range_of(const ImageGrid& image) {
    const auto v = image.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

double psnr_values(std::span<const double> reference, std::span<const double> test, double peak) {
    if (reference.size() != test.size()) throw ShapeError("psnr images differ in size");
    if (!(peak > 0.0)) throw ConfigError("psnr peak must be positive");
    // Neumaier summation keeps uniform-error images exact.
    double sse = 0.0, carry = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - test[i];
        const double term = d * d;
        const double t = sse + term;
        carry += std::abs(sse) >= term ? (sse - t) + term : (term - t) + sse;
        sse = t;
    }
    const double mse = (sse + carry) / static_cast<double>(reference.size());
    if (mse == 0.0) return kPsnrInfinite;
    return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const ImageGrid& reference, const ImageGrid& test, double peak) {
    if (!reference.same_shape(test)) throw ShapeError("psnr images differ in size");
    return psnr_values(reference.values(), test.values(), peak);
}

std::string format_psnr(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return format_real(value);
}

double ssim(const ImageGrid& reference, const ImageGrid& test, const SsimParams& params) {
    if (!reference.same_shape(test)) throw ShapeError("ssim images differ in size");
    const std::size_t w = params.window;
    const std::size_t n = reference.side();
    if (w == 0 || n < w) throw ShapeError("ssim needs images at least as large as the window");
    if (!(params.data_range > 0.0)) throw ConfigError("ssim data_range must be positive");
    if (!(params.window_sigma > 0.0)) throw ConfigError("ssim window sigma must be positive");

    std::vector<double> kernel(w * w);
    const double c = (static_cast<double>(w) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            const double di = static_cast<double>(i) - c;
            const double dj = static_cast<double>(j) - c;
            kernel[i * w + j] = std::exp(-(di * di + dj * dj) / (2.0 * params.window_sigma * params.window_sigma));
            total += kernel[i * w + j];
        }
    }
    for (double& k : kernel) k /= total;

    const double c1 = (params.k1 * params.data_range) * (params.k1 * params.data_range);
    const double c2 = (params.k2 * params.data_range) * (params.k2 * params.data_range);
    const auto a = reference.values();
    const auto b = test.values();
    const std::size_t out = n - w + 1;
    double sum = 0.0;
    for (std::size_t oi = 0; oi < out; ++oi) {
        for (std::size_t oj = 0; oj < out; ++oj) {
            double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (std::size_t i = 0; i < w; ++i) {
                for (std::size_t j = 0; j < w; ++j) {
                    const double k = kernel[i * w + j];
                    const double va = a[(oi + i) * n + oj + j];
                    const double vb = b[(oi + i) * n + oj + j];
                    ma += k * va;
                    mb += k * vb;
                    saa += k * va * va;
                    sbb += k * vb * vb;
                    sab += k * (va * vb);
                }
            }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        }
    }
    return sum / static_cast<double>(out * out);
}

}  // namespace pat

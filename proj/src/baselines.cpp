#include "pat/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "pat/error.hpp"

namespace pat {

ImageGrid reconstruct_linear(const ModelMatrix& a, const ChannelMask& mask, const SensorData& y) {
    return apply_adjoint(a, apply_mask(mask, y));
}

namespace {

// Forward differences; the last row/column has zero gradient.
void gradient(std::span<const double> u, std::size_t n, std::vector<double>& gx, std::vector<double>& gy) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t p = i * n + j;
            gx[p] = j + 1 < n ? u[p + 1] - u[p] : 0.0;
            gy[p] = i + 1 < n ? u[p + n] - u[p] : 0.0;
        }
    }
}

// Negative adjoint of gradient().
void divergence(const std::vector<double>& px, const std::vector<double>& py, std::size_t n, std::vector<double>& div) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t p = i * n + j;
            double d = 0.0;
            if (j + 1 < n) d += px[p];
            if (j > 0) d -= px[p - 1];
            if (i + 1 < n) d += py[p];
            if (i > 0) d -= py[p - n];
            div[p] = d;
        }
    }
}

}  // namespace

double total_variation(std::span<const double> u, std::size_t side) {
    if (u.size() != side * side) throw ShapeError("TV buffer size mismatch");
    std::vector<double> gx(u.size()), gy(u.size());
    gradient(u, side, gx, gy);
    double tv = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) tv += std::sqrt(gx[p] * gx[p] + gy[p] * gy[p]);
    return tv;
}

double tv_objective(std::span<const double> u, std::span<const double> x, std::size_t side, double lambda) {
    if (u.size() != x.size()) throw ShapeError("TV objective size mismatch");
    double fit = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) fit += (u[p] - x[p]) * (u[p] - x[p]);
    return 0.5 * fit + total_variation(u, side) / lambda;
}

TvResult tv_denoise_traced(const ImageGrid& x, const TvParams& params, bool record_objective) {
    if (!(params.lambda > 0.0)) throw ConfigError("TV lambda must be positive");
    if (!(params.tol > 0.0)) throw ConfigError("TV tolerance must be positive");
    if (params.max_iter < 1) throw ConfigError("TV max_iter must be positive");

    constexpr double kDualStep = 0.25;
    const std::size_t n = x.side();
    const std::size_t m = x.size();
    const double weight = 1.0 / params.lambda;
    const auto f = x.values();

    std::vector<double> px(m, 0.0), py(m, 0.0), div(m, 0.0), gx(m), gy(m), v(m);
    std::vector<double> u(f.begin(), f.end());
    TvResult result{x, 0, {}};

    for (std::size_t it = 0; it < params.max_iter; ++it) {
        // v = div p - f / weight; u = f - weight * div p = -weight * v
        for (std::size_t p = 0; p < m; ++p) v[p] = div[p] - f[p] / weight;
        gradient(v, n, gx, gy);
        double change = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            const double mag = std::sqrt(gx[p] * gx[p] + gy[p] * gy[p]);
            const double nx = (px[p] + kDualStep * gx[p]) / (1.0 + kDualStep * mag);
            const double ny = (py[p] + kDualStep * gy[p]) / (1.0 + kDualStep * mag);
            change = std::max({change, std::abs(nx - px[p]), std::abs(ny - py[p])});
            px[p] = nx;
            py[p] = ny;
        }
        divergence(px, py, n, div);
        for (std::size_t p = 0; p < m; ++p) u[p] = f[p] - weight * div[p];
        result.iterations = it + 1;
        if (record_objective) result.objective.push_back(tv_objective(u, f, n, params.lambda));
        if (change < params.tol) break;
    }
    result.image = ImageGrid(n, x.pixel_size(), std::move(u));
    return result;
}

ImageGrid tv_denoise(const ImageGrid& x, const TvParams& params) {
    return tv_denoise_traced(x, params, false).image;
}

}  // namespace pat

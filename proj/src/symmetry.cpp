#include "pat/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pat/error.hpp"

namespace pat {

RotationIndex::RotationIndex(std::int64_t r, std::size_t n_ch) : r_(0), n_ch_(n_ch) {
    if (n_ch == 0) throw ConfigError("rotation group order must be positive");
    const auto n = static_cast<std::int64_t>(n_ch);
    r_ = static_cast<std::size_t>(((r % n) + n) % n);
}

double RotationIndex::angle() const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(r_) / static_cast<double>(n_ch_);
}

RotationIndex RotationIndex::compose(const RotationIndex& other) const {
    if (other.n_ch_ != n_ch_) throw ShapeError("cannot compose rotations of different group order");
    return RotationIndex(static_cast<std::int64_t>(r_ + other.r_), n_ch_);
}

void rotate_values(std::span<const double> in, std::size_t side, const RotationIndex& r, std::span<double> out) {
    if (in.size() != side * side || out.size() != in.size()) throw ShapeError("rotation buffer size mismatch");
    if (in.data() == out.data()) throw ShapeError("rotation cannot run in place");
    const std::size_t n = side;

    if (r.is_quarter_turn()) {
        const std::size_t quarters = 4 * r.r() / r.n_ch();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                std::size_t si = i, sj = j;
                switch (quarters) {
                    case 0: break;
                    case 1: si = j; sj = n - 1 - i; break;
                    case 2: si = n - 1 - i; sj = n - 1 - j; break;
                    case 3: si = n - 1 - j; sj = i; break;
                }
                out[i * n + j] = in[si * n + sj];
            }
        }
        return;
    }

    // Pull each output pixel from the inversely rotated position, in pixel
    // units with +y pointing up.
    const double c = std::cos(r.angle());
    const double s = std::sin(r.angle());
    const double centre = (static_cast<double>(n) - 1.0) / 2.0;
    const auto sample = [&](long row, long col) -> double {
        if (row < 0 || col < 0 || row >= static_cast<long>(n) || col >= static_cast<long>(n)) return 0.0;
        return in[static_cast<std::size_t>(row) * n + static_cast<std::size_t>(col)];
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double yo = centre - static_cast<double>(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double xo = static_cast<double>(j) - centre;
            const double xs = c * xo + s * yo;
            const double ys = -s * xo + c * yo;
            const double col = xs + centre;
            const double row = centre - ys;
            const double r0 = std::floor(row);
            const double c0 = std::floor(col);
            const double fr = row - r0;
            const double fc = col - c0;
            const long ir = static_cast<long>(r0);
            const long ic = static_cast<long>(c0);
            out[i * n + j] = (1.0 - fr) * ((1.0 - fc) * sample(ir, ic) + fc * sample(ir, ic + 1)) +
                             fr * ((1.0 - fc) * sample(ir + 1, ic) + fc * sample(ir + 1, ic + 1));
        }
    }
}

ImageGrid rotate_image(const ImageGrid& x, const RotationIndex& r) {
    std::vector<double> out(x.size());
    rotate_values(x.values(), x.side(), r, out);
    return ImageGrid(x.side(), x.pixel_size(), std::move(out));
}

void shift_values(std::span<const double> in, std::size_t n_t, const RotationIndex& r, std::span<double> out) {
    const std::size_t n_ch = r.n_ch();
    if (in.size() != n_ch * n_t || out.size() != in.size()) throw ShapeError("channel shift buffer size mismatch");
    for (std::size_t ch = 0; ch < n_ch; ++ch) {
        const std::size_t dst = (ch + r.r()) % n_ch;
        std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(ch * n_t), n_t,
                    out.begin() + static_cast<std::ptrdiff_t>(dst * n_t));
    }
}

SensorData shift_channels(const SensorData& y, const RotationIndex& r) {
    if (y.n_ch() != r.n_ch()) throw ShapeError("rotation group order does not match channel count");
    std::vector<double> out(y.size());
    shift_values(y.values(), y.n_t(), r, out);
    return SensorData(y.n_ch(), y.n_t(), std::move(out));
}

double equivariance_residual_values(const ModelMatrix& a, std::span<const double> x, const RotationIndex& r,
                                    EquivarianceWorkspace& ws, std::span<double> residual) {
    if (r.n_ch() != a.geometry().n_ch) throw ShapeError("rotation group order does not match channel count");
    if (x.size() != a.cols() || residual.size() != a.rows()) throw ShapeError("equivariance buffer size mismatch");
    ws.ax.resize(a.rows());
    ws.shifted.resize(a.rows());
    ws.rotated.resize(a.cols());
    ws.arot.resize(a.rows());

    a.multiply(x, ws.ax);
    shift_values(ws.ax, a.geometry().n_t, r, ws.shifted);
    rotate_values(x, a.grid_side(), r, ws.rotated);
    a.multiply(ws.rotated, ws.arot);

    double res_sq = 0.0;
    double ax_sq = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i) {
        residual[i] = ws.shifted[i] - ws.arot[i];
        res_sq += residual[i] * residual[i];
        ax_sq += ws.ax[i] * ws.ax[i];
    }
    return std::sqrt(res_sq) / std::max(std::sqrt(ax_sq), std::numeric_limits<double>::min());
}

EquivarianceResidual equivariance_residual(const ModelMatrix& a, const ImageGrid& x, const RotationIndex& r) {
    if (x.side() != a.grid_side()) throw ShapeError("image side does not match model matrix");
    EquivarianceWorkspace ws;
    std::vector<double> residual(a.rows());
    const double rel = equivariance_residual_values(a, x.values(), r, ws, residual);
    return {SensorData(a.geometry().n_ch, a.geometry().n_t, std::move(residual)), rel};
}

}  // namespace pat

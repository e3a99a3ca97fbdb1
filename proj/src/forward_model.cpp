#include "pat/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "pat/error.hpp"

namespace pat {

namespace {

struct Point {
    double x;
    double y;
};

// Sensor positions built from the first quadrant and rotated by exact
// quarter turns, so a 90 degree image rotation reproduces every distance
// bit for bit.
std::vector<Point> sensor_positions(const ArrayGeometry& g) {
    const std::size_t quarter = g.n_ch / 4;
    std::vector<Point> pos(g.n_ch);
    for (std::size_t j = 0; j < quarter; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(g.n_ch);
        Point p{g.radius * std::cos(angle), g.radius * std::sin(angle)};
        for (std::size_t q = 0; q < 4; ++q) {
            pos[q * quarter + j] = p;
            p = Point{-p.y, p.x};
        }
    }
    return pos;
}

}  // namespace

void ArrayGeometry::validate(std::size_t grid_side, double pixel_size) const {
    if (n_ch < 4 || n_ch % 4 != 0) throw ConfigError("n_ch must be a positive multiple of 4");
    if (!(sound_speed > 0.0)) throw ConfigError("sound_speed must be positive");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (n_t < 1) throw ConfigError("n_t must be at least 1");
    if (!std::isfinite(t0)) throw ConfigError("t0 must be finite");
    if (grid_side < 1 || !(pixel_size > 0.0)) throw ConfigError("grid side and pixel_size must be positive");
    const double half_diag = static_cast<double>(grid_side) * pixel_size * std::numbers::sqrt2 / 2.0;
    if (!(radius > half_diag))
        throw ConfigError("radius " + std::to_string(radius) + " does not clear the grid half-diagonal " +
                          std::to_string(half_diag));
}

ArrayGeometry fit_geometry(std::size_t grid_side, double pixel_size, std::size_t n_ch, std::size_t n_t,
                           double radius_factor, double sound_speed) {
    if (n_t < 2) throw ConfigError("fit_geometry needs n_t >= 2");
    if (!(radius_factor > 1.0)) throw ConfigError("radius_factor must exceed 1");
    const double half_diag = static_cast<double>(grid_side) * pixel_size * std::numbers::sqrt2 / 2.0;
    ArrayGeometry g;
    g.n_ch = n_ch;
    g.sound_speed = sound_speed;
    g.radius = radius_factor * half_diag;
    g.n_t = n_t;
    const double d_min = g.radius - half_diag;
    const double d_max = g.radius + half_diag;
    g.dt = (d_max - d_min) / (sound_speed * static_cast<double>(n_t - 1));
    g.t0 = d_min / sound_speed;
    return g;
}

std::size_t recommended_time_bins(std::size_t grid_side) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(grid_side) * std::numbers::sqrt2 / 2.0)) + 1;
}

double geometric_adjoint_scale(const ArrayGeometry& g) {
    return std::numbers::pi * g.radius / (static_cast<double>(g.n_ch) * g.sound_speed * g.dt);
}

ModelMatrix build_model_matrix(const ArrayGeometry& geometry, std::size_t grid_side, double pixel_size,
                               std::optional<double> adjoint_scale) {
    geometry.validate(grid_side, pixel_size);
    if (adjoint_scale && (!(*adjoint_scale > 0.0) || !std::isfinite(*adjoint_scale)))
        throw ConfigError("adjoint_scale must be positive");

    ModelMatrix a;
    a.geometry_ = geometry;
    a.grid_side_ = grid_side;
    a.pixel_size_ = pixel_size;

    const auto sensors = sensor_positions(geometry);
    const double centre = (static_cast<double>(grid_side) - 1.0) / 2.0;
    const double half = geometry.bin_half_width();
    const std::size_t n_t = geometry.n_t;
    const std::size_t n_pix = grid_side * grid_side;

    a.row_ptr_.assign(geometry.n_ch * n_t + 1, 0);
    // Pixels are visited in increasing index order, so a stable bucket by bin
    // keeps every row sorted by column.
    std::vector<std::vector<ModelMatrix::Entry>> bins(n_t);
    for (std::size_t ch = 0; ch < geometry.n_ch; ++ch) {
        for (auto& b : bins) b.clear();
        const Point s = sensors[ch];
        for (std::size_t row = 0; row < grid_side; ++row) {
            const double py = (centre - static_cast<double>(row)) * pixel_size;
            for (std::size_t col = 0; col < grid_side; ++col) {
                const double px = (static_cast<double>(col) - centre) * pixel_size;
                const double dx = px - s.x;
                const double dy = py - s.y;
                const double d = std::sqrt(dx * dx + dy * dy);
                const double kf = std::round((d / geometry.sound_speed - geometry.t0) / geometry.dt);
                for (double kk = kf - 1.0; kk <= kf + 1.0; kk += 1.0) {
                    if (kk < 0.0 || kk >= static_cast<double>(n_t)) continue;
                    const auto k = static_cast<std::size_t>(kk);
                    const double w = 1.0 - std::abs(d - geometry.bin_radius(k)) / half;
                    if (w > 0.0) bins[k].push_back({static_cast<std::uint32_t>(row * grid_side + col), w});
                }
            }
        }
        for (std::size_t k = 0; k < n_t; ++k) {
            a.row_entries_.insert(a.row_entries_.end(), bins[k].begin(), bins[k].end());
            a.row_ptr_[ch * n_t + k + 1] = a.row_entries_.size();
        }
    }

    // Column-major copy; entries within a column are in increasing row order.
    a.col_ptr_.assign(n_pix + 1, 0);
    for (const auto& e : a.row_entries_) ++a.col_ptr_[e.col + 1];
    for (std::size_t c = 0; c < n_pix; ++c) a.col_ptr_[c + 1] += a.col_ptr_[c];
    a.col_entries_.resize(a.row_entries_.size());
    std::vector<std::size_t> fill(a.col_ptr_.begin(), a.col_ptr_.end() - 1);
    for (std::size_t r = 0; r + 1 < a.row_ptr_.size(); ++r) {
        for (std::size_t i = a.row_ptr_[r]; i < a.row_ptr_[r + 1]; ++i) {
            const auto& e = a.row_entries_[i];
            a.col_entries_[fill[e.col]++] = {static_cast<std::uint32_t>(r), e.weight};
        }
    }
    a.adjoint_scale_ = adjoint_scale ? *adjoint_scale : calibrated_adjoint_scale(a);
    return a;
}

double calibrated_adjoint_scale(const ModelMatrix& a) {
    const std::size_t side = a.grid_side();
    const double centre = (static_cast<double>(side) - 1.0) / 2.0;
    const double limit = static_cast<double>(side) / 2.0;
    std::vector<double> u(a.cols(), 0.0), au(a.rows());
    double uu = 0.0;
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j)
            if (std::hypot(static_cast<double>(i) - centre, static_cast<double>(j) - centre) <= limit) {
                u[i * side + j] = 1.0;
                uu += 1.0;
            }
    a.multiply(u, au);
    double aa = 0.0;
    for (double v : au) aa += v * v;
    if (!(aa > 0.0)) return geometric_adjoint_scale(a.geometry());
    return uu / aa;
}

void ModelMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols() || y.size() != rows()) throw ShapeError("A*x dimension mismatch");
    for (std::size_t r = 0; r < rows(); ++r) {
        double acc = 0.0;
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) acc += row_entries_[i].weight * x[row_entries_[i].col];
        y[r] = acc;
    }
}

void ModelMatrix::multiply_transpose(std::span<const double> y, std::span<double> x) const {
    if (y.size() != rows() || x.size() != cols()) throw ShapeError("A^T*y dimension mismatch");
    for (std::size_t c = 0; c < cols(); ++c) {
        double acc = 0.0;
        for (std::size_t i = col_ptr_[c]; i < col_ptr_[c + 1]; ++i) acc += col_entries_[i].weight * y[col_entries_[i].row];
        x[c] = acc;
    }
}

SensorData apply_forward(const ModelMatrix& a, const ImageGrid& x) {
    if (x.side() != a.grid_side()) throw ShapeError("image side does not match model matrix");
    std::vector<double> y(a.rows());
    a.multiply(x.values(), y);
    return SensorData(a.geometry().n_ch, a.geometry().n_t, std::move(y));
}

ImageGrid apply_transpose(const ModelMatrix& a, const SensorData& y) {
    if (y.n_ch() != a.geometry().n_ch || y.n_t() != a.geometry().n_t)
        throw ShapeError("sensor data does not match model matrix");
    std::vector<double> x(a.cols());
    a.multiply_transpose(y.values(), x);
    return ImageGrid(a.grid_side(), a.pixel_size(), std::move(x));
}

ImageGrid apply_adjoint(const ModelMatrix& a, const SensorData& y) {
    ImageGrid x = apply_transpose(a, y);
    for (double& v : x.values()) v *= a.adjoint_scale();
    return x;
}

void export_triplets(const ModelMatrix& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw PersistenceError("cannot open for writing", path.string());
    char line[96];
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (const auto& e : a.row(r)) {
            std::snprintf(line, sizeof line, "%zu %u %.17g\n", r, e.col, e.weight);
            out << line;
        }
    }
    if (!out) throw PersistenceError("write failed", path.string());
}

}  // namespace pat

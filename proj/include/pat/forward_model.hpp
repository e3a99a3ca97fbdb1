#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pat/tensor_io.hpp"

namespace pat {

// Full-circle transducer ring centred on the image grid. Channel ch sits at
// angle 2*pi*ch/n_ch, counterclockwise from +x. Units: mm and microseconds.
struct ArrayGeometry {
    std::size_t n_ch = 64;
    double radius = 6.0;
    double sound_speed = 1.5;
    std::size_t n_t = 128;
    double dt = 0.05;
    double t0 = 0.0;

    // Radius of the arc sampled by time bin k.
    double bin_radius(std::size_t k) const { return (t0 + static_cast<double>(k) * dt) * sound_speed; }
    double bin_half_width() const { return 0.5 * sound_speed * dt; }

    // Throws ConfigError unless the ring is valid for a side x side grid.
    void validate(std::size_t grid_side, double pixel_size) const;
};

// Geometry whose n_t bins exactly span the sensor-to-pixel distances of the
// grid. The ring radius is radius_factor times the grid half-diagonal.
ArrayGeometry fit_geometry(std::size_t grid_side, double pixel_size, std::size_t n_ch, std::size_t n_t,
                           double radius_factor = 1.25, double sound_speed = 1.5);

// Bin count giving time bins about two pixels wide under fit_geometry. Much
// narrower bins alias the pixel-centre sampling and break rotation
// equivariance at non-right angles.
std::size_t recommended_time_bins(std::size_t grid_side);

// pi * radius / (n_ch * v_s * dt). With the unnormalised arc weights this
// leaves back projections hundreds of times brighter than the image.
double geometric_adjoint_scale(const ArrayGeometry& geometry);

// Sparse forward operator A (rows = n_ch*n_t, columns = side^2) stored in CSR,
// with a CSC copy so that A^T is applied as a gather in fixed order.
class ModelMatrix {
public:
    struct Entry {
        std::uint32_t col;
        double weight;
    };

    const ArrayGeometry& geometry() const noexcept { return geometry_; }
    std::size_t grid_side() const noexcept { return grid_side_; }
    double pixel_size() const noexcept { return pixel_size_; }
    double adjoint_scale() const noexcept { return adjoint_scale_; }

    std::size_t rows() const noexcept { return row_ptr_.size() - 1; }
    std::size_t cols() const noexcept { return grid_side_ * grid_side_; }
    std::size_t nnz() const noexcept { return row_entries_.size(); }

    std::span<const Entry> row(std::size_t r) const {
        return std::span<const Entry>(row_entries_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
    }

    // y = A x on flat buffers.
    void multiply(std::span<const double> x, std::span<double> y) const;
    // x = A^T y on flat buffers (no adjoint_scale).
    void multiply_transpose(std::span<const double> y, std::span<double> x) const;

    friend ModelMatrix build_model_matrix(const ArrayGeometry&, std::size_t, double, std::optional<double>);

private:
    struct ColEntry {
        std::uint32_t row;
        double weight;
    };

    ArrayGeometry geometry_;
    std::size_t grid_side_ = 0;
    double pixel_size_ = 1.0;
    double adjoint_scale_ = 1.0;
    std::vector<std::size_t> row_ptr_;
    std::vector<Entry> row_entries_;
    std::vector<std::size_t> col_ptr_;
    std::vector<ColEntry> col_entries_;
};

// Arc-binning model: row (ch, k) holds every pixel whose centre lies within
// half a bin of radius r_k from sensor ch, weighted by the triangular kernel
// 1 - |d - r_k| / (v_s*dt/2). grid_side may be 1 for probe matrices.
// Without an explicit adjoint_scale, calibrated_adjoint_scale is used.
ModelMatrix build_model_matrix(const ArrayGeometry& geometry, std::size_t grid_side, double pixel_size,
                               std::optional<double> adjoint_scale = std::nullopt);

// ||u||^2 / ||A u||^2 with u the indicator of the inscribed disk, so that
// <u, A_dagger A u> = <u, u>.
double calibrated_adjoint_scale(const ModelMatrix& a);

SensorData apply_forward(const ModelMatrix& a, const ImageGrid& x);

// Back projection: adjoint_scale * A^T y.
ImageGrid apply_adjoint(const ModelMatrix& a, const SensorData& y);

// Plain A^T y, used by likelihood gradients.
ImageGrid apply_transpose(const ModelMatrix& a, const SensorData& y);

// One "row col weight" triplet per line, row-major.
void export_triplets(const ModelMatrix& a, const std::filesystem::path& path);

}  // namespace pat

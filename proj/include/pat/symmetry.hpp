#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "pat/forward_model.hpp"
#include "pat/tensor_io.hpp"

namespace pat {

// Element r of the cyclic group of order n_ch: a rotation by 2*pi*r/n_ch.
class RotationIndex {
public:
    RotationIndex(std::int64_t r, std::size_t n_ch);

    std::size_t r() const noexcept { return r_; }
    std::size_t n_ch() const noexcept { return n_ch_; }
    double angle() const noexcept;
    // True for multiples of 90 degrees.
    bool is_quarter_turn() const noexcept { return (4 * r_) % n_ch_ == 0; }

    RotationIndex compose(const RotationIndex& other) const;

private:
    std::size_t r_;
    std::size_t n_ch_;
};

// Counterclockwise rotation about the grid centre. Quarter turns are exact
// permutations; other angles use bilinear interpolation with zero outside.
ImageGrid rotate_image(const ImageGrid& x, const RotationIndex& r);
void rotate_values(std::span<const double> in, std::size_t side, const RotationIndex& r, std::span<double> out);

// Channel i moves to channel (i + r) mod n_ch.
SensorData shift_channels(const SensorData& y, const RotationIndex& r);
void shift_values(std::span<const double> in, std::size_t n_t, const RotationIndex& r, std::span<double> out);

struct EquivarianceResidual {
    SensorData residual;
    double relative_norm;
};

// shift(A x, r) - A rotate(x, r), and its norm relative to ||A x||.
EquivarianceResidual equivariance_residual(const ModelMatrix& a, const ImageGrid& x, const RotationIndex& r);

// Same quantity on a flat image buffer, reusing caller scratch space.
struct EquivarianceWorkspace {
    std::vector<double> ax, shifted, rotated, arot;
};
double equivariance_residual_values(const ModelMatrix& a, std::span<const double> x, const RotationIndex& r,
                                    EquivarianceWorkspace& ws, std::span<double> residual);

}  // namespace pat

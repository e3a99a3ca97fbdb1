#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace pat {

// Square side x side image, row-major with row 0 at the top.
class ImageGrid {
public:
    ImageGrid(std::size_t side, double pixel_size, std::vector<double> values);

    static ImageGrid zeros(std::size_t side, double pixel_size = 1.0);

    std::size_t side() const noexcept { return side_; }
    std::size_t size() const noexcept { return values_.size(); }
    double pixel_size() const noexcept { return pixel_size_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double at(std::size_t row, std::size_t col) const { return values_[row * side_ + col]; }
    double& at(std::size_t row, std::size_t col) { return values_[row * side_ + col]; }

    bool same_shape(const ImageGrid& other) const noexcept { return side_ == other.side_; }

    friend bool operator==(const ImageGrid& a, const ImageGrid& b) {
        return a.side_ == b.side_ && a.values_ == b.values_;
    }

private:
    std::size_t side_;
    double pixel_size_;
    std::vector<double> values_;
};

// n_ch time series of n_t samples, channel-major.
class SensorData {
public:
    SensorData(std::size_t n_ch, std::size_t n_t, std::vector<double> values);

    static SensorData zeros(std::size_t n_ch, std::size_t n_t);

    std::size_t n_ch() const noexcept { return n_ch_; }
    std::size_t n_t() const noexcept { return n_t_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    std::span<const double> channel(std::size_t ch) const {
        return std::span<const double>(values_).subspan(ch * n_t_, n_t_);
    }
    std::span<double> channel(std::size_t ch) {
        return std::span<double>(values_).subspan(ch * n_t_, n_t_);
    }

    bool same_shape(const SensorData& other) const noexcept {
        return n_ch_ == other.n_ch_ && n_t_ == other.n_t_;
    }

    friend bool operator==(const SensorData& a, const SensorData& b) {
        return a.n_ch_ == b.n_ch_ && a.n_t_ == b.n_t_ && a.values_ == b.values_;
    }

private:
    std::size_t n_ch_;
    std::size_t n_t_;
    std::vector<double> values_;
};

using Container = std::variant<ImageGrid, SensorData>;

// PATB layout: "PATB", version 1, kind (0 image, 1 sensor), two u32 dims,
// then f64 values. All integers and floats little-endian.
//
// Images store (side, side); sensor data stores (n_ch, n_t). Pixel size is
// not part of the format.
void save_container(const std::filesystem::path& path, const Container& payload);
Container load_container(const std::filesystem::path& path, double pixel_size = 1.0);

// Convenience loaders that also check the kind byte.
ImageGrid load_image(const std::filesystem::path& path, double pixel_size = 1.0);
SensorData load_sensor(const std::filesystem::path& path);

// Binary 8-bit PGM, linearly mapping [min, max] to [0, 255] with round half
// up. A constant image maps to 128.
void export_pgm(const ImageGrid& image, const std::filesystem::path& path);

}  // namespace pat

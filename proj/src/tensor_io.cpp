#include "pat/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "pat/error.hpp"

namespace pat {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'A', 'T', 'B'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kKindImage = 0;
constexpr std::uint8_t kKindSensor = 1;
constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 4 + 4;

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError(std::string(what) + " contains a non-finite value");
    }
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
}

double get_f64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

std::uint32_t checked_dim(std::size_t d) {
    if (d > UINT32_MAX) throw ConfigError("dimension exceeds u32 range");
    return static_cast<std::uint32_t>(d);
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    if (path.empty()) throw PersistenceError("cannot write to empty path", "");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot open for writing", path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw PersistenceError("write failed", path.string());
}

}  // namespace

ImageGrid::ImageGrid(std::size_t side, double pixel_size, std::vector<double> values)
    : side_(side), pixel_size_(pixel_size), values_(std::move(values)) {
    if (side < 2) throw ConfigError("image side must be at least 2");
    if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) throw ConfigError("pixel_size must be positive");
    if (values_.size() != side * side) throw ShapeError("image buffer length does not equal side^2");
    require_finite(values_, "image");
}

ImageGrid ImageGrid::zeros(std::size_t side, double pixel_size) {
    return ImageGrid(side, pixel_size, std::vector<double>(side * side, 0.0));
}

SensorData::SensorData(std::size_t n_ch, std::size_t n_t, std::vector<double> values)
    : n_ch_(n_ch), n_t_(n_t), values_(std::move(values)) {
    if (n_ch == 0 || n_t == 0) throw ConfigError("sensor data needs at least one channel and sample");
    if (values_.size() != n_ch * n_t) throw ShapeError("sensor buffer length does not equal n_ch*n_t");
    require_finite(values_, "sensor data");
}

SensorData SensorData::zeros(std::size_t n_ch, std::size_t n_t) {
    return SensorData(n_ch, n_t, std::vector<double>(n_ch * n_t, 0.0));
}

void save_container(const std::filesystem::path& path, const Container& payload) {
    std::string bytes(kMagic.begin(), kMagic.end());
    bytes.push_back(static_cast<char>(kVersion));
    std::span<const double> values;
    if (const auto* img = std::get_if<ImageGrid>(&payload)) {
        bytes.push_back(static_cast<char>(kKindImage));
        put_u32(bytes, checked_dim(img->side()));
        put_u32(bytes, checked_dim(img->side()));
        values = img->values();
    } else {
        const auto& sensor = std::get<SensorData>(payload);
        bytes.push_back(static_cast<char>(kKindSensor));
        put_u32(bytes, checked_dim(sensor.n_ch()));
        put_u32(bytes, checked_dim(sensor.n_t()));
        values = sensor.values();
    }
    bytes.reserve(bytes.size() + 8 * values.size());
    for (double v : values) put_f64(bytes, v);
    write_bytes(path, bytes);
}

Container load_container(const std::filesystem::path& path, double pixel_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistenceError("cannot open for reading", path.string());
    const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());

    if (raw.size() < kMagic.size() || std::memcmp(p, kMagic.data(), kMagic.size()) != 0)
        throw FormatError("magic", "expected PATB in " + path.string());
    if (raw.size() < kHeaderBytes) throw FormatError("length", "header truncated in " + path.string());
    if (p[4] != kVersion) throw FormatError("version", "unsupported version " + std::to_string(p[4]));
    const std::uint8_t kind = p[5];
    if (kind != kKindImage && kind != kKindSensor)
        throw FormatError("kind", "unknown kind byte " + std::to_string(kind));

    const std::uint64_t d0 = get_u32(p + 6);
    const std::uint64_t d1 = get_u32(p + 10);
    const std::uint64_t count = d0 * d1;
    if (raw.size() != kHeaderBytes + 8 * count)
        throw FormatError("length", "expected " + std::to_string(count) + " values in " + path.string());

    std::vector<double> values(count);
    for (std::uint64_t i = 0; i < count; ++i) values[i] = get_f64(p + kHeaderBytes + 8 * i);

    if (kind == kKindImage) {
        if (d0 != d1) throw FormatError("dims", "image must be square");
        return ImageGrid(d0, pixel_size, std::move(values));
    }
    return SensorData(d0, d1, std::move(values));
}

ImageGrid load_image(const std::filesystem::path& path, double pixel_size) {
    auto c = load_container(path, pixel_size);
    if (auto* img = std::get_if<ImageGrid>(&c)) return std::move(*img);
    throw FormatError("kind", "expected image container in " + path.string());
}

SensorData load_sensor(const std::filesystem::path& path) {
    auto c = load_container(path);
    if (auto* s = std::get_if<SensorData>(&c)) return std::move(*s);
    throw FormatError("kind", "expected sensor container in " + path.string());
}

void export_pgm(const ImageGrid& image, const std::filesystem::path& path) {
    const auto values = image.values();
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;

    std::string bytes = "P5\n" + std::to_string(image.side()) + " " + std::to_string(image.side()) + "\n255\n";
    bytes.reserve(bytes.size() + values.size());
    for (double v : values) {
        int level = 128;
        if (range > 0.0) level = static_cast<int>(std::floor((v - lo) / range * 255.0 + 0.5));
        bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0, 255))));
    }
    write_bytes(path, bytes);
}

}  // namespace pat

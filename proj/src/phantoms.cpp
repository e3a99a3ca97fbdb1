#include "pat/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "pat/error.hpp"

namespace pat {

PhantomKind parse_phantom_kind(std::string_view name) {
    if (name == "disks") return PhantomKind::disks;
    if (name == "rings") return PhantomKind::rings;
    if (name == "vessels") return PhantomKind::vessels;
    throw ConfigError("unknown phantom kind '" + std::string(name) + "'");
}

std::string_view to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::disks: return "disks";
        case PhantomKind::rings: return "rings";
        case PhantomKind::vessels: return "vessels";
    }
    return "unknown";
}

void PhantomSpec::validate() const {
    if (side < 2) throw ConfigError("phantom side must be at least 2");
    if (!(pixel_size > 0.0)) throw ConfigError("phantom pixel_size must be positive");
    if (!(margin >= 0.0 && margin < 0.5)) throw ConfigError("phantom margin must lie in [0, 0.5)");
    if (!(radius_min > 0.0 && radius_max >= radius_min)) throw ConfigError("phantom radius range invalid");
    if (!(intensity_min >= 0.0 && intensity_max >= intensity_min && intensity_max <= 1.0))
        throw ConfigError("phantom intensity range must lie within [0, 1]");
    if (!(thickness > 0.0)) throw ConfigError("phantom thickness must be positive");
}

namespace {

class Canvas {
public:
    explicit Canvas(const PhantomSpec& spec)
        : n_(spec.side), centre_((static_cast<double>(spec.side) - 1.0) / 2.0), values_(spec.side * spec.side, 0.0) {}

    // Pixel-unit coordinates of pixel (i, j) relative to the centre, +y up.
    double px(std::size_t j) const { return static_cast<double>(j) - centre_; }
    double py(std::size_t i) const { return centre_ - static_cast<double>(i); }

    template <typename Shape>
    void paint(double intensity, Shape&& inside) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (inside(px(j), py(i))) values_[i * n_ + j] = std::max(values_[i * n_ + j], intensity);
    }

    void clip_to_disk(double radius) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (px(j) * px(j) + py(i) * py(i) > radius * radius) values_[i * n_ + j] = 0.0;
    }

    std::vector<double> take() { return std::move(values_); }

private:
    std::size_t n_;
    double centre_;
    std::vector<double> values_;
};

double draw(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Uniform point in the disk of the given radius.
std::pair<double, double> draw_point(Rng& rng, double radius) {
    const double rho = radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    return {rho * std::cos(phi), rho * std::sin(phi)};
}

}  // namespace

ImageGrid make_phantom(const PhantomSpec& spec) {
    spec.validate();
    const double side = static_cast<double>(spec.side);
    const double allowed = (0.5 - spec.margin) * side;
    Canvas canvas(spec);
    Rng rng(spec.seed);

    switch (spec.kind) {
        case PhantomKind::disks:
            for (std::size_t k = 0; k < spec.count; ++k) {
                const double radius = std::min(draw(rng, spec.radius_min, spec.radius_max) * side, allowed);
                const auto [cx, cy] = draw_point(rng, allowed - radius);
                const double level = draw(rng, spec.intensity_min, spec.intensity_max);
                canvas.paint(level, [&](double x, double y) {
                    return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius;
                });
            }
            break;
        case PhantomKind::rings: {
            const double half_wall = 0.5 * spec.thickness * side;
            const std::size_t rings = spec.centered ? 1 : spec.count;
            for (std::size_t k = 0; k < rings; ++k) {
                const double outer = std::min(draw(rng, spec.radius_min, spec.radius_max) * side + half_wall, allowed);
                double cx = 0.0, cy = 0.0;
                if (!spec.centered) std::tie(cx, cy) = draw_point(rng, allowed - outer);
                const double mid = outer - half_wall;
                const double level = draw(rng, spec.intensity_min, spec.intensity_max);
                canvas.paint(level, [&](double x, double y) {
                    const double d = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
                    return std::abs(d - mid) <= half_wall;
                });
            }
            break;
        }
        case PhantomKind::vessels: {
            const double tube = std::max(0.5, spec.thickness * side);
            for (std::size_t k = 0; k < spec.count; ++k) {
                auto [x, y] = draw_point(rng, allowed - tube);
                double heading = 2.0 * std::numbers::pi * rng.uniform();
                const double level = draw(rng, spec.intensity_min, spec.intensity_max);
                const std::size_t max_steps = 4 * spec.side;
                for (std::size_t step = 0; step < max_steps; ++step) {
                    if (std::sqrt(x * x + y * y) > allowed - tube) break;
                    const double sx = x, sy = y;
                    canvas.paint(level, [&](double px, double py) {
                        return (px - sx) * (px - sx) + (py - sy) * (py - sy) <= tube * tube;
                    });
                    heading += 0.35 * (2.0 * rng.uniform() - 1.0);
                    x += 0.75 * std::cos(heading);
                    y += 0.75 * std::sin(heading);
                }
            }
            break;
        }
    }
    canvas.clip_to_disk(allowed);
    return ImageGrid(spec.side, spec.pixel_size, canvas.take());
}

std::vector<std::filesystem::path> make_dataset(const PhantomSpec& spec, std::size_t n,
                                                const std::filesystem::path& out_dir) {
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw PersistenceError("cannot create directory", out_dir.string());

    std::vector<std::filesystem::path> entries;
    for (std::size_t i = 0; i < n; ++i) {
        PhantomSpec item = spec;
        item.seed.value = spec.seed.value + i;
        char name[48];
        std::snprintf(name, sizeof name, "phantom_%03zu.patb", i);
        save_container(out_dir / name, make_phantom(item));
        entries.emplace_back(name);
    }
    const auto manifest = out_dir / "manifest.txt";
    std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot open for writing", manifest.string());
    for (const auto& e : entries) out << e.generic_string() << '\n';
    if (!out) throw PersistenceError("write failed", manifest.string());
    return entries;
}

}  // namespace pat

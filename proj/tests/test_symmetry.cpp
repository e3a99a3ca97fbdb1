#include <doctest.h>

#include "pat/error.hpp"
#include "pat/phantoms.hpp"
#include "pat/symmetry.hpp"
#include "test_support.hpp"

using namespace pat;

namespace {

ImageGrid blob(std::size_t side, double width, double ox = 0.0, double oy = 0.0) {
    ImageGrid img = ImageGrid::zeros(side, 0.1);
    const double c = (static_cast<double>(side) - 1.0) / 2.0;
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            const double x = static_cast<double>(j) - c - ox;
            const double y = c - static_cast<double>(i) - oy;
            img.at(i, j) = std::exp(-(x * x + y * y) / (2.0 * width * width));
        }
    }
    return img;
}

double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace

TEST_CASE("rotation index is cyclic") {
    CHECK(RotationIndex(8, 8).r() == 0);
    CHECK(RotationIndex(-1, 8).r() == 7);
    CHECK(RotationIndex(3, 8).compose(RotationIndex(7, 8)).r() == 2);
    CHECK(RotationIndex(2, 8).is_quarter_turn());
    CHECK_FALSE(RotationIndex(1, 8).is_quarter_turn());
}

TEST_CASE("quarter turn permutes pixels counterclockwise") {
    const ImageGrid x(2, 1.0, {1, 2, 3, 4});  // [[a,b],[c,d]]
    CHECK(rotate_image(x, RotationIndex(1, 4)).values()[0] == 2);
    const auto r = rotate_image(x, RotationIndex(1, 4));
    CHECK(std::vector<double>(r.values().begin(), r.values().end()) == std::vector<double>{2, 4, 1, 3});
    CHECK(rotate_image(x, RotationIndex(0, 4)) == x);

    const auto img = testing::random_image(9, 3);
    for (std::size_t q = 1; q < 4; ++q) {
        ImageGrid step = img;
        for (std::size_t k = 0; k < q; ++k) step = rotate_image(step, RotationIndex(1, 4));
        CHECK(rotate_image(img, RotationIndex(static_cast<std::int64_t>(q), 4)) == step);
    }
    ImageGrid full = img;
    for (int k = 0; k < 4; ++k) full = rotate_image(full, RotationIndex(16, 64));
    CHECK(full == img);
}

TEST_CASE("quarter turns preserve energy exactly") {
    const auto img = testing::random_image(12, 5);
    auto sorted = [](const ImageGrid& g) {
        std::vector<double> v(g.values().begin(), g.values().end());
        std::sort(v.begin(), v.end());
        return v;
    };
    for (std::int64_t r : {8, 16, 24}) CHECK(sorted(rotate_image(img, RotationIndex(r, 32))) == sorted(img));
}

TEST_CASE("bilinear rotation drift over a full turn") {
    const auto x = blob(32, 3.0, 2.0, -1.5);
    ImageGrid y = x;
    for (int k = 0; k < 8; ++k) y = rotate_image(y, RotationIndex(1, 8));
    const double drift = max_abs_diff(x, y);
    MESSAGE("eight 45-degree rotations drift " << drift);
    CHECK(drift <= 0.15);
    CHECK(drift > 0.0);
}

TEST_CASE("channel shift is an exact group action") {
    const SensorData y(4, 3, testing::random_vector(12, 2));
    CHECK(shift_channels(y, RotationIndex(0, 4)) == y);
    CHECK(shift_channels(y, RotationIndex(4, 4)) == y);
    const auto s = shift_channels(y, RotationIndex(1, 4));
    for (std::size_t k = 0; k < 3; ++k) CHECK(s.channel(1)[k] == y.channel(0)[k]);
    CHECK(s.channel(0)[0] == y.channel(3)[0]);

    const SensorData z(12, 5, testing::random_vector(60, 3));
    for (std::int64_t a = 0; a < 12; ++a)
        for (std::int64_t b = 0; b < 12; ++b)
            CHECK(shift_channels(shift_channels(z, RotationIndex(a, 12)), RotationIndex(b, 12)) ==
                  shift_channels(z, RotationIndex(a + b, 12)));
    CHECK_THROWS_AS(shift_channels(z, RotationIndex(1, 8)), ShapeError);
}

TEST_CASE("equivariance at quarter turns is exact") {
    const auto g = fit_geometry(16, 0.1, 32, 48);
    const auto a = build_model_matrix(g, 16, 0.1);
    const auto zero = equivariance_residual(a, ImageGrid::zeros(16, 0.1), RotationIndex(3, 32));
    CHECK(zero.relative_norm == 0.0);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto x = testing::random_image(16, seed);
        for (std::int64_t r : {8, 16, 24}) CHECK(equivariance_residual(a, x, RotationIndex(r, 32)).relative_norm <= 1e-10);
    }

    PhantomSpec ring;
    ring.kind = PhantomKind::rings;
    ring.side = 16;
    ring.centered = true;
    ring.radius_min = ring.radius_max = 0.2;
    CHECK(equivariance_residual(a, make_phantom(ring), RotationIndex(8, 32)).relative_norm <= 1e-10);
}

TEST_CASE("equivariance at general angles is interpolation limited") {
    // Two-pixel-wide time bins; narrower bins alias the pixel-centre sampling.
    const auto g = fit_geometry(32, 0.1, 32, recommended_time_bins(32));
    CHECK(g.sound_speed * g.dt == doctest::Approx(0.2).epsilon(0.05));
    const auto a = build_model_matrix(g, 32, 0.1);
    const auto x = blob(32, 3.0, 3.0, 2.0);
    for (std::int64_t r : {1, 3, 5, 11}) {
        const double rel = equivariance_residual(a, x, RotationIndex(r, 32)).relative_norm;
        MESSAGE("r=" << r << " relative residual " << rel);
        CHECK(rel <= 0.05);
        CHECK(rel > 0.0);
    }
    CHECK_THROWS_AS(equivariance_residual(a, x, RotationIndex(1, 16)), ShapeError);
}

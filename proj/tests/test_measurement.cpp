#include <doctest.h>

#include <fstream>

#include "pat/error.hpp"
#include "pat/measurement.hpp"
#include "test_support.hpp"

using namespace pat;

TEST_CASE("uniform mask") {
    const auto m = make_mask(SamplingPattern::uniform, 16, 512, RngSeed{0});
    REQUIRE(m.kept().size() == 16);
    for (std::size_t i = 0; i < 16; ++i) CHECK(m.kept()[i] == 32 * i);
    const auto odd = make_mask(SamplingPattern::uniform, 3, 8, RngSeed{0});
    CHECK(odd.kept() == std::vector<std::size_t>{0, 2, 5});
}

TEST_CASE("limited view mask") {
    const auto m = make_mask(SamplingPattern::limited_view, 64, 512, RngSeed{0});
    REQUIRE(m.kept().size() == 64);
    for (std::size_t i = 0; i < 64; ++i) CHECK(m.kept()[i] == i);
    const auto wrapped = make_mask(SamplingPattern::limited_view, 4, 8, RngSeed{0}, 6);
    CHECK(wrapped.kept() == std::vector<std::size_t>{0, 1, 6, 7});
}

TEST_CASE("random mask is a seeded draw without replacement") {
    const auto a = make_mask(SamplingPattern::random, 16, 512, RngSeed{11});
    const auto b = make_mask(SamplingPattern::random, 16, 512, RngSeed{11});
    const auto c = make_mask(SamplingPattern::random, 16, 512, RngSeed{12});
    CHECK(a == b);
    CHECK_FALSE(a == c);
    REQUIRE(a.kept().size() == 16);
    for (std::size_t i = 1; i < 16; ++i) CHECK(a.kept()[i] > a.kept()[i - 1]);
    CHECK(a.kept().back() < 512);

    const auto all = make_mask(SamplingPattern::random, 8, 8, RngSeed{5});
    CHECK(all == ChannelMask::full(8));
}

TEST_CASE("mask validation") {
    CHECK_THROWS_AS(make_mask(SamplingPattern::uniform, 0, 8, RngSeed{0}), ConfigError);
    CHECK_THROWS_AS(make_mask(SamplingPattern::uniform, 9, 8, RngSeed{0}), ConfigError);
    CHECK_THROWS_AS(ChannelMask(4, {1, 1}), ConfigError);
    CHECK_THROWS_AS(ChannelMask(4, {2, 1}), ConfigError);
    CHECK_THROWS_AS(ChannelMask(4, {4}), ConfigError);
    CHECK_THROWS_AS(parse_pattern("spiral"), ConfigError);
    CHECK(parse_pattern("limited_view") == SamplingPattern::limited_view);
}

TEST_CASE("apply_mask zero-fills and is an orthogonal projection") {
    const SensorData y(4, 3, testing::random_vector(12, 1));
    CHECK(apply_mask(ChannelMask::full(4), y) == y);

    const ChannelMask first(4, {0});
    const auto m = apply_mask(first, y);
    for (std::size_t k = 0; k < 3; ++k) CHECK(m.channel(0)[k] == y.channel(0)[k]);
    for (std::size_t ch = 1; ch < 4; ++ch)
        for (double v : m.channel(ch)) CHECK(v == 0.0);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mask = make_mask(SamplingPattern::random, 1 + seed % 4, 4, RngSeed{seed});
        const SensorData a(4, 3, testing::random_vector(12, 100 + seed));
        const SensorData b(4, 3, testing::random_vector(12, 200 + seed));
        CHECK(apply_mask(mask, apply_mask(mask, a)) == apply_mask(mask, a));
        CHECK(testing::dot(apply_mask(mask, a).values(), b.values()) ==
              doctest::Approx(testing::dot(a.values(), apply_mask(mask, b).values())).epsilon(1e-14));
    }
    CHECK_THROWS_AS(apply_mask(ChannelMask::full(5), y), ShapeError);
}

TEST_CASE("simulate_measurement") {
    const auto g = fit_geometry(16, 0.1, 8, 32);
    const auto a = build_model_matrix(g, 16, 0.1);
    const auto x = testing::random_image(16, 4);
    const auto mask = make_mask(SamplingPattern::uniform, 4, 8, RngSeed{0});

    CHECK(simulate_measurement(a, x, mask, 0.0, RngSeed{1}) == apply_mask(mask, apply_forward(a, x)));
    CHECK(simulate_measurement(a, x, ChannelMask::full(8), 0.0, RngSeed{1}) == apply_forward(a, x));
    CHECK_THROWS_AS(simulate_measurement(a, x, mask, -1.0, RngSeed{1}), ConfigError);

    const auto n1 = simulate_measurement(a, x, mask, 0.3, RngSeed{9});
    CHECK(n1 == simulate_measurement(a, x, mask, 0.3, RngSeed{9}));
    for (std::size_t ch = 0; ch < 8; ++ch)
        if (!mask.contains(ch))
            for (double v : n1.channel(ch)) CHECK(v == 0.0);
}

TEST_CASE("noise level matches the requested std") {
    // 4 kept channels x 25000 samples = 1e5 noise draws.
    ArrayGeometry g = fit_geometry(4, 0.1, 8, 25000);
    const auto a = build_model_matrix(g, 4, 0.1);
    const auto mask = make_mask(SamplingPattern::uniform, 4, 8, RngSeed{0});
    const double s = 0.7;
    const auto y = simulate_measurement(a, ImageGrid::zeros(4, 0.1), mask, s, RngSeed{21});
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (std::size_t ch : mask.kept()) {
        for (double v : y.channel(ch)) {
            sum += v;
            sq += v * v;
            ++count;
        }
    }
    CHECK(count == 100000);
    const double mean = sum / static_cast<double>(count);
    const double sd = std::sqrt(sq / static_cast<double>(count) - mean * mean);
    CHECK(std::abs(sd - s) <= 0.05 * s);
}

TEST_CASE("mask file round trip") {
    const auto dir = testing::scratch_dir("mask_io");
    const auto mask = make_mask(SamplingPattern::random, 5, 32, RngSeed{3});
    save_mask(mask, dir / "m.txt");
    CHECK(load_mask(dir / "m.txt") == mask);

    std::ofstream(dir / "bad.txt") << "4\n1\nx\n";
    CHECK_THROWS_AS(load_mask(dir / "bad.txt"), FormatError);
    std::ofstream(dir / "range.txt") << "4\n7\n";
    CHECK_THROWS_AS(load_mask(dir / "range.txt"), FormatError);
}

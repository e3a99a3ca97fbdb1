#include <doctest.h>

#include <fstream>
#include <sstream>

#include "pat/error.hpp"
#include "pat/phantoms.hpp"
#include "pat/symmetry.hpp"
#include "test_support.hpp"

using namespace pat;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("support and range") {
    for (const auto kind : {PhantomKind::disks, PhantomKind::rings, PhantomKind::vessels}) {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            PhantomSpec spec;
            spec.kind = kind;
            spec.side = 48;
            spec.seed = RngSeed{seed};
            const auto img = make_phantom(spec);
            const double centre = 23.5, limit = (0.5 - spec.margin) * 48.0;
            double mass = 0.0;
            for (std::size_t i = 0; i < 48; ++i)
                for (std::size_t j = 0; j < 48; ++j) {
                    const double v = img.at(i, j);
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                    if (std::hypot(i - centre, j - centre) > limit) CHECK(v == 0.0);
                    mass += v;
                }
            CHECK(mass > 0.0);
        }
    }
}

TEST_CASE("edge cases and determinism") {
    PhantomSpec spec;
    spec.count = 0;
    const auto empty = make_phantom(spec);
    for (double v : empty.values()) CHECK(v == 0.0);

    spec.count = 5;
    spec.kind = PhantomKind::vessels;
    spec.seed = RngSeed{17};
    CHECK(make_phantom(spec) == make_phantom(spec));
    auto other = spec;
    other.seed = RngSeed{18};
    CHECK_FALSE(make_phantom(spec) == make_phantom(other));

    PhantomSpec ring;
    ring.kind = PhantomKind::rings;
    ring.centered = true;
    for (std::size_t side : {32, 33, 64}) {
        ring.side = side;
        const auto img = make_phantom(ring);
        CHECK(rotate_image(img, RotationIndex(1, 4)) == img);
        CHECK(rotate_image(img, RotationIndex(2, 4)) == img);
    }

    CHECK(parse_phantom_kind("rings") == PhantomKind::rings);
    CHECK(to_string(PhantomKind::vessels) == "vessels");
    CHECK_THROWS_AS(parse_phantom_kind("stars"), ConfigError);
    auto bad = spec;
    bad.margin = 0.6;
    CHECK_THROWS_AS(make_phantom(bad), ConfigError);
    bad = spec;
    bad.intensity_max = 1.5;
    CHECK_THROWS_AS(make_phantom(bad), ConfigError);
    bad = spec;
    bad.side = 1;
    CHECK_THROWS_AS(make_phantom(bad), ConfigError);
}

TEST_CASE("dataset") {
    PhantomSpec spec;
    spec.kind = PhantomKind::rings;
    spec.side = 24;
    spec.seed = RngSeed{40};

    const auto empty = testing::scratch_dir("dataset_empty");
    CHECK(make_dataset(spec, 0, empty).empty());
    CHECK(slurp(empty / "manifest.txt").empty());
    CHECK(std::distance(std::filesystem::directory_iterator(empty), {}) == 1);

    const auto dir = testing::scratch_dir("dataset");
    const auto files = make_dataset(spec, 3, dir);
    REQUIRE(files.size() == 3);
    CHECK(slurp(dir / "manifest.txt") == "phantom_000.patb\nphantom_001.patb\nphantom_002.patb\n");
    for (std::size_t i = 0; i < 3; ++i) {
        auto s = spec;
        s.seed = RngSeed{40 + i};
        CHECK(load_image(dir / files[i], spec.pixel_size) == make_phantom(s));
    }
    const auto again = testing::scratch_dir("dataset_again");
    make_dataset(spec, 3, again);
    for (const auto& f : files) CHECK(slurp(dir / f) == slurp(again / f));

    CHECK_THROWS_AS(make_dataset(spec, 2, dir / "manifest.txt" / "sub"), PersistenceError);
}

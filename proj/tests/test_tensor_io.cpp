#include <doctest.h>

#include <fstream>
#include <iterator>

#include "pat/error.hpp"
#include "pat/rng.hpp"
#include "pat/tensor_io.hpp"
#include "test_support.hpp"

using namespace pat;
namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("image container layout and round trip") {
    const auto dir = testing::scratch_dir("tensor_io_image");
    const ImageGrid img(2, 0.1, {0.0, 0.5, 1.0, 0.25});
    save_container(dir / "a.patb", img);

    const auto bytes = read_all(dir / "a.patb");
    CHECK(bytes.size() == 46);
    CHECK(bytes.substr(0, 4) == "PATB");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 2);
    CHECK(bytes[10] == 2);

    const auto loaded = load_image(dir / "a.patb");
    CHECK(loaded == img);
}

TEST_CASE("sensor container of zeros") {
    const auto dir = testing::scratch_dir("tensor_io_sensor");
    save_container(dir / "s.patb", SensorData::zeros(4, 8));
    CHECK(read_all(dir / "s.patb")[5] == 1);
    const auto loaded = load_sensor(dir / "s.patb");
    CHECK(loaded.n_ch() == 4);
    CHECK(loaded.n_t() == 8);
    CHECK(loaded.size() == 32);
    for (double v : loaded.values()) CHECK(v == 0.0);
}

TEST_CASE("round trip is bit exact for arbitrary doubles") {
    const auto dir = testing::scratch_dir("tensor_io_bits");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto v = testing::random_vector(5 * 7, seed, -1e300, 1e300);
        v[0] = -0.0;
        v[1] = 4.9406564584124654e-324;
        v[2] = std::nextafter(1.0, 2.0);
        const SensorData y(5, 7, v);
        save_container(dir / "r.patb", y);
        const auto back = load_sensor(dir / "r.patb");
        REQUIRE(back.size() == y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(std::bit_cast<std::uint64_t>(back.values()[i]) == std::bit_cast<std::uint64_t>(y.values()[i]));
    }
}

TEST_CASE("persistence errors") {
    CHECK_THROWS_AS(save_container("", ImageGrid::zeros(2)), PersistenceError);
    CHECK_THROWS_AS(save_container("/nonexistent_dir_pat/x.patb", ImageGrid::zeros(2)), PersistenceError);
    CHECK_THROWS_AS(load_container("/nonexistent_dir_pat/x.patb"), PersistenceError);
}

TEST_CASE("format errors name the field") {
    const auto dir = testing::scratch_dir("tensor_io_format");
    save_container(dir / "good.patb", ImageGrid(2, 1.0, {1, 2, 3, 4}));
    const auto good = read_all(dir / "good.patb");

    const auto write = [&](const std::string& name, const std::string& bytes) {
        std::ofstream(dir / name, std::ios::binary) << bytes;
        return dir / name;
    };
    const auto field_of = [](const fs::path& p) {
        try {
            load_container(p);
        } catch (const FormatError& e) {
            return e.field();
        }
        return std::string("none");
    };

    std::string bad_magic = good;
    bad_magic.replace(0, 4, "XXXX");
    CHECK(field_of(write("magic.patb", bad_magic)) == "magic");

    std::string bad_version = good;
    bad_version[4] = 2;
    CHECK(field_of(write("version.patb", bad_version)) == "version");

    std::string bad_kind = good;
    bad_kind[5] = 7;
    CHECK(field_of(write("kind.patb", bad_kind)) == "kind");

    CHECK(field_of(write("trunc.patb", good.substr(0, good.size() - 3))) == "length");
    CHECK(field_of(write("extra.patb", good + "x")) == "length");
    CHECK(field_of(write("header.patb", good.substr(0, 9))) == "length");
}

TEST_CASE("loading the wrong kind is a format error") {
    const auto dir = testing::scratch_dir("tensor_io_kind");
    save_container(dir / "s.patb", SensorData::zeros(2, 2));
    CHECK_THROWS_AS(load_image(dir / "s.patb"), FormatError);
}

TEST_CASE("type invariants") {
    CHECK_THROWS_AS(ImageGrid(1, 1.0, {0.0}), ConfigError);
    CHECK_THROWS_AS(ImageGrid(2, 1.0, {0.0, 1.0}), ShapeError);
    CHECK_THROWS_AS(ImageGrid(2, 1.0, {0.0, 1.0, NAN, 0.0}), ConfigError);
    CHECK_THROWS_AS(SensorData(2, 2, {0.0, INFINITY, 0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(SensorData(2, 3, {0.0}), ShapeError);
}

TEST_CASE("pgm export") {
    const auto dir = testing::scratch_dir("tensor_io_pgm");
    const auto pixels = [&](const ImageGrid& img) {
        export_pgm(img, dir / "p.pgm");
        const auto bytes = read_all(dir / "p.pgm");
        const std::string header = "P5\n" + std::to_string(img.side()) + " " + std::to_string(img.side()) + "\n255\n";
        REQUIRE(bytes.substr(0, header.size()) == header);
        std::vector<int> out;
        for (std::size_t i = header.size(); i < bytes.size(); ++i) out.push_back(static_cast<unsigned char>(bytes[i]));
        return out;
    };

    CHECK(pixels(ImageGrid(2, 1.0, {0, 1, 1, 0})) == std::vector<int>{0, 255, 255, 0});
    CHECK(pixels(ImageGrid(2, 1.0, {0, 0.5, 1, 1}))[1] == 128);
    CHECK(pixels(ImageGrid(2, 1.0, {3, 3, 3, 3})) == std::vector<int>{128, 128, 128, 128});
}

TEST_CASE("rng streams are reproducible") {
    Rng a(RngSeed{42}), b(RngSeed{42}), c(RngSeed{43});
    bool differs = false;
    for (int i = 0; i < 1000000; ++i) {
        const auto va = a.next_u64();
        REQUIRE(va == b.next_u64());
        differs |= va != c.next_u64();
    }
    CHECK(differs);

    Rng n1(RngSeed{7}), n2(RngSeed{7});
    for (int i = 0; i < 1000; ++i) REQUIRE(n1.normal() == n2.normal());
    CHECK(derive_seed(RngSeed{1}, 0).value != derive_seed(RngSeed{1}, 1).value);
}

TEST_CASE("rng distributions") {
    Rng rng(RngSeed{3});
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);

    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) ++counts[rng.below(5)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

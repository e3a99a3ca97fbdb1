#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "pat/rng.hpp"
#include "pat/tensor_io.hpp"

namespace pat {

enum class PhantomKind { disks, rings, vessels };

PhantomKind parse_phantom_kind(std::string_view name);
std::string_view to_string(PhantomKind kind);

// Radii and widths are fractions of the image side.
struct PhantomSpec {
    PhantomKind kind = PhantomKind::disks;
    std::size_t side = 64;
    double pixel_size = 0.1;
    double margin = 0.15;
    RngSeed seed{0};
    std::size_t count = 4;
    double radius_min = 0.04;
    double radius_max = 0.12;
    double intensity_min = 0.2;
    double intensity_max = 1.0;
    // rings: wall thickness; vessels: tube radius.
    double thickness = 0.025;
    // rings: a single ring centred on the grid (count is ignored).
    bool centered = false;

    void validate() const;
};

// All mass lies inside the centred disk of radius (0.5 - margin) * side
// pixels and all values are in [0, 1].
ImageGrid make_phantom(const PhantomSpec& spec);

// Writes phantom_NNN.patb for seeds seed+0 .. seed+n-1 plus manifest.txt.
// Returns the relative paths written to the manifest.
std::vector<std::filesystem::path> make_dataset(const PhantomSpec& spec, std::size_t n,
                                                const std::filesystem::path& out_dir);

}  // namespace pat

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sar3d/types.hpp"

namespace sar3d {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

/// Regular voxel grid over the imaging volume. Linear index order is
/// row-major with Z outermost, Y middle, X innermost:
///   n = (z * Ny + y) * Nx + x
struct SceneGrid {
    std::array<std::uint32_t, 3> dims{1, 1, 1};   // Nx, Ny, Nz
    std::array<double, 3> spacing{1, 1, 1};       // dx, dy, dz [m]
    std::array<double, 3> origin{0, 0, 0};        // position of voxel (0,0,0) [m]

    SceneGrid() = default;
    SceneGrid(std::array<std::uint32_t, 3> d, std::array<double, 3> s, std::array<double, 3> o);

    std::size_t voxel_count() const {
        return std::size_t(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
        return (std::size_t(iz) * dims[1] + iy) * dims[0] + ix;
    }
    Vec3 position(std::size_t n) const;

    /// Grid of the same shape centered on the coordinate origin.
    static SceneGrid centered(std::array<std::uint32_t, 3> dims, std::array<double, 3> spacing);

    bool operator==(const SceneGrid&) const = default;
};

/// Physical element positions of the (virtual) 2D array, stable ordering.
struct ArrayGeometry {
    std::vector<Vec3> elements;
    double aperture_az = 0;  // extent along Y [m]
    double aperture_el = 0;  // extent along Z [m]
};

/// Stepped-frequency waveform. Q samples span [fc - B/2, fc + B/2];
/// a single sample sits at fc. Wavenumber k_q = 2*pi*f_q / c.
struct Waveform {
    double carrier_hz = 0;
    double bandwidth_hz = 0;
    std::uint32_t n_freq = 1;
    double c = 2.99792458e8;
    // Chirp rate of the raw LFM signal; unused after pulse compression,
    // kept so configs can carry the full radar description.
    double chirp_rate = 0;

    Waveform() = default;
    Waveform(double fc, double bw, std::uint32_t q, double speed = 2.99792458e8);

    double frequency(std::uint32_t q) const;
    double wavenumber(std::uint32_t q) const;
};

/// Complex scattering volume on a grid.
struct Reflectivity {
    SceneGrid grid;
    cvec values;

    Reflectivity() = default;
    Reflectivity(SceneGrid g, cvec v);
    static Reflectivity zeros(const SceneGrid& g) { return Reflectivity(g, cvec(g.voxel_count())); }
};

enum class ScenePreset { single_point, point_grid, wireframe };

ScenePreset scene_preset_from_name(const std::string& name);
std::string to_string(ScenePreset p);

/// Uniform n_az x n_el grid in the Y-Z plane at X = -standoff, centered on
/// the Y/Z origin. Ordering is row-major, elevation outer, azimuth inner.
ArrayGeometry make_planar_array(std::uint32_t n_az, std::uint32_t n_el,
                                double size_az, double size_el, double standoff);

/// Deterministic synthetic scenes standing in for the paper-style targets.
Reflectivity scene_preset(ScenePreset preset, const SceneGrid& grid, std::uint64_t seed);

/// Voxel center positions in linear index order.
std::vector<Vec3> voxel_positions(const SceneGrid& grid);

} // namespace sar3d

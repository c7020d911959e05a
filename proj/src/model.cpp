#include "sar3d/model.hpp"

#include <cmath>
#include <set>

#include "sar3d/rng.hpp"

namespace sar3d {

SceneGrid::SceneGrid(std::array<std::uint32_t, 3> d, std::array<double, 3> s,
                     std::array<double, 3> o)
    : dims(d), spacing(s), origin(o) {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1) throw std::invalid_argument("SceneGrid: dims must be >= 1");
        if (!(spacing[a] > 0) || !std::isfinite(spacing[a]))
            throw std::invalid_argument("SceneGrid: spacing must be positive");
        if (!std::isfinite(origin[a]))
            throw std::invalid_argument("SceneGrid: origin must be finite");
    }
    if (voxel_count() > (std::size_t(1) << 31))
        throw std::invalid_argument("SceneGrid: voxel count too large");
}

Vec3 SceneGrid::position(std::size_t n) const {
    const std::uint32_t ix = static_cast<std::uint32_t>(n % dims[0]);
    const std::uint32_t iy = static_cast<std::uint32_t>((n / dims[0]) % dims[1]);
    const std::uint32_t iz = static_cast<std::uint32_t>(n / (std::size_t(dims[0]) * dims[1]));
    return {origin[0] + ix * spacing[0], origin[1] + iy * spacing[1], origin[2] + iz * spacing[2]};
}

SceneGrid SceneGrid::centered(std::array<std::uint32_t, 3> dims, std::array<double, 3> spacing) {
    std::array<double, 3> origin;
    for (int a = 0; a < 3; ++a) origin[a] = -0.5 * spacing[a] * (dims[a] - 1);
    return SceneGrid(dims, spacing, origin);
}

Waveform::Waveform(double fc, double bw, std::uint32_t q, double speed)
    : carrier_hz(fc), bandwidth_hz(bw), n_freq(q), c(speed) {
    if (!(carrier_hz > 0)) throw std::invalid_argument("Waveform: carrier must be positive");
    if (bandwidth_hz < 0) throw std::invalid_argument("Waveform: bandwidth must be >= 0");
    if (n_freq < 1) throw std::invalid_argument("Waveform: n_freq must be >= 1");
    if (!(c > 0)) throw std::invalid_argument("Waveform: propagation speed must be positive");
}

double Waveform::frequency(std::uint32_t q) const {
    if (q >= n_freq) throw std::invalid_argument("Waveform: frequency index out of range");
    if (n_freq == 1) return carrier_hz;
    return carrier_hz - 0.5 * bandwidth_hz +
           bandwidth_hz * static_cast<double>(q) / static_cast<double>(n_freq - 1);
}

double Waveform::wavenumber(std::uint32_t q) const {
    return 2.0 * std::numbers::pi * frequency(q) / c;
}

Reflectivity::Reflectivity(SceneGrid g, cvec v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.voxel_count())
        throw std::invalid_argument("Reflectivity: value count does not match grid");
    for (const cx& z : values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("Reflectivity: values must be finite");
}

ScenePreset scene_preset_from_name(const std::string& name) {
    if (name == "single_point") return ScenePreset::single_point;
    if (name == "point_grid") return ScenePreset::point_grid;
    if (name == "wireframe") return ScenePreset::wireframe;
    throw std::invalid_argument("unknown scene preset: " + name);
}

std::string to_string(ScenePreset p) {
    switch (p) {
        case ScenePreset::single_point: return "single_point";
        case ScenePreset::point_grid: return "point_grid";
        case ScenePreset::wireframe: return "wireframe";
    }
    return "?";
}

ArrayGeometry make_planar_array(std::uint32_t n_az, std::uint32_t n_el,
                                double size_az, double size_el, double standoff) {
    if (n_az < 1 || n_el < 1)
        throw std::invalid_argument("make_planar_array: element counts must be >= 1");
    if (!(size_az > 0) || !(size_el > 0))
        throw std::invalid_argument("make_planar_array: aperture sizes must be positive");

    ArrayGeometry geom;
    geom.aperture_az = size_az;
    geom.aperture_el = size_el;
    geom.elements.reserve(std::size_t(n_az) * n_el);
    const double dy = n_az > 1 ? size_az / (n_az - 1) : 0.0;
    const double dz = n_el > 1 ? size_el / (n_el - 1) : 0.0;
    const double y0 = n_az > 1 ? -0.5 * size_az : 0.0;
    const double z0 = n_el > 1 ? -0.5 * size_el : 0.0;
    for (std::uint32_t ie = 0; ie < n_el; ++ie)
        for (std::uint32_t ia = 0; ia < n_az; ++ia)
            geom.elements.push_back({-standoff, y0 + ia * dy, z0 + ie * dz});
    return geom;
}

std::vector<Vec3> voxel_positions(const SceneGrid& grid) {
    std::vector<Vec3> out(grid.voxel_count());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = grid.position(n);
    return out;
}

namespace {

void put(Reflectivity& r, std::uint32_t x, std::uint32_t y, std::uint32_t z, cx v) {
    r.values[r.grid.index(x, y, z)] = v;
}

// Axis-aligned segment from a to b (inclusive) with the given index stride.
void draw_segment(std::set<std::size_t>& vox, const SceneGrid& g,
                  std::array<std::uint32_t, 3> a, std::array<std::uint32_t, 3> b,
                  std::uint32_t stride) {
    int axis = -1;
    for (int d = 0; d < 3; ++d)
        if (a[d] != b[d]) axis = d;
    if (axis < 0) {
        vox.insert(g.index(a[0], a[1], a[2]));
        return;
    }
    const std::uint32_t lo = std::min(a[axis], b[axis]);
    const std::uint32_t hi = std::max(a[axis], b[axis]);
    for (std::uint32_t t = lo; t <= hi; t += stride) {
        auto p = a;
        p[axis] = t;
        vox.insert(g.index(p[0], p[1], p[2]));
    }
}

} // namespace

Reflectivity scene_preset(ScenePreset preset, const SceneGrid& grid, std::uint64_t seed) {
    Reflectivity scene = Reflectivity::zeros(grid);
    const auto [nx, ny, nz] = grid.dims;
    Rng rng(derive_seed(seed, 0x5ce7ell));

    switch (preset) {
        case ScenePreset::single_point: {
            put(scene, nx / 2, ny / 2, nz / 2, cx(1.0, 0.0));
            break;
        }
        case ScenePreset::point_grid: {
            // Lattice with stride 4 offset 2; 8^3 grid gives 2 points per axis.
            constexpr std::uint32_t stride = 4, offset = 2;
            for (std::uint32_t z = offset; z < nz; z += stride)
                for (std::uint32_t y = offset; y < ny; y += stride)
                    for (std::uint32_t x = offset; x < nx; x += stride)
                        put(scene, x, y, z, std::polar(1.0, rng.uniform_angle()));
            break;
        }
        case ScenePreset::wireframe: {
            // Cube edge frame plus a center cross, voxels dropped every other
            // step to keep the target sparse relative to the echo length.
            std::set<std::size_t> vox;
            const std::uint32_t m0 = std::max(1u, nx / 5), m1 = std::max(1u, ny / 5),
                                m2 = std::max(1u, nz / 5);
            const std::uint32_t x0 = m0, x1 = nx - 1 - m0;
            const std::uint32_t y0 = m1, y1 = ny - 1 - m1;
            const std::uint32_t z0 = m2, z1 = nz - 1 - m2;
            const std::uint32_t s = 2;
            for (std::uint32_t y : {y0, y1})
                for (std::uint32_t z : {z0, z1})
                    draw_segment(vox, grid, {x0, y, z}, {x1, y, z}, s);
            for (std::uint32_t x : {x0, x1})
                for (std::uint32_t z : {z0, z1})
                    draw_segment(vox, grid, {x, y0, z}, {x, y1, z}, s);
            for (std::uint32_t x : {x0, x1})
                for (std::uint32_t y : {y0, y1})
                    draw_segment(vox, grid, {x, y, z0}, {x, y, z1}, s);
            const std::uint32_t cx_ = nx / 2, cy = ny / 2, cz = nz / 2;
            draw_segment(vox, grid, {x0, cy, cz}, {x1, cy, cz}, s);
            draw_segment(vox, grid, {cx_, y0, cz}, {cx_, y1, cz}, s);
            draw_segment(vox, grid, {cx_, cy, z0}, {cx_, cy, z1}, s);
            for (std::size_t n : vox) scene.values[n] = std::polar(1.0, rng.uniform_angle());
            break;
        }
    }
    return scene;
}

} // namespace sar3d

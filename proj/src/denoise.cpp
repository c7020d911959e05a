#include "sar3d/denoise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "sar3d/io.hpp"
#include "sar3d/parallel.hpp"
#include "sar3d/rng.hpp"

namespace sar3d {

DenoiserKind denoiser_kind_from_name(const std::string& name) {
    if (name == "identity") return DenoiserKind::identity;
    if (name == "gaussian3d") return DenoiserKind::gaussian3d;
    if (name == "nlm3d") return DenoiserKind::nlm3d;
    if (name == "external") return DenoiserKind::external;
    throw std::invalid_argument("unknown denoiser kind: " + name);
}

std::string to_string(DenoiserKind k) {
    switch (k) {
        case DenoiserKind::identity: return "identity";
        case DenoiserKind::gaussian3d: return "gaussian3d";
        case DenoiserKind::nlm3d: return "nlm3d";
        case DenoiserKind::external: return "external";
    }
    return "?";
}

namespace {

// Single mirror reflection with edge repeat; valid while |t| stays within
// one volume width of the boundary.
inline std::int64_t mirror(std::int64_t t, std::int64_t n) {
    if (t < 0) t = -1 - t;
    if (t >= n) t = 2 * n - 1 - t;
    return t;
}

std::vector<double> gaussian_kernel(int radius, double sigma) {
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        g[i + radius] = std::exp(-0.5 * (double(i) * i) / (sigma * sigma));
        sum += g[i + radius];
    }
    for (double& w : g) w /= sum;
    return g;
}

// Separable convolution along one axis with mirror padding.
void convolve_axis(const cvec& in, cvec& out, const Dims& dims, int axis,
                   const std::vector<double>& kernel) {
    const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
    const int radius = (int(kernel.size()) - 1) / 2;
    const std::int64_t n_axis = axis == 0 ? nx : axis == 1 ? ny : nz;
    const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? nx : nx * ny;

    parallel_for(in.size(), [&](std::size_t idx) {
        const std::int64_t ix = std::int64_t(idx) % nx;
        const std::int64_t iy = (std::int64_t(idx) / nx) % ny;
        const std::int64_t iz = std::int64_t(idx) / (nx * ny);
        const std::int64_t t0 = axis == 0 ? ix : axis == 1 ? iy : iz;
        const std::int64_t base = std::int64_t(idx) - t0 * stride;
        double re = 0.0, im = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            const std::int64_t t = mirror(t0 + k, n_axis);
            const cx v = in[base + t * stride];
            re += kernel[k + radius] * v.real();
            im += kernel[k + radius] * v.imag();
        }
        out[idx] = cx(re, im);
    });
}

cvec gaussian3d(const cvec& v, const Dims& dims, int radius, double sigma) {
    if (radius < 0) throw std::invalid_argument("gaussian3d: radius must be >= 0");
    if (!(sigma > 0)) throw std::invalid_argument("gaussian3d: sigma must be positive");
    for (int a = 0; a < 3; ++a)
        if (std::uint32_t(radius) >= dims[a])
            throw std::invalid_argument("gaussian3d: radius exceeds volume extent");
    if (radius == 0) return v;

    const auto kernel = gaussian_kernel(radius, sigma);
    cvec a(v.size()), b(v.size());
    convolve_axis(v, a, dims, 0, kernel);
    convolve_axis(a, b, dims, 1, kernel);
    convolve_axis(b, a, dims, 2, kernel);
    return a;
}

double median_inplace(std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

// Robust noise level from the 6-neighbor Laplacian of the magnitude volume.
// For iid noise the Laplacian has variance 42 sigma^2.
double estimate_noise_sigma(const std::vector<double>& mag, const Dims& dims) {
    const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
    std::vector<double> lap(mag.size());
    parallel_for(mag.size(), [&](std::size_t idx) {
        const std::int64_t ix = std::int64_t(idx) % nx;
        const std::int64_t iy = (std::int64_t(idx) / nx) % ny;
        const std::int64_t iz = std::int64_t(idx) / (nx * ny);
        auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
            return mag[(mirror(z, nz) * ny + mirror(y, ny)) * nx + mirror(x, nx)];
        };
        lap[idx] = at(ix - 1, iy, iz) + at(ix + 1, iy, iz) + at(ix, iy - 1, iz) +
                   at(ix, iy + 1, iz) + at(ix, iy, iz - 1) + at(ix, iy, iz + 1) -
                   6.0 * mag[idx];
    });
    const double med = median_inplace(lap);
    for (double& l : lap) l = std::abs(l - med);
    const double mad = median_inplace(lap);
    return 1.4826 * mad / std::sqrt(42.0);
}

cvec nlm3d(const cvec& v, const Dims& dims, int patch_radius, int search_radius, double h,
           double h_scale) {
    if (patch_radius < 0 || search_radius < 0)
        throw std::invalid_argument("nlm3d: radii must be >= 0");
    const int reach = patch_radius + search_radius;
    for (int a = 0; a < 3; ++a)
        if (std::uint32_t(reach) >= dims[a])
            throw std::invalid_argument("nlm3d: patch+search radius exceeds volume extent");

    const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);

    if (h <= 0.0) {
        const double peak = *std::max_element(mag.begin(), mag.end());
        if (peak == 0.0) return v;  // zero volume is a fixed point
        h = std::max(h_scale * estimate_noise_sigma(mag, dims), 0.02 * peak);
    }
    const double inv_h2 = 1.0 / (h * h);
    const double patch_norm =
        1.0 / (double(2 * patch_radius + 1) * (2 * patch_radius + 1) * (2 * patch_radius + 1));

    cvec out(v.size());
    parallel_for(v.size(), [&](std::size_t idx) {
        const std::int64_t ix = std::int64_t(idx) % nx;
        const std::int64_t iy = (std::int64_t(idx) / nx) % ny;
        const std::int64_t iz = std::int64_t(idx) / (nx * ny);
        double wsum = 0.0, acc_re = 0.0, acc_im = 0.0;
        for (std::int64_t oz = -search_radius; oz <= search_radius; ++oz)
            for (std::int64_t oy = -search_radius; oy <= search_radius; ++oy)
                for (std::int64_t ox = -search_radius; ox <= search_radius; ++ox) {
                    const std::int64_t jx = mirror(ix + ox, nx);
                    const std::int64_t jy = mirror(iy + oy, ny);
                    const std::int64_t jz = mirror(iz + oz, nz);
                    double d2 = 0.0;
                    for (std::int64_t pz = -patch_radius; pz <= patch_radius; ++pz)
                        for (std::int64_t py = -patch_radius; py <= patch_radius; ++py)
                            for (std::int64_t px = -patch_radius; px <= patch_radius; ++px) {
                                const double mi =
                                    mag[(mirror(iz + pz, nz) * ny + mirror(iy + py, ny)) * nx +
                                        mirror(ix + px, nx)];
                                const double mj =
                                    mag[(mirror(jz + pz, nz) * ny + mirror(jy + py, ny)) * nx +
                                        mirror(jx + px, nx)];
                                d2 += (mi - mj) * (mi - mj);
                            }
                    const double w = std::exp(-d2 * patch_norm * inv_h2);
                    const cx val = v[(jz * ny + jy) * nx + jx];
                    wsum += w;
                    acc_re += w * val.real();
                    acc_im += w * val.imag();
                }
        out[idx] = cx(acc_re / wsum, acc_im / wsum);
    });
    return out;
}

cvec external_denoise(const DenoiserSpec& spec, const cvec& v, const Dims& dims) {
    if (spec.command.empty())
        throw std::invalid_argument("external denoiser: command not set");
    if (!spec.deterministic)
        throw std::invalid_argument("external denoiser: deterministic flag must be set");

    static std::atomic<std::uint64_t> counter{0};
    const auto tag = std::to_string(counter.fetch_add(1));
    const auto dir = std::filesystem::temp_directory_path();
    const auto in_path = dir / ("sar3d_dn_in_" + tag + ".vol");
    const auto out_path = dir / ("sar3d_dn_out_" + tag + ".vol");

    SceneGrid grid(dims, {1, 1, 1}, {0, 0, 0});
    write_volume(in_path.string(), Reflectivity(grid, v));
    const std::string cmd = spec.command + " \"" + in_path.string() + "\" \"" +
                            out_path.string() + "\"";
    const int rc = std::system(cmd.c_str());
    std::filesystem::remove(in_path);
    if (rc != 0) {
        std::filesystem::remove(out_path);
        throw std::runtime_error("external denoiser failed with exit code " + std::to_string(rc));
    }
    Reflectivity result = read_volume(out_path.string());
    std::filesystem::remove(out_path);
    if (result.values.size() != v.size())
        throw std::runtime_error("external denoiser returned wrong volume shape");
    return std::move(result.values);
}

} // namespace

cvec denoise(const DenoiserSpec& spec, const cvec& v, const Dims& dims) {
    if (v.size() != std::size_t(dims[0]) * dims[1] * dims[2])
        throw std::invalid_argument("denoise: volume does not match dims");
    switch (spec.kind) {
        case DenoiserKind::identity: return v;
        case DenoiserKind::gaussian3d: return gaussian3d(v, dims, spec.radius, spec.sigma);
        case DenoiserKind::nlm3d:
            return nlm3d(v, dims, spec.patch_radius, spec.search_radius, spec.h, spec.h_scale);
        case DenoiserKind::external: return external_denoise(spec, v, dims);
    }
    throw std::invalid_argument("denoise: bad kind");
}

Reflectivity denoise(const DenoiserSpec& spec, const Reflectivity& v) {
    return Reflectivity(v.grid, denoise(spec, v.values, v.grid.dims));
}

double red_energy(const DenoiserSpec& spec, const cvec& v, const Dims& dims) {
    const cvec dv = denoise(spec, v, dims);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const cx r = v[i] - dv[i];
        acc += v[i].real() * r.real() + v[i].imag() * r.imag();
    }
    return 0.5 * acc;
}

double cyclic_monotonicity_score(const DenoiserSpec& spec, const std::vector<cvec>& points,
                                 const Dims& dims) {
    if (points.size() < 2)
        throw std::invalid_argument("cyclic_monotonicity_score: need at least 2 points");
    std::vector<cvec> dpoints(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (points[j].size() != points[0].size())
            throw std::invalid_argument("cyclic_monotonicity_score: shape mismatch");
        dpoints[j] = denoise(spec, points[j], dims);
    }
    double score = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        const std::size_t jn = (j + 1) % points.size();
        for (std::size_t i = 0; i < points[j].size(); ++i) {
            const cx a = points[j][i] - dpoints[j][i];
            const cx b = dpoints[j][i] - dpoints[jn][i];
            score += a.real() * b.real() + a.imag() * b.imag();
        }
    }
    return score;
}

GradCheckReport red_gradient_check(const DenoiserSpec& spec, const cvec& v, const Dims& dims,
                                   const std::function<double(const cvec&)>& f,
                                   const std::function<cvec(const cvec&)>& f_grad,
                                   double lambda, int n_directions, std::uint64_t seed) {
    GradCheckReport report;
    report.strict =
        spec.kind == DenoiserKind::identity || spec.kind == DenoiserKind::gaussian3d;
    report.directions = n_directions;

    const cvec dv = denoise(spec, v, dims);
    cvec grad = f_grad(v);
    for (std::size_t i = 0; i < v.size(); ++i) grad[i] += lambda * (v[i] - dv[i]);

    double vmax = 0.0;
    for (const cx& z : v) vmax = std::max(vmax, std::abs(z));
    const double eps = 1e-3 * (1.0 + vmax);

    Rng rng(derive_seed(seed, 0x67726164ull));  // "grad" stream
    cvec probe(v.size());
    for (int dir = 0; dir < n_directions; ++dir) {
        double norm2 = 0.0;
        for (cx& u : probe) {
            u = rng.complex_normal();
            norm2 += std::norm(u);
        }
        const double inv_norm = 1.0 / std::sqrt(norm2);

        double analytic = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const cx u = probe[i] * inv_norm;
            analytic += grad[i].real() * u.real() + grad[i].imag() * u.imag();
        }

        cvec plus = v, minus = v;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const cx step = probe[i] * (inv_norm * eps);
            plus[i] += step;
            minus[i] -= step;
        }
        const double fp = f(plus) + lambda * red_energy(spec, plus, dims);
        const double fm = f(minus) + lambda * red_energy(spec, minus, dims);
        const double fd = (fp - fm) / (2.0 * eps);

        const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-12});
        report.max_rel_err = std::max(report.max_rel_err, std::abs(fd - analytic) / scale);
    }
    return report;
}

} // namespace sar3d

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sar3d/model.hpp"
#include "sar3d/types.hpp"

namespace sar3d {

enum class DenoiserKind { identity, gaussian3d, nlm3d, external };

DenoiserKind denoiser_kind_from_name(const std::string& name);
std::string to_string(DenoiserKind k);

/// Deterministic volume-to-volume denoiser description.
///
/// gaussian3d is a normalized separable kernel (linear, symmetric, spectrum
/// in [0,1] for the default radius/sigma), applied to real and imaginary
/// parts. nlm3d derives patch weights from the magnitude volume and applies
/// them to the complex values; h <= 0 selects a bandwidth from a robust
/// noise estimate (MAD of the magnitude Laplacian). external runs
/// `command <input.vol> <output.vol>` synchronously and must declare itself
/// deterministic.
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::identity;
    int radius = 1;
    double sigma = 0.8;
    int patch_radius = 1;
    int search_radius = 2;
    double h = 0.0;
    double h_scale = 2.5;  // multiplier on the noise estimate when h <= 0
    std::string command;
    bool deterministic = false;
};

using Dims = std::array<std::uint32_t, 3>;

cvec denoise(const DenoiserSpec& spec, const cvec& v, const Dims& dims);
Reflectivity denoise(const DenoiserSpec& spec, const Reflectivity& v);

/// g_R(v) = 1/2 Re(v^H (v - D(v))).
double red_energy(const DenoiserSpec& spec, const cvec& v, const Dims& dims);

/// Sum over the point cycle of Re<x_j - D(x_j), D(x_j) - D(x_{j+1})>,
/// nonnegative when D is cyclically firmly nonexpansive.
double cyclic_monotonicity_score(const DenoiserSpec& spec, const std::vector<cvec>& points,
                                 const Dims& dims);

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool strict = true;    // false when the kind is not a linear symmetric denoiser
    int directions = 0;
};

/// Compares the analytic gradient f_grad(v) + lambda*(v - D(v)) against
/// central finite differences of f(.) + lambda*red_energy(.) along random
/// directions. Strict only for linear symmetric kinds (identity, gaussian3d).
GradCheckReport red_gradient_check(const DenoiserSpec& spec, const cvec& v, const Dims& dims,
                                   const std::function<double(const cvec&)>& f,
                                   const std::function<cvec(const cvec&)>& f_grad,
                                   double lambda, int n_directions = 8,
                                   std::uint64_t seed = 0);

} // namespace sar3d

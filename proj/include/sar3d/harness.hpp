#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sar3d/config.hpp"
#include "sar3d/forward.hpp"
#include "sar3d/io.hpp"
#include "sar3d/solvers.hpp"

namespace sar3d {

std::uint64_t fnv1a64(std::string_view data);

Reflectivity build_scene(const RunConfig& cfg);
ArrayGeometry build_geometry(const RunConfig& cfg);
MeasurementOperator build_operator(const RunConfig& cfg, bool explicit_matrix = true);

/// Runs one method on a masked noisy echo; lambda/mu are resolved against
/// max|A^H y| of this cell when configured relative.
ReconstructionResult run_method(const std::string& method, const MeasurementOperator& A,
                                const cvec& y, const RunConfig& cfg);

/// Writes scene volume, clean echo, and the masked noisy echo (plus mask)
/// for every (sr, snr, seed) cell, with a manifest.
void simulate(const RunConfig& cfg);

/// Full experiment grid; one results row per (sr, seed, snr, method) in that
/// nesting order. Cell failures become rows with an error status and the
/// sweep continues. Returns the rows; all_ok reports whether every cell ran.
std::vector<ResultRow> sweep(const RunConfig& cfg, bool* all_ok = nullptr);

/// Single-cell run of one method on the first (sr, snr, seed) of the config.
ResultRow reconstruct_one(const RunConfig& cfg, const std::string& method);

struct DiagnoseReport {
    double adjoint_rel_err = 0.0;
    bool adjoint_ok = false;
    GradCheckReport grad;
    bool grad_ok = false;
    double cyclic_score = 0.0;
    bool cyclic_warn = false;
    double identity_cyclic_score = 0.0;
    bool all_pass = false;
    std::string text;
};

/// Runtime checks: adjoint identity on the built operator, the RED gradient
/// identity on the gaussian3d denoiser, and the cyclic-monotonicity score of
/// the configured denoiser over sampled solver iterates.
DiagnoseReport diagnose(const RunConfig& cfg);

/// RED-ADMM iterates x_t at the requested outer iterations, obtained by
/// deterministic prefix re-runs.
std::vector<cvec> sample_red_iterates(const MeasurementOperator& A, const cvec& y,
                                      const SceneGrid& grid, const DenoiserSpec& spec,
                                      SolverConfig cfg, const std::vector<int>& ts);

} // namespace sar3d

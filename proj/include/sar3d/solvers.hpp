#pragma once

#include <string>
#include <vector>

#include "sar3d/denoise.hpp"
#include "sar3d/linop.hpp"
#include "sar3d/model.hpp"

namespace sar3d {

enum class Method { mf, l1, mcp, pnp, red_admm, red_gap };

Method method_from_name(const std::string& name);
std::string to_string(Method m);

struct SolverConfig {
    double lambda = 0.1;  // prior weight, absolute
    double mu = 0.1;      // ADMM penalty
    double theta = 4.0;   // MCP shape
    int t_max = 50;
    double eps = 1e-3;    // stop when Re < eps
    int inner_j = 3;      // RED fixed-point steps per outer iteration
    double cg_tol = 1e-6;
    int cg_max = 200;
    bool sigma_absorbed = true;  // noise variance folded into lambda; data term is 1/2||y-Ax||^2
};

struct TraceRecord {
    int t = 0;
    double residual = 0.0;
    double data_fidelity = 0.0;
    double prior_value = 0.0;
    double wall_seconds = 0.0;
};

struct SolverTrace {
    std::vector<TraceRecord> records;
    bool diverged = false;
    bool cg_warning = false;
};

struct ReconstructionResult {
    Reflectivity volume;
    SolverTrace trace;
    SolverConfig config;
    std::string method;
    // Final splitting state, kept for stationarity diagnostics; empty for mf.
    cvec v_final;
    cvec d_final;
};

/// Relative iterate change ||x_t - x_prev|| / ||x_prev||; +inf when x_prev
/// is zero but x_t is not, 0 when both are zero.
double residual(const cvec& x_t, const cvec& x_prev);

/// Adjoint image A^H y / rows -- the non-sparse baseline.
ReconstructionResult matched_filter(const LinearOperator& A, const cvec& y,
                                    const SceneGrid& grid);

/// Solves (A^H A + mu I) x = A^H y + mu (v + d) by matrix-free CG.
cvec solve_x_subproblem(const LinearOperator& A, const cvec& y, const cvec& v, const cvec& d,
                        double mu, double cg_tol, int cg_max);

ReconstructionResult admm_reg(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                              Method prox_kind, const SolverConfig& cfg);

ReconstructionResult pnp_admm(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                              const DenoiserSpec& spec, const SolverConfig& cfg);

ReconstructionResult red_admm(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                              const DenoiserSpec& spec, const SolverConfig& cfg);

ReconstructionResult red_gap(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                             const DenoiserSpec& spec, const SolverConfig& cfg);

/// ||mu (v - x + d_prev) + lambda (v - D(v))|| relative to the fixed-point
/// right-hand side; the optimality residual of the RED v-subproblem.
double red_stationarity_residual(const ReconstructionResult& result, const DenoiserSpec& spec);

} // namespace sar3d

#include "sar3d/solvers.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include "sar3d/cg.hpp"
#include "sar3d/parallel.hpp"
#include "sar3d/prox.hpp"

namespace sar3d {

Method method_from_name(const std::string& name) {
    if (name == "mf") return Method::mf;
    if (name == "l1") return Method::l1;
    if (name == "mcp") return Method::mcp;
    if (name == "pnp") return Method::pnp;
    if (name == "red_admm") return Method::red_admm;
    if (name == "red_gap") return Method::red_gap;
    throw std::invalid_argument("unknown method: " + name);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::mf: return "mf";
        case Method::l1: return "l1";
        case Method::mcp: return "mcp";
        case Method::pnp: return "pnp";
        case Method::red_admm: return "red_admm";
        case Method::red_gap: return "red_gap";
    }
    return "?";
}

double residual(const cvec& x_t, const cvec& x_prev) {
    if (x_t.size() != x_prev.size()) throw std::invalid_argument("residual: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x_t.size(); ++i) {
        num += std::norm(x_t[i] - x_prev[i]);
        den += std::norm(x_prev[i]);
    }
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double data_fidelity(const LinearOperator& A, const cvec& y, const cvec& x) {
    cvec ax(A.rows());
    A.apply(std::span<const cx>(x), std::span<cx>(ax));
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += std::norm(y[i] - ax[i]);
    return 0.5 * acc;
}

void check_shapes(const LinearOperator& A, const cvec& y, const SceneGrid& grid) {
    if (y.size() != A.rows()) throw std::invalid_argument("solver: echo length != operator rows");
    if (grid.voxel_count() != A.cols())
        throw std::invalid_argument("solver: grid size != operator cols");
}

CgOutcome solve_normal_system(const LinearOperator& A, const cvec& rhs, cvec& x, double mu,
                              double cg_tol, int cg_max) {
    cvec tmp_y(A.rows()), tmp_x(A.cols());
    auto op = [&](const cvec& in, cvec& out) {
        A.apply(std::span<const cx>(in), std::span<cx>(tmp_y));
        A.apply_adjoint(std::span<const cx>(tmp_y), std::span<cx>(tmp_x));
        parallel_for(in.size(), [&](std::size_t i) { out[i] = tmp_x[i] + mu * in[i]; });
    };
    return cg_hermitian(op, rhs, x, cg_tol, static_cast<std::size_t>(cg_max));
}

constexpr double kDivergenceGuard = 1e6;

// Shared ADMM outer loop; v_update(x, d, v) refreshes v in place.
ReconstructionResult admm_driver(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                                 const SolverConfig& cfg, const std::string& method,
                                 const std::function<void(const cvec&, const cvec&, cvec&)>& v_update,
                                 const std::function<double(const cvec&)>& prior_value) {
    check_shapes(A, y, grid);
    if (!(cfg.mu > 0) || cfg.t_max < 1 || !(cfg.eps > 0))
        throw std::invalid_argument("solver: bad config");
    const auto t0 = Clock::now();
    const std::size_t n = A.cols();

    cvec aty = A.apply_adjoint(y);
    cvec x(n), x_prev(n), v(n), d(n), rhs(n);

    ReconstructionResult result;
    result.config = cfg;
    result.method = method;

    for (int t = 1; t <= cfg.t_max; ++t) {
        parallel_for(n, [&](std::size_t i) { rhs[i] = aty[i] + cfg.mu * (v[i] + d[i]); });
        const CgOutcome cg = solve_normal_system(A, rhs, x, cfg.mu, cfg.cg_tol, cfg.cg_max);
        if (!cg.converged) result.trace.cg_warning = true;

        v_update(x, d, v);
        parallel_for(n, [&](std::size_t i) { d[i] = d[i] - x[i] + v[i]; });

        const double re = residual(x, x_prev);
        x_prev = x;
        result.trace.records.push_back(
            {t, re, data_fidelity(A, y, x), prior_value(v), seconds_since(t0)});
        if (re < cfg.eps) break;
        if (re > kDivergenceGuard && t > 1) {
            result.trace.diverged = true;
            break;
        }
    }

    result.volume = Reflectivity(grid, std::move(x));
    result.v_final = std::move(v);
    result.d_final = std::move(d);
    return result;
}

} // namespace

ReconstructionResult matched_filter(const LinearOperator& A, const cvec& y,
                                    const SceneGrid& grid) {
    check_shapes(A, y, grid);
    const auto t0 = Clock::now();
    cvec x = A.apply_adjoint(y);
    const double scale = 1.0 / static_cast<double>(A.rows());
    for (cx& z : x) z *= scale;

    ReconstructionResult result;
    result.method = "mf";
    result.trace.records.push_back({1, 0.0, data_fidelity(A, y, x), 0.0, seconds_since(t0)});
    result.volume = Reflectivity(grid, std::move(x));
    return result;
}

cvec solve_x_subproblem(const LinearOperator& A, const cvec& y, const cvec& v, const cvec& d,
                        double mu, double cg_tol, int cg_max) {
    if (!(mu > 0)) throw std::invalid_argument("solve_x_subproblem: mu must be positive");
    if (y.size() != A.rows() || v.size() != A.cols() || d.size() != A.cols())
        throw std::invalid_argument("solve_x_subproblem: dimension mismatch");
    for (const cx& z : y)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("solve_x_subproblem: non-finite input");

    cvec rhs = A.apply_adjoint(y);
    parallel_for(rhs.size(), [&](std::size_t i) { rhs[i] += mu * (v[i] + d[i]); });
    cvec x(A.cols());
    solve_normal_system(A, rhs, x, mu, cg_tol, cg_max);
    return x;
}

ReconstructionResult admm_reg(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                              Method prox_kind, const SolverConfig& cfg) {
    if (!(cfg.lambda > 0)) throw std::invalid_argument("admm_reg: lambda must be positive");
    const double threshold = cfg.lambda / cfg.mu;

    if (prox_kind == Method::l1) {
        return admm_driver(
            A, y, grid, cfg, "l1",
            [&](const cvec& x, const cvec& d, cvec& v) {
                parallel_for(x.size(),
                             [&](std::size_t i) { v[i] = soft_threshold(x[i] - d[i], threshold); });
            },
            [&](const cvec& v) {
                double l1 = 0.0;
                for (const cx& z : v) l1 += std::abs(z);
                return l1;
            });
    }
    if (prox_kind == Method::mcp) {
        if (cfg.theta <= 1.0) throw std::invalid_argument("admm_reg: theta must be > 1");
        return admm_driver(
            A, y, grid, cfg, "mcp",
            [&](const cvec& x, const cvec& d, cvec& v) {
                parallel_for(x.size(), [&](std::size_t i) {
                    v[i] = mcp_threshold(x[i] - d[i], threshold, cfg.theta);
                });
            },
            [&](const cvec& v) { return mcp_penalty(v, threshold, cfg.theta); });
    }
    throw std::invalid_argument("admm_reg: prox_kind must be l1 or mcp");
}

ReconstructionResult pnp_admm(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                              const DenoiserSpec& spec, const SolverConfig& cfg) {
    cvec buf;
    return admm_driver(
        A, y, grid, cfg, "pnp",
        [&](const cvec& x, const cvec& d, cvec& v) {
            buf.resize(x.size());
            parallel_for(x.size(), [&](std::size_t i) { buf[i] = x[i] - d[i]; });
            v = denoise(spec, buf, grid.dims);
        },
        [&](const cvec& v) { return red_energy(spec, v, grid.dims); });
}

ReconstructionResult red_admm(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                              const DenoiserSpec& spec, const SolverConfig& cfg) {
    if (!(cfg.lambda > 0)) throw std::invalid_argument("red_admm: lambda must be positive");
    if (cfg.inner_j < 1) throw std::invalid_argument("red_admm: inner_j must be >= 1");
    const double wd = cfg.lambda / (cfg.lambda + cfg.mu);
    const double wx = cfg.mu / (cfg.lambda + cfg.mu);
    cvec m_hat;
    return admm_driver(
        A, y, grid, cfg, "red_admm",
        [&](const cvec& x, const cvec& d, cvec& v) {
            m_hat.resize(x.size());
            parallel_for(x.size(), [&](std::size_t i) { m_hat[i] = x[i] - d[i]; });
            // J fixed-point sweeps of v = (lambda D(v) + mu (x - d)) / (lambda + mu),
            // warm-started from the previous outer v.
            for (int j = 0; j < cfg.inner_j; ++j) {
                cvec dm = denoise(spec, v, grid.dims);
                parallel_for(v.size(),
                             [&](std::size_t i) { v[i] = wd * dm[i] + wx * m_hat[i]; });
            }
        },
        [&](const cvec& v) { return red_energy(spec, v, grid.dims); });
}

ReconstructionResult red_gap(const LinearOperator& A, const cvec& y, const SceneGrid& grid,
                             const DenoiserSpec& spec, const SolverConfig& cfg) {
    check_shapes(A, y, grid);
    if (!(cfg.lambda > 0)) throw std::invalid_argument("red_gap: lambda must be positive");
    if (cfg.inner_j < 1) throw std::invalid_argument("red_gap: inner_j must be >= 1");
    const auto t0 = Clock::now();
    const std::size_t n = A.cols(), m = A.rows();
    constexpr double kJitter = 1e-10;

    ReconstructionResult result;
    result.config = cfg;
    result.method = "red_gap";

    cvec v(n), x(n), x_prev(n), z(m), resid(m), av(m), tmp(m);
    const double wv = 1.0 / (1.0 + cfg.lambda);
    const double wdn = cfg.lambda / (1.0 + cfg.lambda);

    for (int t = 1; t <= cfg.t_max; ++t) {
        // Euclidean projection onto A x = y via the Gram system in echo space.
        A.apply(std::span<const cx>(v), std::span<cx>(av));
        parallel_for(m, [&](std::size_t i) { resid[i] = y[i] - av[i]; });
        auto gram = [&](const cvec& in, cvec& out) {
            cvec back(n);
            A.apply_adjoint(std::span<const cx>(in), std::span<cx>(back));
            A.apply(std::span<const cx>(back), std::span<cx>(tmp));
            parallel_for(m, [&](std::size_t i) { out[i] = tmp[i] + kJitter * in[i]; });
        };
        const CgOutcome cg = cg_hermitian(gram, resid, z, cfg.cg_tol, std::size_t(cfg.cg_max));
        if (!cg.converged) result.trace.cg_warning = true;
        cvec back = A.apply_adjoint(z);
        parallel_for(n, [&](std::size_t i) { x[i] = v[i] + back[i]; });

        // RED fixed point v = (x + lambda D(v)) / (1 + lambda).
        for (int j = 0; j < cfg.inner_j; ++j) {
            cvec dv = denoise(spec, v, grid.dims);
            parallel_for(n, [&](std::size_t i) { v[i] = wv * x[i] + wdn * dv[i]; });
        }

        const double re = residual(x, x_prev);
        x_prev = x;
        result.trace.records.push_back({t, re, data_fidelity(A, y, x),
                                        red_energy(spec, v, grid.dims), seconds_since(t0)});
        if (re < cfg.eps) break;
        if (re > kDivergenceGuard && t > 1) {
            result.trace.diverged = true;
            break;
        }
    }

    result.volume = Reflectivity(grid, std::move(x));
    result.v_final = std::move(v);
    return result;
}

double red_stationarity_residual(const ReconstructionResult& result, const DenoiserSpec& spec) {
    if (result.v_final.empty() || result.d_final.empty())
        throw std::invalid_argument("red_stationarity_residual: result lacks splitting state");
    const SolverConfig& cfg = result.config;
    const cvec& x = result.volume.values;
    const cvec& v = result.v_final;
    const cvec dv = denoise(spec, v, result.volume.grid.dims);

    // d was already advanced to d_t; the v-update saw d_{t-1} = d_t + x_t - v_t.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const cx d_prev = result.d_final[i] + x[i] - v[i];
        const cx lhs = cfg.mu * (v[i] - x[i] + d_prev) + cfg.lambda * (v[i] - dv[i]);
        const cx rhs = cfg.mu * (x[i] - d_prev) + cfg.lambda * dv[i];
        num += std::norm(lhs);
        den += std::norm(rhs);
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

} // namespace sar3d

#pragma once

#include <cmath>
#include <cstddef>

#include "sar3d/parallel.hpp"
#include "sar3d/types.hpp"

namespace sar3d {

/// <a, b> = sum conj(a_i) b_i, chunk-ordered for reproducibility.
inline cx cdot(const cvec& a, const cvec& b) {
    return parallel_reduce_chunks<cx>(a.size(), cx(0, 0), [&](std::size_t lo, std::size_t hi) {
        double re = 0, im = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
            im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
        }
        return cx(re, im);
    });
}

inline double norm2(const cvec& a) { return cdot(a, a).real(); }
inline double norm(const cvec& a) { return std::sqrt(norm2(a)); }

struct CgOutcome {
    std::size_t iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

/// Conjugate gradient for a Hermitian positive-definite operator, matrix
/// free; x is the starting guess and holds the solution on return. Stops at
/// ||b - Op x|| <= tol * ||b||.
template <typename ApplyOp>
CgOutcome cg_hermitian(ApplyOp&& op, const cvec& b, cvec& x, double tol, std::size_t max_iter) {
    CgOutcome out;
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        x.assign(b.size(), cx(0, 0));
        out.converged = true;
        return out;
    }

    cvec ax(b.size());
    op(x, ax);
    cvec r(b.size()), p(b.size()), ap(b.size());
    parallel_for(b.size(), [&](std::size_t i) { r[i] = b[i] - ax[i]; });
    p = r;
    double rs = norm2(r);
    out.rel_residual = std::sqrt(rs) / bnorm;
    if (out.rel_residual <= tol) {
        out.converged = true;
        return out;
    }

    for (std::size_t it = 0; it < max_iter; ++it) {
        op(p, ap);
        const double pap = cdot(p, ap).real();
        if (!(pap > 0)) break;  // operator not PD or exact solve reached
        const double alpha = rs / pap;
        parallel_for(b.size(), [&](std::size_t i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        });
        const double rs_new = norm2(r);
        out.iterations = it + 1;
        out.rel_residual = std::sqrt(rs_new) / bnorm;
        if (out.rel_residual <= tol) {
            out.converged = true;
            return out;
        }
        const double beta = rs_new / rs;
        rs = rs_new;
        parallel_for(b.size(), [&](std::size_t i) { p[i] = r[i] + beta * p[i]; });
    }
    return out;
}

} // namespace sar3d

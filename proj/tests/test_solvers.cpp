#include <doctest.h>

#include <cmath>

#include "sar3d/cg.hpp"
#include "sar3d/forward.hpp"
#include "sar3d/rng.hpp"
#include "sar3d/solvers.hpp"

using namespace sar3d;

namespace {

// 8x8 toy instance: 2x2 elements x 2 frequencies on a 2x2x2 grid.
struct Toy {
    SceneGrid grid = SceneGrid::centered({2, 2, 2}, {0.05, 0.05, 0.05});
    MeasurementOperator A = MeasurementOperator::build(
        make_planar_array(2, 2, 0.4, 0.4, 1.0), Waveform(3.75e10, 1.2e9, 2), grid, true);
};

// Overdetermined noise-free instance, M = 18 >= N = 8.
struct Tall {
    SceneGrid grid = SceneGrid::centered({2, 2, 2}, {0.05, 0.05, 0.05});
    MeasurementOperator A = MeasurementOperator::build(
        make_planar_array(3, 3, 0.5, 0.5, 1.0), Waveform(3.75e10, 1.5e9, 2), grid, true);
};

class ZeroOperator final : public LinearOperator {
public:
    ZeroOperator(std::size_t m, std::size_t n) : m_(m), n_(n) {}
    std::size_t rows() const override { return m_; }
    std::size_t cols() const override { return n_; }
    void apply(std::span<const cx>, std::span<cx> y) const override {
        for (cx& v : y) v = cx(0, 0);
    }
    void apply_adjoint(std::span<const cx>, std::span<cx> x) const override {
        for (cx& v : x) v = cx(0, 0);
    }

private:
    std::size_t m_, n_;
};

cvec random_cvec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    cvec v(n);
    for (cx& z : v) z = rng.complex_normal();
    return v;
}

// Dense Hermitian solve by Gaussian elimination with partial pivoting.
cvec dense_solve(std::vector<cvec> M, cvec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[piv], M[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const cx f = M[r][col] / M[col][col];
            for (std::size_t c = col; c < n; ++c) M[r][c] -= f * M[col][c];
            b[r] -= f * b[col];
        }
    }
    cvec x(n);
    for (std::size_t r = n; r-- > 0;) {
        cx acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= M[r][c] * x[c];
        x[r] = acc / M[r][r];
    }
    return x;
}

double rel_err(const cvec& a, const cvec& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

} // namespace

TEST_CASE("residual ratio") {
    CHECK(residual({cx(1, 1)}, {cx(1, 1)}) == 0.0);
    CHECK(residual({cx(2, 0), cx(0, 2)}, {cx(1, 0), cx(0, 1)}) == doctest::Approx(1.0));
    CHECK(std::isinf(residual({cx(1, 0)}, {cx(0, 0)})));
    CHECK(residual({cx(0, 0)}, {cx(0, 0)}) == 0.0);
    CHECK_THROWS_AS(residual(cvec(2), cvec(3)), std::invalid_argument);

    const cvec a = random_cvec(64, 1), b = random_cvec(64, 2);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    CHECK(residual(a, b) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));
}

TEST_CASE("x-subproblem: zero operator reduces to the proximity term") {
    const ZeroOperator A(6, 5);
    const cvec y(6), v = random_cvec(5, 3), d = random_cvec(5, 4);
    const cvec x = solve_x_subproblem(A, y, v, d, 2.5, 1e-12, 50);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - (v[i] + d[i])) < 1e-10);
}

TEST_CASE("x-subproblem: huge mu forces x toward v + d") {
    const Toy toy;
    const cvec y = random_cvec(toy.A.rows(), 5);
    const cvec v = random_cvec(toy.A.cols(), 6), d = random_cvec(toy.A.cols(), 7);
    const cvec x = solve_x_subproblem(toy.A, y, v, d, 1e12, 1e-12, 100);
    cvec vd(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) vd[i] = v[i] + d[i];
    CHECK(rel_err(x, vd) < 1e-6);
}

TEST_CASE("x-subproblem: CG matches a dense direct solve on the 8x8 system") {
    const Toy toy;
    const double mu = 3.0;
    const cvec y = random_cvec(toy.A.rows(), 8);
    const cvec v = random_cvec(toy.A.cols(), 9), d = random_cvec(toy.A.cols(), 10);

    // dense (A^H A + mu I) and A^H y + mu (v + d), from operator entries
    const std::size_t n = toy.A.cols(), m = toy.A.rows();
    std::vector<cvec> M(n, cvec(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            cx acc(0, 0);
            for (std::size_t i = 0; i < m; ++i)
                acc += std::conj(toy.A.entry(i, r)) * toy.A.entry(i, c);
            M[r][c] = acc + (r == c ? cx(mu, 0) : cx(0, 0));
        }
    cvec b(n);
    for (std::size_t r = 0; r < n; ++r) {
        cx acc(0, 0);
        for (std::size_t i = 0; i < m; ++i) acc += std::conj(toy.A.entry(i, r)) * y[i];
        b[r] = acc + mu * (v[r] + d[r]);
    }

    const cvec expect = dense_solve(M, b);
    const cvec x = solve_x_subproblem(toy.A, y, v, d, mu, 1e-14, 200);
    CHECK(rel_err(x, expect) < 1e-8);
}

TEST_CASE("x-subproblem rejects non-finite input") {
    const Toy toy;
    cvec y(toy.A.rows());
    y[0] = cx(std::numeric_limits<double>::quiet_NaN(), 0);
    CHECK_THROWS_AS(
        solve_x_subproblem(toy.A, y, cvec(toy.A.cols()), cvec(toy.A.cols()), 1.0, 1e-6, 10),
        std::invalid_argument);
}

TEST_CASE("matched filter") {
    const Toy toy;
    SUBCASE("zero echo gives a zero volume") {
        const auto rec = matched_filter(toy.A, cvec(toy.A.rows()), toy.grid);
        for (const cx& z : rec.volume.values) CHECK(z == cx(0, 0));
        CHECK(rec.trace.records.size() == 1);
    }
    SUBCASE("spike scene peaks at the spike voxel under full sampling") {
        cvec x(toy.A.cols());
        x[3] = cx(1, 0);
        const cvec y = toy.A.apply(x);
        const auto rec = matched_filter(toy.A, y, toy.grid);
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < rec.volume.values.size(); ++i)
            if (std::abs(rec.volume.values[i]) > std::abs(rec.volume.values[argmax])) argmax = i;
        CHECK(argmax == 3);
    }
    SUBCASE("matched filtering a dense scene is not exact") {
        const cvec x = random_cvec(toy.A.cols(), 11);
        const auto rec = matched_filter(toy.A, toy.A.apply(x), toy.grid);
        CHECK(rel_err(rec.volume.values, x) > 0.1);
    }
}

TEST_CASE("admm_reg basics") {
    const Tall tall;
    SolverConfig cfg;
    cfg.lambda = 0.05;
    cfg.mu = 1.0;
    cfg.t_max = 60;
    cfg.eps = 1e-6;
    cfg.cg_tol = 1e-10;

    SUBCASE("zero echo converges to the zero volume") {
        const auto rec = admm_reg(tall.A, cvec(tall.A.rows()), tall.grid, Method::l1, cfg);
        for (const cx& z : rec.volume.values) CHECK(std::abs(z) < 1e-12);
    }
    SUBCASE("noise-free spike scene: support exact, l1 biased low, mcp unbiased") {
        cvec x(tall.A.cols());
        x[2] = cx(1, 0);
        x[7] = cx(0, -1);
        const cvec y = tall.A.apply(x);

        SolverConfig reg = cfg;
        reg.lambda = 0.8;  // threshold lambda/mu = 0.8 per iteration
        reg.mu = 4.0;
        reg.theta = 2.5;
        const auto l1 = admm_reg(tall.A, y, tall.grid, Method::l1, reg);
        const auto mcp = admm_reg(tall.A, y, tall.grid, Method::mcp, reg);

        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] != cx(0, 0)) {
                CHECK(std::abs(l1.volume.values[i]) > 0.5);
                CHECK(std::abs(l1.volume.values[i]) < 0.999);  // shrinkage bias
                CHECK(std::abs(mcp.volume.values[i]) ==
                      doctest::Approx(1.0).epsilon(1e-3));  // debiased
            } else {
                CHECK(std::abs(l1.volume.values[i]) < 1e-6);
                CHECK(std::abs(mcp.volume.values[i]) < 1e-6);
            }
        }
    }
    SUBCASE("trace residual is finite and reaches the threshold") {
        const cvec x = random_cvec(tall.A.cols(), 12);
        const cvec y = tall.A.apply(x);
        const auto rec = admm_reg(tall.A, y, tall.grid, Method::l1, cfg);
        REQUIRE(!rec.trace.records.empty());
        for (std::size_t i = 1; i < rec.trace.records.size(); ++i)
            CHECK(std::isfinite(rec.trace.records[i].residual));
        CHECK(rec.trace.records.back().residual < cfg.eps);
        CHECK(!rec.trace.diverged);
    }
    SUBCASE("rejects bad prox kind and bad theta") {
        CHECK_THROWS_AS(admm_reg(tall.A, cvec(tall.A.rows()), tall.grid, Method::mf, cfg),
                        std::invalid_argument);
        SolverConfig bad = cfg;
        bad.theta = 1.0;
        CHECK_THROWS_AS(admm_reg(tall.A, cvec(tall.A.rows()), tall.grid, Method::mcp, bad),
                        std::invalid_argument);
    }
}

TEST_CASE("l1 with vanishing lambda approaches the least-squares solution") {
    const Tall tall;
    const cvec x_true = random_cvec(tall.A.cols(), 13);
    const cvec y = tall.A.apply(x_true);

    SolverConfig cfg;
    cfg.lambda = 1e-8;
    cfg.mu = 1.0;
    cfg.t_max = 200;
    cfg.eps = 1e-9;
    cfg.cg_tol = 1e-12;
    cfg.cg_max = 400;
    const auto rec = admm_reg(tall.A, y, tall.grid, Method::l1, cfg);

    const cvec ax = tall.A.apply(rec.volume.values);
    CHECK(rel_err(ax, y) < 1e-4);

    // red_admm with the identity denoiser collapses to the same data fit
    DenoiserSpec identity;
    const auto red = red_admm(tall.A, y, tall.grid, identity, cfg);
    CHECK(rel_err(red.volume.values, rec.volume.values) < 1e-3);
}

TEST_CASE("pnp_admm with the identity denoiser tracks the least-squares solution") {
    const Tall tall;
    const cvec x_true = random_cvec(tall.A.cols(), 14);
    const cvec y = tall.A.apply(x_true);
    SolverConfig cfg;
    cfg.mu = 0.5;
    cfg.t_max = 100;
    cfg.eps = 1e-8;
    cfg.cg_tol = 1e-10;
    DenoiserSpec identity;
    const auto rec = pnp_admm(tall.A, y, tall.grid, identity, cfg);
    CHECK(rel_err(rec.volume.values, x_true) < 1e-4);
}

TEST_CASE("pnp_admm keeps a constant scene constant") {
    // overdetermined noise-free echo of a constant volume; the gaussian
    // denoiser is constant-preserving so the iterates stay constant
    const Tall tall;
    const cvec x_true(tall.A.cols(), cx(0.8, 0.2));
    const cvec y = tall.A.apply(x_true);
    SolverConfig cfg;
    cfg.mu = 0.5;
    cfg.t_max = 60;
    cfg.eps = 1e-8;
    cfg.cg_tol = 1e-10;
    DenoiserSpec gauss;
    gauss.kind = DenoiserKind::gaussian3d;
    const auto rec = pnp_admm(tall.A, y, tall.grid, gauss, cfg);
    cx mean(0, 0);
    for (const cx& z : rec.volume.values) mean += z;
    mean /= double(rec.volume.values.size());
    for (const cx& z : rec.volume.values) CHECK(std::abs(z - mean) < 1e-3 * std::abs(mean));
}

TEST_CASE("red_admm inner fixed point") {
    const Tall tall;
    const cvec x_true = random_cvec(tall.A.cols(), 15);
    const cvec y = tall.A.apply(x_true);
    DenoiserSpec identity;

    SUBCASE("with the identity denoiser the limit is independent of the lambda/mu split") {
        SolverConfig a;
        a.lambda = 2.0;
        a.mu = 0.4;
        a.t_max = 80;
        a.eps = 1e-9;
        a.cg_tol = 1e-11;
        a.inner_j = 64;  // enough sweeps to reach the inner fixed point
        SolverConfig b = a;
        b.lambda = 0.4;
        b.mu = 2.0;
        const auto ra = red_admm(tall.A, y, tall.grid, identity, a);
        const auto rb = red_admm(tall.A, y, tall.grid, identity, b);
        CHECK(rel_err(ra.volume.values, rb.volume.values) < 1e-4);
    }
    SUBCASE("more inner sweeps reach a smaller final residual") {
        SolverConfig cfg;
        cfg.lambda = 0.5;
        cfg.mu = 0.5;
        cfg.t_max = 12;
        cfg.eps = 1e-300;  // run all iterations
        cfg.cg_tol = 1e-10;
        DenoiserSpec gauss;
        gauss.kind = DenoiserKind::gaussian3d;
        SolverConfig j1 = cfg, j5 = cfg;
        j1.inner_j = 1;
        j5.inner_j = 5;
        const auto r1 = red_admm(tall.A, y, tall.grid, gauss, j1);
        const auto r5 = red_admm(tall.A, y, tall.grid, gauss, j5);
        CHECK(std::isfinite(r1.trace.records.back().residual));
        CHECK(r5.trace.records.back().residual <= r1.trace.records.back().residual);
    }
    SUBCASE("stationarity residual of the v-subproblem is small at convergence") {
        SolverConfig cfg;
        cfg.lambda = 0.7;
        cfg.mu = 0.7;
        cfg.t_max = 120;
        cfg.eps = 1e-7;
        cfg.cg_tol = 1e-10;
        cfg.inner_j = 3;
        DenoiserSpec gauss;
        gauss.kind = DenoiserKind::gaussian3d;
        const auto rec = red_admm(tall.A, y, tall.grid, gauss, cfg);
        CHECK(rec.trace.records.back().residual < cfg.eps);
        CHECK(red_stationarity_residual(rec, gauss) < 1e-3);
    }
}

TEST_CASE("dual update bookkeeping follows d_t = d_prev - x_t + v_t") {
    const Tall tall;
    const cvec y = tall.A.apply(random_cvec(tall.A.cols(), 16));
    SolverConfig cfg;
    cfg.lambda = 0.3;
    cfg.mu = 0.8;
    cfg.eps = 1e-300;
    cfg.cg_tol = 1e-10;
    DenoiserSpec gauss;
    gauss.kind = DenoiserKind::gaussian3d;

    // t_max = 1: d_0 = 0, so d_1 must equal v_1 - x_1 exactly
    SolverConfig one = cfg;
    one.t_max = 1;
    const auto r1 = red_admm(tall.A, y, tall.grid, gauss, one);
    for (std::size_t i = 0; i < r1.d_final.size(); ++i)
        CHECK(r1.d_final[i] == r1.v_final[i] - r1.volume.values[i]);

    // t_max = 2 extends the same deterministic run: d_2 = d_1 - x_2 + v_2
    SolverConfig two = cfg;
    two.t_max = 2;
    const auto r2 = red_admm(tall.A, y, tall.grid, gauss, two);
    for (std::size_t i = 0; i < r2.d_final.size(); ++i)
        CHECK(r2.d_final[i] == r1.d_final[i] - r2.volume.values[i] + r2.v_final[i]);
}

TEST_CASE("red_gap") {
    const Toy toy;  // underdetermined after masking
    const cvec x_true = [&] {
        cvec x(toy.A.cols());
        x[1] = cx(1, 0);
        x[6] = cx(0, 1);
        return x;
    }();
    const cvec y = toy.A.apply(x_true);
    DenoiserSpec gauss;
    gauss.kind = DenoiserKind::gaussian3d;
    SolverConfig cfg;
    cfg.lambda = 0.5;
    cfg.mu = 1.0;
    cfg.t_max = 30;
    cfg.eps = 1e-7;
    cfg.cg_tol = 1e-10;
    cfg.cg_max = 400;

    SUBCASE("zero echo keeps the feasible v0 = 0: x1 = v0") {
        SolverConfig one = cfg;
        one.t_max = 1;
        const auto rec = red_gap(toy.A, cvec(toy.A.rows()), toy.grid, gauss, one);
        for (const cx& z : rec.volume.values) CHECK(std::abs(z) < 1e-12);
    }
    SUBCASE("each x-update restores feasibility within cg_tol * 10") {
        const auto rec = red_gap(toy.A, y, toy.grid, gauss, cfg);
        const cvec ax = toy.A.apply(rec.volume.values);
        double num = 0, den = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            num += std::norm(y[i] - ax[i]);
            den += std::norm(y[i]);
        }
        CHECK(std::sqrt(num / den) <= cfg.cg_tol * 10);
    }
    SUBCASE("solvers are deterministic") {
        const auto a = red_gap(toy.A, y, toy.grid, gauss, cfg);
        const auto b = red_gap(toy.A, y, toy.grid, gauss, cfg);
        CHECK(a.volume.values == b.volume.values);
    }
}

TEST_CASE("solver shape validation") {
    const Toy toy;
    SolverConfig cfg;
    CHECK_THROWS_AS(matched_filter(toy.A, cvec(3), toy.grid), std::invalid_argument);
    CHECK_THROWS_AS(admm_reg(toy.A, cvec(3), toy.grid, Method::l1, cfg),
                    std::invalid_argument);
    SolverConfig bad = cfg;
    bad.mu = 0.0;
    CHECK_THROWS_AS(admm_reg(toy.A, cvec(toy.A.rows()), toy.grid, Method::l1, bad),
                    std::invalid_argument);
}

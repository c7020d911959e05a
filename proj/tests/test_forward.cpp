#include <doctest.h>

#include <cmath>
#include <set>

#include "sar3d/forward.hpp"
#include "sar3d/rng.hpp"

using namespace sar3d;

namespace {

// Naive triple-loop forward model, independent of the operator code path.
cvec naive_forward(const ArrayGeometry& geom, const Waveform& wf, const SceneGrid& grid,
                   const cvec& x) {
    const auto pos = voxel_positions(grid);
    cvec y;
    for (const Vec3& e : geom.elements)
        for (std::uint32_t q = 0; q < wf.n_freq; ++q) {
            cx acc(0, 0);
            for (std::size_t n = 0; n < pos.size(); ++n) {
                const double r = std::sqrt(sq(e.x - pos[n].x) + sq(e.y - pos[n].y) +
                                           sq(e.z - pos[n].z));
                acc += x[n] * std::polar(1.0, -2.0 * wf.wavenumber(q) * r);
            }
            y.push_back(acc);
        }
    return y;
}

cvec random_cvec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    cvec v(n);
    for (cx& z : v) z = rng.complex_normal();
    return v;
}

} // namespace

TEST_CASE("operator entry reduces to exp(-j) for the unit toy case") {
    // One element at (-1,0,0), one voxel at the origin, k = 1/2 so that the
    // phase is exactly -2 * (1/2) * 1 = -1.
    const double c = 2.99792458e8;
    const Waveform wf(c / (4.0 * std::numbers::pi), 0.0, 1);
    const auto geom = make_planar_array(1, 1, 1.0, 1.0, 1.0);
    const SceneGrid grid({1, 1, 1}, {1, 1, 1}, {0, 0, 0});

    for (bool explicit_matrix : {true, false}) {
        const auto A = MeasurementOperator::build(geom, wf, grid, explicit_matrix);
        REQUIRE(A.rows() == 1);
        REQUIRE(A.cols() == 1);
        const cx a = A.entry(0, 0);
        CHECK(a.real() == doctest::Approx(std::cos(-1.0)).epsilon(1e-12));
        CHECK(a.imag() == doctest::Approx(std::sin(-1.0)).epsilon(1e-12));
    }
}

TEST_CASE("operator entries are unit modulus and rows are element-outer") {
    const Waveform wf(3e9, 5e8, 3);
    const auto geom = make_planar_array(2, 2, 0.4, 0.4, 1.0);
    const SceneGrid grid = SceneGrid::centered({3, 3, 3}, {0.1, 0.1, 0.1});
    const auto A = MeasurementOperator::build(geom, wf, grid, true);
    REQUIRE(A.rows() == 4 * 3);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t n = 0; n < A.cols(); ++n)
            CHECK(std::abs(std::abs(A.entry(i, n)) - 1.0) < 1e-12);
}

TEST_CASE("two-element two-voxel entries match hand-computed phases") {
    const Waveform wf(3e8, 0.0, 1, 3e8);  // k = 2*pi
    const auto geom = make_planar_array(2, 1, 2.0, 1.0, 1.0);
    const SceneGrid grid({2, 1, 1}, {0.5, 1, 1}, {0, 0, 0});
    const auto A = MeasurementOperator::build(geom, wf, grid, true);

    const double k = 2.0 * std::numbers::pi;
    const Vec3 e0{-1.0, -1.0, 0.0}, e1{-1.0, 1.0, 0.0};
    const Vec3 v0{0.0, 0.0, 0.0}, v1{0.5, 0.0, 0.0};
    auto dist = [](const Vec3& a, const Vec3& b) {
        return std::sqrt(sq(a.x - b.x) + sq(a.y - b.y) + sq(a.z - b.z));
    };
    const Vec3 elems[2] = {e0, e1};
    const Vec3 voxes[2] = {v0, v1};
    for (int i = 0; i < 2; ++i)
        for (int n = 0; n < 2; ++n) {
            const cx expect = std::polar(1.0, -2.0 * k * dist(elems[i], voxes[n]));
            CHECK(std::abs(A.entry(i, n) - expect) < 1e-12);
        }
}

TEST_CASE("explicit and lazy representations agree entrywise") {
    const Waveform wf(5e9, 1e9, 2);
    const auto geom = make_planar_array(3, 2, 0.5, 0.3, 0.8);
    const SceneGrid grid = SceneGrid::centered({4, 3, 2}, {0.05, 0.06, 0.07});
    const auto Ae = MeasurementOperator::build(geom, wf, grid, true);
    const auto Al = MeasurementOperator::build(geom, wf, grid, false);
    CHECK(Ae.is_explicit());
    CHECK(!Al.is_explicit());
    for (std::size_t i = 0; i < Ae.rows(); ++i)
        for (std::size_t n = 0; n < Ae.cols(); ++n)
            CHECK(std::abs(Ae.entry(i, n) - Al.entry(i, n)) < 1e-12);

    const cvec x = random_cvec(Ae.cols(), 11);
    const cvec ye = Ae.apply(x), yl = Al.apply(x);
    for (std::size_t i = 0; i < ye.size(); ++i) CHECK(std::abs(ye[i] - yl[i]) < 1e-10);
    const cvec w = random_cvec(Ae.rows(), 12);
    const cvec xe = Ae.apply_adjoint(w), xl = Al.apply_adjoint(w);
    for (std::size_t n = 0; n < xe.size(); ++n) CHECK(std::abs(xe[n] - xl[n]) < 1e-10);
}

TEST_CASE("memory budget enforcement suggests lazy mode") {
    const Waveform wf(5e9, 1e9, 4);
    const auto geom = make_planar_array(4, 4, 0.5, 0.5, 1.0);
    const SceneGrid grid = SceneGrid::centered({8, 8, 8}, {0.05, 0.05, 0.05});
    CHECK_THROWS_AS(MeasurementOperator::build(geom, wf, grid, true, 1024),
                    ResourceLimitError);
    CHECK_NOTHROW(MeasurementOperator::build(geom, wf, grid, false, 1024));
}

TEST_CASE("forward apply matches the naive triple loop") {
    const Waveform wf(6e9, 1.5e9, 3);
    const auto geom = make_planar_array(3, 2, 0.5, 0.4, 1.2);
    const SceneGrid grid = SceneGrid::centered({3, 4, 2}, {0.08, 0.05, 0.11});
    const auto A = MeasurementOperator::build(geom, wf, grid, true);

    SUBCASE("x = 0 gives y = 0") {
        const cvec y = A.apply(cvec(A.cols()));
        for (const cx& v : y) CHECK(v == cx(0, 0));
    }
    SUBCASE("unit spike returns the matching column") {
        cvec x(A.cols());
        x[5] = cx(1, 0);
        const cvec y = A.apply(x);
        for (std::size_t i = 0; i < A.rows(); ++i)
            CHECK(std::abs(y[i] - A.entry(i, 5)) < 1e-12);
    }
    SUBCASE("random volume, oracle comparison at 1e-12") {
        const cvec x = random_cvec(A.cols(), 21);
        const cvec y = A.apply(x);
        const cvec oracle = naive_forward(geom, wf, grid, x);
        REQUIRE(y.size() == oracle.size());
        double scale = 0.0;
        for (const cx& v : oracle) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(std::abs(y[i] - oracle[i]) <= 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("adjoint identity <Ax, y> = <x, A^H y>") {
    const Waveform wf(4e9, 8e8, 2);
    const auto geom = make_planar_array(3, 3, 0.4, 0.4, 1.0);
    const SceneGrid grid = SceneGrid::centered({4, 4, 3}, {0.06, 0.06, 0.09});
    const auto A = MeasurementOperator::build(geom, wf, grid, true);

    SUBCASE("y = 0 maps to zero volume") {
        const cvec x = A.apply_adjoint(cvec(A.rows()));
        for (const cx& v : x) CHECK(v == cx(0, 0));
    }
    SUBCASE("random pairs satisfy the identity at 1e-10 relative") {
        for (std::uint64_t trial = 0; trial < 5; ++trial) {
            const cvec x = random_cvec(A.cols(), 100 + trial);
            const cvec w = random_cvec(A.rows(), 200 + trial);
            const cvec ax = A.apply(x);
            const cvec atw = A.apply_adjoint(w);
            cx lhs(0, 0), rhs(0, 0);
            for (std::size_t i = 0; i < ax.size(); ++i) lhs += std::conj(ax[i]) * w[i];
            for (std::size_t n = 0; n < x.size(); ++n) rhs += std::conj(x[n]) * atw[n];
            double axn = 0, wn = 0;
            for (const cx& v : ax) axn += std::norm(v);
            for (const cx& v : w) wn += std::norm(v);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::sqrt(axn * wn));
        }
    }
}

TEST_CASE("single-entry operator: adjoint conjugates the phase") {
    const double c = 2.99792458e8;
    const Waveform wf(c / (4.0 * std::numbers::pi), 0.0, 1);  // phase -1 at R = 1
    const auto geom = make_planar_array(1, 1, 1.0, 1.0, 1.0);
    const SceneGrid grid({1, 1, 1}, {1, 1, 1}, {0, 0, 0});
    const auto A = MeasurementOperator::build(geom, wf, grid, true);
    const cvec y = {cx(0.3, -0.7)};
    const cvec x = A.apply_adjoint(y);
    const cx expect = std::polar(1.0, +1.0) * y[0];
    CHECK(std::abs(x[0] - expect) < 1e-12);
}

TEST_CASE("sampling masks") {
    SUBCASE("full rate keeps every row in order") {
        const auto mask = make_mask(100, 1.0, 9);
        REQUIRE(mask.kept_rows.size() == 100);
        for (std::uint32_t i = 0; i < 100; ++i) CHECK(mask.kept_rows[i] == i);
    }
    SUBCASE("quarter rate keeps exactly 25 distinct rows, reproducibly") {
        const auto a = make_mask(100, 0.25, 5);
        const auto b = make_mask(100, 0.25, 5);
        REQUIRE(a.kept_rows.size() == 25);
        CHECK(a.kept_rows == b.kept_rows);
        const std::set<std::uint32_t> uniq(a.kept_rows.begin(), a.kept_rows.end());
        CHECK(uniq.size() == 25);
        for (std::uint32_t r : uniq) CHECK(r < 100);
    }
    SUBCASE("different seeds usually differ") {
        int distinct = 0;
        const auto base = make_mask(8, 0.5, 0);
        for (std::uint64_t s = 1; s <= 40; ++s)
            if (make_mask(8, 0.5, s).kept_rows != base.kept_rows) ++distinct;
        CHECK(distinct > 25);  // 70 possible subsets; collisions should be rare
    }
    SUBCASE("bad rates rejected") {
        CHECK_THROWS_AS(make_mask(10, 0.0, 0), std::invalid_argument);
        CHECK_THROWS_AS(make_mask(10, 1.5, 0), std::invalid_argument);
        CHECK_THROWS_AS(make_mask(10, -0.1, 0), std::invalid_argument);
    }
}

TEST_CASE("subsampling commutes with the forward map") {
    const Waveform wf(4e9, 6e8, 2);
    const auto geom = make_planar_array(4, 2, 0.5, 0.3, 1.0);
    const SceneGrid grid = SceneGrid::centered({3, 3, 3}, {0.07, 0.07, 0.07});
    const auto A = MeasurementOperator::build(geom, wf, grid, true);

    SUBCASE("full mask is the identity") {
        const auto mask = make_mask(std::uint32_t(A.rows()), 1.0, 0);
        const auto As = A.subsample(mask);
        CHECK(As.rows() == A.rows());
        const cvec x = random_cvec(A.cols(), 4);
        const cvec y1 = A.apply(x), y2 = As.apply(x);
        for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
    }
    SUBCASE("mask {0} on a 2-row echo keeps the first entry") {
        EchoVector y;
        y.values = {cx(1, 2), cx(3, 4)};
        SamplingMask mask;
        mask.kept_rows = {0};
        mask.sr = 0.5;
        const EchoVector out = subsample(y, mask);
        REQUIRE(out.values.size() == 1);
        CHECK(out.values[0] == cx(1, 2));
    }
    SUBCASE("subsample(A, mask) . x equals subsample(Ax, mask)") {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto mask = make_mask(std::uint32_t(A.rows()), 0.4, seed);
            const auto As = A.subsample(mask);
            const cvec x = random_cvec(A.cols(), 50 + seed);
            const cvec left = As.apply(x);
            EchoVector full;
            full.values = A.apply(x);
            const cvec right = subsample(full, mask).values;
            REQUIRE(left.size() == right.size());
            for (std::size_t i = 0; i < left.size(); ++i)
                CHECK(std::abs(left[i] - right[i]) < 1e-12);
        }
    }
    SUBCASE("out-of-range mask index rejected") {
        SamplingMask mask;
        mask.kept_rows = {std::uint32_t(A.rows())};
        mask.sr = 0.1;
        CHECK_THROWS_AS(A.subsample(mask), std::invalid_argument);
        EchoVector y;
        y.values.resize(A.rows());
        CHECK_THROWS_AS(subsample(y, mask), std::invalid_argument);
    }
}

TEST_CASE("noise injection") {
    EchoVector clean;
    for (int i = 0; i < 64; ++i) clean.values.push_back(std::polar(1.0, 0.1 * i));

    SUBCASE("infinite SNR returns the input unchanged") {
        const EchoVector out = add_noise(clean, kSnrClean, 3);
        CHECK(out.values == clean.values);
    }
    SUBCASE("identical seeds give identical noise") {
        const EchoVector a = add_noise(clean, 10.0, 7);
        const EchoVector b = add_noise(clean, 10.0, 7);
        CHECK(a.values == b.values);
        const EchoVector c = add_noise(clean, 10.0, 8);
        CHECK(a.values != c.values);
    }
    SUBCASE("empirical SNR at 0 dB is 0 +- 0.1 dB over 1e5 samples") {
        EchoVector big;
        big.values.assign(100000, cx(1.0, 0.0));
        const EchoVector noisy = add_noise(big, 0.0, 123);
        double noise_power = 0.0;
        for (std::size_t i = 0; i < big.values.size(); ++i)
            noise_power += std::norm(noisy.values[i] - big.values[i]);
        noise_power /= double(big.values.size());
        const double snr_db = 10.0 * std::log10(1.0 / noise_power);
        CHECK(std::abs(snr_db) < 0.1);
    }
    SUBCASE("zero-power echo with finite SNR rejected") {
        EchoVector zero;
        zero.values.assign(4, cx(0, 0));
        CHECK_THROWS_AS(add_noise(zero, 10.0, 0), std::invalid_argument);
        CHECK_NOTHROW(add_noise(clean, kSnrClean, 0));
    }
}

TEST_CASE("operator rejects voxels on top of elements") {
    const Waveform wf(1e9, 0.0, 1);
    ArrayGeometry geom;
    geom.elements = {{0.0, 0.0, 0.0}};
    const SceneGrid grid({1, 1, 1}, {1, 1, 1}, {0, 0, 0});
    CHECK_THROWS_AS(MeasurementOperator::build(geom, wf, grid, true), std::invalid_argument);
}

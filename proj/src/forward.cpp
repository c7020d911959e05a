#include "sar3d/forward.hpp"

#include <algorithm>
#include <cmath>

#include "sar3d/parallel.hpp"
#include "sar3d/rng.hpp"

namespace sar3d {

SamplingMask make_mask(std::uint32_t total_rows, double sr, std::uint64_t seed) {
    if (!(sr > 0.0) || sr > 1.0)
        throw std::invalid_argument("make_mask: sr must be in (0, 1]");
    if (total_rows == 0) throw std::invalid_argument("make_mask: empty operator");
    const auto k = static_cast<std::uint32_t>(std::llround(sr * total_rows));
    if (k < 1) throw std::invalid_argument("make_mask: sampling rate keeps no rows");

    SamplingMask mask;
    mask.sr = sr;
    mask.seed = seed;
    Rng rng(derive_seed(seed, 0x6d61736bull));  // "mask" stream
    mask.kept_rows = rng.sample_without_replacement(total_rows, k);
    std::sort(mask.kept_rows.begin(), mask.kept_rows.end());
    return mask;
}

MeasurementOperator MeasurementOperator::build(const ArrayGeometry& geom, const Waveform& wf,
                                               const SceneGrid& grid, bool explicit_matrix,
                                               std::size_t memory_budget_bytes) {
    if (geom.elements.empty())
        throw std::invalid_argument("build_operator: geometry has no elements");

    MeasurementOperator op;
    op.grid_ = grid;
    op.n_ = grid.voxel_count();
    op.q_ = wf.n_freq;
    op.m_total_ = geom.elements.size() * wf.n_freq;

    op.elem_x_.reserve(geom.elements.size());
    for (const Vec3& e : geom.elements) {
        if (!std::isfinite(e.x) || !std::isfinite(e.y) || !std::isfinite(e.z))
            throw std::invalid_argument("build_operator: non-finite element position");
        op.elem_x_.push_back(e.x);
        op.elem_y_.push_back(e.y);
        op.elem_z_.push_back(e.z);
    }
    op.vox_x_.resize(op.n_);
    op.vox_y_.resize(op.n_);
    op.vox_z_.resize(op.n_);
    for (std::size_t n = 0; n < op.n_; ++n) {
        const Vec3 p = grid.position(n);
        op.vox_x_[n] = p.x;
        op.vox_y_[n] = p.y;
        op.vox_z_[n] = p.z;
    }
    for (std::uint32_t q = 0; q < wf.n_freq; ++q) op.k_.push_back(wf.wavenumber(q));

    // Every element-voxel distance must be strictly positive.
    for (std::size_t m = 0; m < op.elem_x_.size(); ++m)
        for (std::size_t n = 0; n < op.n_; ++n) {
            const double r2 = sq(op.elem_x_[m] - op.vox_x_[n]) + sq(op.elem_y_[m] - op.vox_y_[n]) +
                              sq(op.elem_z_[m] - op.vox_z_[n]);
            if (!(r2 > 0.0))
                throw std::invalid_argument("build_operator: voxel coincides with array element");
        }

    op.row_ids_.resize(op.m_total_);
    for (std::size_t r = 0; r < op.m_total_; ++r) op.row_ids_[r] = static_cast<std::uint32_t>(r);

    if (explicit_matrix) {
        const std::size_t need = 2 * op.m_total_ * op.n_ * sizeof(cx);
        if (need > memory_budget_bytes)
            throw ResourceLimitError("build_operator: explicit matrix needs " +
                                     std::to_string(need) + " bytes, budget is " +
                                     std::to_string(memory_budget_bytes) +
                                     "; use lazy mode");
        op.materialize();
    }
    return op;
}

cx MeasurementOperator::compute_entry(std::uint32_t row_id, std::size_t n) const {
    const std::size_t m = row_id / q_;
    const std::size_t q = row_id % q_;
    const double r = std::sqrt(sq(elem_x_[m] - vox_x_[n]) + sq(elem_y_[m] - vox_y_[n]) +
                               sq(elem_z_[m] - vox_z_[n]));
    const double phase = -2.0 * k_[q] * r;
    return cx(std::cos(phase), std::sin(phase));
}

cx MeasurementOperator::entry(std::size_t i, std::size_t n) const {
    if (i >= rows() || n >= n_) throw std::invalid_argument("entry: index out of range");
    if (explicit_) return mat_[i * n_ + n];
    return compute_entry(row_ids_[i], n);
}

void MeasurementOperator::materialize() {
    const std::size_t r = rows();
    mat_.resize(r * n_);
    parallel_for(r, [&](std::size_t i) {
        cx* row = mat_.data() + i * n_;
        for (std::size_t n = 0; n < n_; ++n) row[n] = compute_entry(row_ids_[i], n);
    });
    adj_.resize(n_ * r);
    parallel_for(n_, [&](std::size_t n) {
        cx* arow = adj_.data() + n * r;
        for (std::size_t i = 0; i < r; ++i) arow[i] = std::conj(mat_[i * n_ + n]);
    });
    explicit_ = true;
}

namespace {

// Row-major complex dot product, accumulated in index order.
inline cx dot_row(const cx* row, const cx* v, std::size_t n) {
    const double* a = reinterpret_cast<const double*>(row);
    const double* b = reinterpret_cast<const double*>(v);
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double ar = a[2 * j], ai = a[2 * j + 1];
        const double br = b[2 * j], bi = b[2 * j + 1];
        re += ar * br - ai * bi;
        im += ar * bi + ai * br;
    }
    return cx(re, im);
}

} // namespace

void MeasurementOperator::apply(std::span<const cx> x, std::span<cx> y) const {
    if (x.size() != n_ || y.size() != rows())
        throw std::invalid_argument("apply: dimension mismatch");
    if (explicit_) {
        parallel_for(rows(), [&](std::size_t i) { y[i] = dot_row(mat_.data() + i * n_, x.data(), n_); });
    } else {
        parallel_for(rows(), [&](std::size_t i) {
            double re = 0.0, im = 0.0;
            for (std::size_t n = 0; n < n_; ++n) {
                const cx a = compute_entry(row_ids_[i], n);
                re += a.real() * x[n].real() - a.imag() * x[n].imag();
                im += a.real() * x[n].imag() + a.imag() * x[n].real();
            }
            y[i] = cx(re, im);
        });
    }
}

void MeasurementOperator::apply_adjoint(std::span<const cx> y, std::span<cx> x) const {
    if (y.size() != rows() || x.size() != n_)
        throw std::invalid_argument("apply_adjoint: dimension mismatch");
    const std::size_t r = rows();
    if (explicit_) {
        parallel_for(n_, [&](std::size_t n) { x[n] = dot_row(adj_.data() + n * r, y.data(), r); });
    } else {
        parallel_for(n_, [&](std::size_t n) {
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < r; ++i) {
                const cx a = std::conj(compute_entry(row_ids_[i], n));
                re += a.real() * y[i].real() - a.imag() * y[i].imag();
                im += a.real() * y[i].imag() + a.imag() * y[i].real();
            }
            x[n] = cx(re, im);
        });
    }
}

MeasurementOperator MeasurementOperator::subsample(const SamplingMask& mask) const {
    MeasurementOperator out;
    out.grid_ = grid_;
    out.n_ = n_;
    out.m_total_ = m_total_;
    out.q_ = q_;
    out.elem_x_ = elem_x_;
    out.elem_y_ = elem_y_;
    out.elem_z_ = elem_z_;
    out.vox_x_ = vox_x_;
    out.vox_y_ = vox_y_;
    out.vox_z_ = vox_z_;
    out.k_ = k_;
    out.row_ids_.reserve(mask.kept_rows.size());
    for (std::uint32_t i : mask.kept_rows) {
        if (i >= rows()) throw std::invalid_argument("subsample: mask index out of range");
        out.row_ids_.push_back(row_ids_[i]);
    }
    if (explicit_) {
        const std::size_t r = out.row_ids_.size();
        out.mat_.resize(r * n_);
        for (std::size_t j = 0; j < r; ++j)
            std::copy_n(mat_.data() + std::size_t(mask.kept_rows[j]) * n_, n_,
                        out.mat_.data() + j * n_);
        out.adj_.resize(n_ * r);
        parallel_for(n_, [&](std::size_t n) {
            cx* arow = out.adj_.data() + n * r;
            for (std::size_t j = 0; j < r; ++j) arow[j] = std::conj(out.mat_[j * n_ + n]);
        });
        out.explicit_ = true;
    }
    return out;
}

EchoVector apply_forward(const MeasurementOperator& op, const Reflectivity& x) {
    if (x.grid != op.grid())
        throw std::invalid_argument("apply_forward: reflectivity grid does not match operator");
    EchoVector echo;
    echo.values = op.apply(x.values);
    return echo;
}

Reflectivity apply_adjoint(const MeasurementOperator& op, const EchoVector& y) {
    if (y.values.size() != op.rows())
        throw std::invalid_argument("apply_adjoint: echo length does not match operator");
    return Reflectivity(op.grid(), op.apply_adjoint(y.values));
}

EchoVector subsample(const EchoVector& y, const SamplingMask& mask) {
    EchoVector out;
    out.prov = y.prov;
    out.prov.sr = mask.sr;
    out.values.reserve(mask.kept_rows.size());
    for (std::uint32_t i : mask.kept_rows) {
        if (i >= y.values.size()) throw std::invalid_argument("subsample: mask index out of range");
        out.values.push_back(y.values[i]);
    }
    return out;
}

EchoVector add_noise(const EchoVector& clean, double snr_db, std::uint64_t seed) {
    EchoVector out = clean;
    if (std::isinf(snr_db) && snr_db > 0) return out;
    if (!std::isfinite(snr_db)) throw std::invalid_argument("add_noise: bad SNR");

    double power = 0.0;
    for (const cx& v : clean.values) power += std::norm(v);
    if (clean.values.empty() || power == 0.0)
        throw std::invalid_argument("add_noise: clean echo has zero power");
    power /= static_cast<double>(clean.values.size());

    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
    Rng rng(derive_seed(seed, 0x6e6f697365ull));  // "noise" stream
    for (cx& v : out.values) v += sigma * rng.complex_normal();
    out.prov.snr_db = snr_db;
    out.prov.seed = static_cast<std::int64_t>(seed);
    return out;
}

} // namespace sar3d

#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sar3d/linop.hpp"
#include "sar3d/model.hpp"

namespace sar3d {

constexpr double kSnrClean = std::numeric_limits<double>::infinity();

/// Row subset at sampling rate sr; deterministic in (M, sr, seed).
struct SamplingMask {
    std::vector<std::uint32_t> kept_rows;  // sorted, unique
    double sr = 1.0;
    std::uint64_t seed = 0;
};

SamplingMask make_mask(std::uint32_t total_rows, double sr, std::uint64_t seed);

struct EchoProvenance {
    double sr = 1.0;
    double snr_db = kSnrClean;
    std::int64_t seed = 0;
    std::string scene_id;
};

struct EchoVector {
    cvec values;
    EchoProvenance prov;
};

/// Phase-history operator A[(m,q),n] = exp(-j 2 k_q R_mn) with rows ordered
/// element-outer, frequency-inner. Either fully materialized (together with
/// its adjoint, for fast solver iterations) or generated entrywise on the fly.
class MeasurementOperator final : public LinearOperator {
public:
    static MeasurementOperator build(const ArrayGeometry& geom, const Waveform& wf,
                                     const SceneGrid& grid, bool explicit_matrix,
                                     std::size_t memory_budget_bytes = kDefaultBudget);

    std::size_t rows() const override { return row_ids_.size(); }
    std::size_t cols() const override { return n_; }
    /// Row count of the unmasked operator, M = (#elements) * Q.
    std::size_t total_rows() const { return m_total_; }
    bool is_explicit() const { return explicit_; }
    const SceneGrid& grid() const { return grid_; }

    cx entry(std::size_t i, std::size_t n) const;

    void apply(std::span<const cx> x, std::span<cx> y) const override;
    void apply_adjoint(std::span<const cx> y, std::span<cx> x) const override;
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

    /// Restricts to mask.kept_rows (indices into the current row set).
    MeasurementOperator subsample(const SamplingMask& mask) const;

    static constexpr std::size_t kDefaultBudget = std::size_t(2) << 30;

private:
    MeasurementOperator() = default;
    cx compute_entry(std::uint32_t row_id, std::size_t n) const;
    void materialize();

    SceneGrid grid_;
    std::size_t n_ = 0;        // voxels
    std::size_t m_total_ = 0;  // elements * Q
    std::uint32_t q_ = 1;      // frequencies per element
    std::vector<double> elem_x_, elem_y_, elem_z_;
    std::vector<double> vox_x_, vox_y_, vox_z_;
    std::vector<double> k_;  // wavenumber per frequency index
    std::vector<std::uint32_t> row_ids_;
    bool explicit_ = false;
    cvec mat_;   // row-major rows() x N
    cvec adj_;   // row-major N x rows(), equals conj(A)^T
};

/// y = A x for a reflectivity on the operator grid.
EchoVector apply_forward(const MeasurementOperator& op, const Reflectivity& x);

/// A^H y as a reflectivity-shaped complex volume.
Reflectivity apply_adjoint(const MeasurementOperator& op, const EchoVector& y);

EchoVector subsample(const EchoVector& y, const SamplingMask& mask);

/// Adds circularly-symmetric complex Gaussian noise at the target SNR
/// measured against mean clean-echo power. snr_db = +inf returns the input.
EchoVector add_noise(const EchoVector& clean, double snr_db, std::uint64_t seed);

} // namespace sar3d

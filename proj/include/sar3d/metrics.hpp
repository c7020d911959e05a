#pragma once

#include "sar3d/model.hpp"
#include "sar3d/types.hpp"

namespace sar3d {

struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    double nmse = 0.0;
};

// All metrics compare peak-normalized magnitude volumes, so they are
// invariant to positive real or unit-modulus complex scaling of either input.

/// 10 log10(1 / MSE) of normalized magnitudes, capped at 300 dB.
double psnr(const cvec& ref, const cvec& est);

/// Global single-statistic SSIM with k1 = 0.01, k2 = 0.03, L = 1.
double ssim(const cvec& ref, const cvec& est);

/// ||est_n - ref_n||^2 / ||ref_n||^2 on normalized magnitudes.
double nmse(const cvec& ref, const cvec& est);

MetricReport evaluate_metrics(const Reflectivity& ref, const Reflectivity& est);

} // namespace sar3d

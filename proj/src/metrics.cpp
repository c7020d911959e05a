#include "sar3d/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace sar3d {

namespace {

constexpr double kPsnrCap = 300.0;

// Magnitudes scaled by the volume's own peak; an all-zero volume stays zero.
std::vector<double> normalized_magnitude(const cvec& v) {
    std::vector<double> mag(v.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        mag[i] = std::abs(v[i]);
        peak = std::max(peak, mag[i]);
    }
    if (peak > 0.0)
        for (double& m : mag) m /= peak;
    return mag;
}

void check_pair(const cvec& ref, const cvec& est, bool ref_nonzero) {
    if (ref.size() != est.size()) throw std::invalid_argument("metrics: shape mismatch");
    if (ref.empty()) throw std::invalid_argument("metrics: empty volumes");
    if (ref_nonzero) {
        double peak = 0.0;
        for (const cx& z : ref) peak = std::max(peak, std::abs(z));
        if (peak == 0.0) throw std::invalid_argument("metrics: reference volume is all zero");
    }
}

} // namespace

double psnr(const cvec& ref, const cvec& est) {
    check_pair(ref, est, true);
    const auto a = normalized_magnitude(ref);
    const auto b = normalized_magnitude(est);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const cvec& ref, const cvec& est) {
    check_pair(ref, est, false);
    const auto a = normalized_magnitude(ref);
    const auto b = normalized_magnitude(est);
    const double n = static_cast<double>(a.size());

    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
        cov += (a[i] - ma) * (b[i] - mb);
    }
    va /= n;
    vb /= n;
    cov /= n;

    // Stabilizers with dynamic range L = 1 after peak normalization.
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    return ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
           ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

double nmse(const cvec& ref, const cvec& est) {
    check_pair(ref, est, true);
    const auto a = normalized_magnitude(ref);
    const auto b = normalized_magnitude(est);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (b[i] - a[i]) * (b[i] - a[i]);
        den += a[i] * a[i];
    }
    return num / den;
}

MetricReport evaluate_metrics(const Reflectivity& ref, const Reflectivity& est) {
    if (!(ref.grid == est.grid)) throw std::invalid_argument("metrics: grid mismatch");
    return {psnr(ref.values, est.values), ssim(ref.values, est.values),
            nmse(ref.values, est.values)};
}

} // namespace sar3d

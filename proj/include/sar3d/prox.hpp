#pragma once

#include <cmath>

#include "sar3d/types.hpp"

namespace sar3d {

// Scalar proximal operators for complex amplitudes. The real-valued rules are
// applied to the magnitude with the phase carried through unchanged, which is
// the unique phase-equivariant extension.

struct ProxParams {
    double lambda = 0.0;  // threshold
    double theta = 4.0;   // MCP shape, > 1
};

/// prox of lambda*|.|: magnitude shrinkage by lambda, phase preserved.
inline cx soft_threshold(cx v, double lambda) {
    if (lambda < 0) throw std::invalid_argument("soft_threshold: lambda must be >= 0");
    const double mag = std::abs(v);
    if (mag <= lambda) return cx(0.0, 0.0);
    return v * ((mag - lambda) / mag);
}

/// Minimax concave penalty prox; identity beyond theta*lambda, dead zone
/// below lambda, linear debiasing ramp between.
inline cx mcp_threshold(cx v, double lambda, double theta) {
    if (theta <= 1.0) throw std::invalid_argument("mcp_threshold: theta must be > 1");
    if (lambda <= 0.0) throw std::invalid_argument("mcp_threshold: lambda must be > 0");
    const double mag = std::abs(v);
    if (mag < lambda) return cx(0.0, 0.0);
    if (mag > theta * lambda) return v;
    return v * (theta * (mag - lambda) / (theta - 1.0) / mag);
}

/// MCP penalty value, summed over a volume; objective logging only.
inline double mcp_penalty(const cvec& x, double lambda, double theta) {
    if (theta <= 1.0) throw std::invalid_argument("mcp_penalty: theta must be > 1");
    double acc = 0.0;
    for (const cx& z : x) {
        const double mag = std::abs(z);
        if (mag <= theta * lambda)
            acc += mag - mag * mag / (2.0 * theta);
        else
            acc += 0.5 * theta;
    }
    return acc;
}

} // namespace sar3d

#pragma once

#include <cstddef>
#include <span>

#include "sar3d/types.hpp"

namespace sar3d {

/// Matrix-free complex linear operator. Solvers only ever see this surface,
/// so explicit and lazy measurement operators (and test doubles) are
/// interchangeable behind it.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual void apply(std::span<const cx> x, std::span<cx> y) const = 0;
    virtual void apply_adjoint(std::span<const cx> y, std::span<cx> x) const = 0;

    cvec apply(const cvec& x) const {
        cvec y(rows());
        apply(std::span<const cx>(x), std::span<cx>(y));
        return y;
    }
    cvec apply_adjoint(const cvec& y) const {
        cvec x(cols());
        apply_adjoint(std::span<const cx>(y), std::span<cx>(x));
        return x;
    }
};

} // namespace sar3d

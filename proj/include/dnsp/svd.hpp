#pragma once

#include "dnsp/tensor.hpp"

#include <vector>

namespace dnsp {

/// Thin SVD a = u * diag(sigma) * z^T with R = min(rows, cols).
struct SvdFactors {
    ImageMatrix u;             ///< rows x R, orthonormal columns
    std::vector<double> sigma; ///< R values, descending, >= 0
    ImageMatrix z;             ///< cols x R, orthonormal columns

    [[nodiscard]] ImageMatrix reconstruct() const;
};

struct SvdOptions {
    int max_sweeps = 60;
    /// Column pairs whose normalized inner product |<a_p, a_q>| / (|a_p| |a_q|)
    /// exceeds this are rotated; a sweep without rotations ends the iteration.
    double tolerance = 1e-12;
    /// Singular values below this are reported as exactly zero.
    double zero_clamp = 1e-14;
};

/// One-sided (Hestenes) Jacobi SVD.
///
/// Throws NumericError on non-finite input and ConvergenceError, carrying the
/// remaining off-diagonal mass, when max_sweeps is exhausted.
SvdFactors svd(const ImageMatrix& a, const SvdOptions& options = {});

/// Singular values only; same algorithm and ordering as svd().
std::vector<double> singular_values(const ImageMatrix& a, const SvdOptions& options = {});

} // namespace dnsp

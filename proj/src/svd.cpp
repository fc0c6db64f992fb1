#include "dnsp/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dnsp {

namespace {

// Column-major working copy; columns are contiguous so the rotation kernels stream.
struct ColumnMatrix {
    std::size_t rows;
    std::size_t cols;
    std::vector<double> data;

    double* col(std::size_t j) { return data.data() + j * rows; }
    [[nodiscard]] const double* col(std::size_t j) const { return data.data() + j * rows; }
};

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void rotate(double* a, double* b, std::size_t n, double c, double s) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a[i];
        const double y = b[i];
        a[i] = c * x - s * y;
        b[i] = s * x + c * y;
    }
}

// Orthogonalizes the columns of `w` in place, accumulating the rotations into `v`
// (cols x cols, column-major). Requires w.rows >= w.cols.
void hestenes(ColumnMatrix& w, ColumnMatrix* v, double negligible, const SvdOptions& opt) {
    const std::size_t n = w.cols;
    const std::size_t m = w.rows;
    const double negligible_sq = negligible * negligible;
    double off = 0.0;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        bool rotated = false;
        off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double* ap = w.col(p);
                double* aq = w.col(q);
                const double alpha = dot(ap, ap, m);
                const double beta = dot(aq, aq, m);
                const double gamma = dot(ap, aq, m);
                // Rounding-noise columns are exact zeros in disguise; rotating them never settles.
                if (alpha <= negligible_sq || beta <= negligible_sq) {
                    continue;
                }
                const double cosine = std::abs(gamma) / std::sqrt(alpha * beta);
                off = std::max(off, cosine);
                if (cosine <= opt.tolerance) {
                    continue;
                }
                rotated = true;
                // Rotation angle that zeroes the (p, q) entry of the 2x2 Gram block.
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(ap, aq, m, c, s);
                if (v != nullptr) {
                    rotate(v->col(p), v->col(q), v->rows, c, s);
                }
            }
        }
        if (!rotated) {
            return;
        }
    }
    throw ConvergenceError("svd: one-sided Jacobi did not converge in " + std::to_string(opt.max_sweeps) + " sweeps", off);
}

struct Decomposition {
    ColumnMatrix w;
    ColumnMatrix v;
    std::vector<double> norms;
    std::vector<std::size_t> order;
};

Decomposition decompose(const ImageMatrix& a, bool transpose, bool want_vectors, const SvdOptions& opt) {
    // Work on the tall orientation: columns of `w` are the columns of a (or of a^T).
    const std::size_t m = transpose ? a.cols() : a.rows();
    const std::size_t n = transpose ? a.rows() : a.cols();
    Decomposition d{{m, n, std::vector<double>(m * n)}, {n, n, {}}, {}, {}};
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            if (transpose) {
                d.w.data[r * m + c] = a(r, c);
            } else {
                d.w.data[c * m + r] = a(r, c);
            }
        }
    }
    // Power-of-two scaling is exact and keeps the Gram entries away from overflow.
    double peak = 0.0;
    for (double x : d.w.data) {
        peak = std::max(peak, std::abs(x));
    }
    const int exponent = peak > 0.0 ? std::ilogb(peak) : 0;
    double frob_sq = 0.0;
    for (double& x : d.w.data) {
        x = std::ldexp(x, -exponent);
        frob_sq += x * x;
    }
    const double negligible = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * std::sqrt(frob_sq);
    if (want_vectors) {
        d.v.data.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            d.v.data[i * n + i] = 1.0;
        }
    }
    hestenes(d.w, want_vectors ? &d.v : nullptr, negligible, opt);

    d.norms.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double scaled = std::sqrt(dot(d.w.col(j), d.w.col(j), m));
        const double nrm = std::ldexp(scaled, exponent);
        d.norms[j] = (scaled <= negligible || nrm < opt.zero_clamp) ? 0.0 : nrm;
    }
    d.order.resize(n);
    std::iota(d.order.begin(), d.order.end(), std::size_t{0});
    std::stable_sort(d.order.begin(), d.order.end(), [&](std::size_t i, std::size_t j) { return d.norms[i] > d.norms[j]; });
    return d;
}

void check_input(const ImageMatrix& a) {
    if (a.empty()) {
        throw DimensionError("svd: empty matrix");
    }
    require_finite(a, "svd");
}

// Replaces column j of `u` (rows x k, row-major) with a unit vector orthogonal
// to columns [0, j). Used for left singular vectors of zero singular values.
void complete_column(ImageMatrix& u, std::size_t j) {
    const std::size_t m = u.rows();
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < m; ++e) {
        std::vector<double> cand(m, 0.0);
        cand[e] = 1.0;
        // Two passes of Gram-Schmidt keep the result orthogonal to rounding level.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t r = 0; r < m; ++r) {
                    proj += u(r, k) * cand[r];
                }
                for (std::size_t r = 0; r < m; ++r) {
                    cand[r] -= proj * u(r, k);
                }
            }
        }
        const double nrm = std::sqrt(std::inner_product(cand.begin(), cand.end(), cand.begin(), 0.0));
        if (nrm > best_norm) {
            best_norm = nrm;
            best = std::move(cand);
        }
        if (best_norm > 0.5) {
            break;
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        u(r, j) = best[r] / best_norm;
    }
}

} // namespace

ImageMatrix SvdFactors::reconstruct() const {
    ImageMatrix scaled = u;
    for (std::size_t r = 0; r < scaled.rows(); ++r) {
        for (std::size_t k = 0; k < sigma.size(); ++k) {
            scaled(r, k) *= sigma[k];
        }
    }
    return matmul(scaled, z.transposed());
}

SvdFactors svd(const ImageMatrix& a, const SvdOptions& options) {
    check_input(a);
    const bool transpose = a.rows() < a.cols();
    Decomposition d = decompose(a, transpose, true, options);
    const std::size_t m = d.w.rows;
    const std::size_t n = d.w.cols;

    // Tall orientation: left = normalized columns of w (m x n), right = v (n x n).
    ImageMatrix left(m, n);
    ImageMatrix right(n, n);
    std::vector<double> sigma(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = d.order[k];
        sigma[k] = d.norms[j];
        const double* wc = d.w.col(j);
        const double* vc = d.v.col(j);
        if (sigma[k] > 0.0) {
            // Recompute the norm unclamped so tiny-but-kept columns normalize exactly.
            const double nrm = std::sqrt(dot(wc, wc, m));
            for (std::size_t r = 0; r < m; ++r) {
                left(r, k) = wc[r] / nrm;
            }
        }
        for (std::size_t r = 0; r < n; ++r) {
            right(r, k) = vc[r];
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (sigma[k] == 0.0) {
            complete_column(left, k);
        }
    }

    if (transpose) {
        return {std::move(right), std::move(sigma), std::move(left)};
    }
    return {std::move(left), std::move(sigma), std::move(right)};
}

std::vector<double> singular_values(const ImageMatrix& a, const SvdOptions& options) {
    check_input(a);
    Decomposition d = decompose(a, a.rows() < a.cols(), false, options);
    std::vector<double> sigma(d.norms.size());
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        sigma[k] = d.norms[d.order[k]];
    }
    return sigma;
}

} // namespace dnsp

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>

#include "scusum/errors.hpp"
#include "scusum/mat.hpp"
#include "scusum/rng.hpp"

namespace scusum {

// Eigenvalues sorted descending; column j of `eigenvectors` is the unit
// eigenvector for eigenvalue j. Sign convention: the largest-magnitude entry
// of each column is positive, ties broken by lowest index.
struct SpectralDecomposition {
    Vec eigenvalues;
    Mat eigenvectors;
};

namespace detail {

// One cyclic Jacobi pass over all (p, q) pairs of the symmetric matrix B,
// accumulating rotations into V. Returns the off-diagonal Frobenius norm
// after the sweep.
inline double jacobi_sweep(Mat& b, Mat& v) {
    const std::size_t n = b.rows();
    for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            const double bpq = b(p, q);
            if (bpq == 0.0) continue;
            const double theta = (b(q, q) - b(p, p)) / (2.0 * bpq);
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(1.0 + theta * theta));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;
            const double tau = s / (1.0 + c);

            const double bpp = b(p, p), bqq = b(q, q);
            b(p, p) = bpp - t * bpq;
            b(q, q) = bqq + t * bpq;
            b(p, q) = 0.0;
            b(q, p) = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == p || i == q) continue;
                const double bip = b(i, p), biq = b(i, q);
                b(i, p) = bip - s * (biq + tau * bip);
                b(p, i) = b(i, p);
                b(i, q) = biq + s * (bip - tau * biq);
                b(q, i) = b(i, q);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double vip = v(i, p), viq = v(i, q);
                v(i, p) = vip - s * (viq + tau * vip);
                v(i, q) = viq + s * (vip - tau * viq);
            }
        }
    }
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < b.rows(); ++i)
        for (std::size_t j = i + 1; j < b.cols(); ++j) off += 2.0 * b(i, j) * b(i, j);
    return std::sqrt(off);
}

inline void fix_column_sign(Mat& v, std::size_t j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const double m = std::abs(v(i, j));
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (v(arg, j) < 0.0)
        for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
}

inline SpectralDecomposition sort_and_sign(Mat& b, Mat& v) {
    const std::size_t n = b.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return b(i, i) > b(j, j); });
    SpectralDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = b(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
        fix_column_sign(out.eigenvectors, j);
    }
    return out;
}

}  // namespace detail

// Cyclic Jacobi on B (destroyed), rotations accumulated into V (pre-seeded by
// the caller: identity for a cold start, the previous step's eigenvectors for
// a warm start). Converges when off(B)_F <= 1e-12 * scale; 100-sweep cap.
inline void jacobi_eig_inplace(Mat& b, Mat& v, double scale, int max_sweeps = 100) {
    const double tol = 1e-12 * std::max(scale, 1e-300);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (detail::jacobi_sweep(b, v) <= tol) return;
    }
    // a final check: the last sweep may have landed exactly on the tolerance
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < b.rows(); ++i)
        for (std::size_t j = i + 1; j < b.cols(); ++j) off += 2.0 * b(i, j) * b(i, j);
    if (std::sqrt(off) > tol)
        throw ConvergenceError("jacobi_eig: no convergence within sweep cap");
}

inline SpectralDecomposition eig_sym(const Mat& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("eig_sym: matrix must be square");
    if (!all_finite(a)) throw InvalidInput("eig_sym: non-finite entries");
    if (!is_symmetric(a)) throw InvalidInput("eig_sym: matrix not symmetric");
    Mat b = a;
    Mat v = Mat::identity(a.rows());
    jacobi_eig_inplace(b, v, frobenius_norm(a));
    return detail::sort_and_sign(b, v);
}

// Warm-started variant: rotates A into the frame of `v_warm` (assumed close
// to the eigenbasis, e.g. from the previous sliding-window step) so Jacobi
// usually converges in one or two sweeps.
inline SpectralDecomposition eig_sym_warm(const Mat& a, const Mat& v_warm) {
    if (!all_finite(a)) throw InvalidInput("eig_sym_warm: non-finite entries");
    Mat b = matmul(transpose(v_warm), matmul(a, v_warm));
    // symmetrize: the congruence leaves ~1e-16 asymmetry that Jacobi assumes away
    for (std::size_t i = 0; i + 1 < b.rows(); ++i)
        for (std::size_t j = i + 1; j < b.cols(); ++j) {
            const double m = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = m;
            b(j, i) = m;
        }
    Mat v = v_warm;
    jacobi_eig_inplace(b, v, frobenius_norm(a));
    return detail::sort_and_sign(b, v);
}

// Leading d eigenpairs; exactly the first d columns/values of eig_sym(A).
inline std::pair<Mat, Vec> top_d(const Mat& a, std::size_t d) {
    if (d == 0 || d > a.rows()) throw InvalidInput("top_d: need 1 <= d <= k");
    SpectralDecomposition full = eig_sym(a);
    Mat basis(a.rows(), d);
    Vec values(d);
    for (std::size_t j = 0; j < d; ++j) {
        values[j] = full.eigenvalues[j];
        for (std::size_t i = 0; i < a.rows(); ++i) basis(i, j) = full.eigenvectors(i, j);
    }
    return {std::move(basis), std::move(values)};
}

// Haar-distributed k x d frame: modified Gram-Schmidt on a standard Gaussian
// matrix. Normalizing by the (positive) residual norms makes the implicit
// triangular factor have a positive diagonal, which pins the sign.
inline Mat random_semi_orthogonal(std::size_t k, std::size_t d, std::uint64_t seed) {
    if (d == 0 || d > k) throw InvalidInput("random_semi_orthogonal: need 1 <= d <= k");
    Rng rng(seed);
    Mat g(k, d);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
        Vec v = g.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t l = 0; l < j; ++l) {
                double proj = 0.0;
                for (std::size_t i = 0; i < k; ++i) proj += g(i, l) * v[i];
                for (std::size_t i = 0; i < k; ++i) v[i] -= proj * g(i, l);
            }
        }
        const double nrm = norm2(v);
        for (std::size_t i = 0; i < k; ++i) g(i, j) = v[i] / nrm;
    }
    return g;
}

// Deterministic (k-d) x k complement map Q with Q U1 = 0 and Q Q^T = I:
// completes U1 to a full orthonormal basis by orthonormalizing appended
// canonical vectors, skipping near-dependent ones.
inline Mat orthogonal_complement(const Mat& u1) {
    const std::size_t k = u1.rows(), d = u1.cols();
    if (d >= k) throw EmptyComplement("orthogonal_complement: basis already spans the space");
    std::vector<Vec> basis;
    basis.reserve(k);
    for (std::size_t j = 0; j < d; ++j) basis.push_back(u1.col(j));
    Mat q(k - d, k);
    std::size_t found = 0;
    for (std::size_t c = 0; c < k && found < k - d; ++c) {
        Vec v(k, 0.0);
        v[c] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec& b : basis) {
                const double proj = dot(b, v);
                for (std::size_t i = 0; i < k; ++i) v[i] -= proj * b[i];
            }
        }
        const double nrm = norm2(v);
        if (nrm < 1e-6) continue;  // e_c nearly inside the current span
        for (std::size_t i = 0; i < k; ++i) v[i] /= nrm;
        for (std::size_t i = 0; i < k; ++i) q(found, i) = v[i];
        basis.push_back(std::move(v));
        ++found;
    }
    if (found != k - d)
        throw ConvergenceError("orthogonal_complement: completion failed");
    return q;
}

// Principal angles between span(U1) and span(U2), ascending in [0, pi/2].
// cos(phi_i) are the singular values of U2^T U1, obtained from the
// eigendecomposition of the small Gram matrix (U2^T U1)^T (U2^T U1).
inline Vec principal_angles(const Mat& u1, const Mat& u2) {
    if (u1.rows() != u2.rows() || u1.cols() != u2.cols())
        throw InvalidInput("principal_angles: dimension mismatch");
    const Mat m = matmul(transpose(u2), u1);
    const Mat gram = matmul(transpose(m), m);
    SpectralDecomposition eig = eig_sym(gram);
    Vec phi(m.cols());
    for (std::size_t i = 0; i < m.cols(); ++i) {
        const double s = std::sqrt(std::clamp(eig.eigenvalues[i], 0.0, 1.0));
        phi[i] = std::acos(s);
    }
    return phi;  // eigenvalues descending => cosines descending => angles ascending
}

}  // namespace scusum

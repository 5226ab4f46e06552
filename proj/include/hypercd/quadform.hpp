#pragma once

// Reduction of a real symmetric principal part to a sum of signed squares:
// C^T A C = diag(d) with C orthogonal, via cyclic Jacobi rotations.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cd.hpp"

namespace hypercd {

using Matrix = std::vector<std::vector<double>>;

struct QuadReduction {
    Matrix C;                   // orthogonal; columns are the new axes
    std::vector<double> d;      // diag entries, sorted descending
    int positive = 0;           // counts of d_j > tol / d_j < -tol
    int negative = 0;
};

inline QuadReduction reduce_to_squares(const Matrix& A, double tol = 1e-12) {
    const size_t n = A.size();
    for (const auto& row : A)
        if (row.size() != n) throw DomainError("matrix is not square");
    double scale = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (std::abs(A[i][j] - A[j][i]) > 1e-12 * (1.0 + std::abs(A[i][j])))
                throw DomainError("matrix is not symmetric");
            scale = std::max(scale, std::abs(A[i][j]));
        }
    Matrix M = A;
    Matrix C(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) C[i][i] = 1.0;

    if (scale == 0.0) scale = 1.0;
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += M[p][q] * M[p][q];
        if (std::sqrt(off) < 1e-15 * scale * double(n)) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(M[p][q]) < 1e-18 * scale) continue;
                const double theta = (M[q][q] - M[p][p]) / (2.0 * M[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double mkp = M[k][p], mkq = M[k][q];
                    M[k][p] = c * mkp - s * mkq;
                    M[k][q] = s * mkp + c * mkq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double mpk = M[p][k], mqk = M[q][k];
                    M[p][k] = c * mpk - s * mqk;
                    M[q][k] = s * mpk + c * mqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double ckp = C[k][p], ckq = C[k][q];
                    C[k][p] = c * ckp - s * ckq;
                    C[k][q] = s * ckp + c * ckq;
                }
            }
        }
    }

    QuadReduction r;
    r.d.resize(n);
    for (size_t j = 0; j < n; ++j) r.d[j] = M[j][j];

    // Deterministic presentation: eigenvalues descending, each column's first
    // significant entry positive.
    std::vector<size_t> order(n);
    for (size_t j = 0; j < n; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return r.d[a] > r.d[b]; });
    QuadReduction out;
    out.d.resize(n);
    out.C.assign(n, std::vector<double>(n, 0.0));
    for (size_t j = 0; j < n; ++j) {
        out.d[j] = r.d[order[j]];
        double lead = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (std::abs(C[i][order[j]]) > 1e-12) { lead = C[i][order[j]]; break; }
        const double sgn = (lead < 0) ? -1.0 : 1.0;
        for (size_t i = 0; i < n; ++i) out.C[i][j] = sgn * C[i][order[j]];
        if (out.d[j] > tol * scale) ++out.positive;
        if (out.d[j] < -tol * scale) ++out.negative;
    }
    return out;
}

// New first-order coefficients after x = C y: if the first order part is
// sum_v alpha_v d/dx_v, then in y-coordinates it is sum_j beta_j d/dy_j with
// beta_j = sum_v alpha_v C_{v,j}.
inline std::vector<double> transform_first_order(const std::vector<double>& alpha,
                                                 const Matrix& C) {
    const size_t n = C.size();
    if (alpha.size() != n) throw DomainError("alpha/C dimension mismatch");
    std::vector<double> beta(n, 0.0);
    for (size_t j = 0; j < n; ++j)
        for (size_t v = 0; v < n; ++v) beta[j] += alpha[v] * C[v][j];
    return beta;
}

}  // namespace hypercd

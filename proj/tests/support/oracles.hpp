#pragma once

// Independent oracles for the variance estimators.  These deliberately avoid
// the library's Cholesky/eigen code paths: inversion is plain Gauss-Jordan on
// dense matrices.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cjack/dataset.hpp"
#include "cjack/linalg.hpp"

namespace testsupport {

// Gauss-Jordan inverse with partial pivoting.
inline cjack::Matrix gj_inverse(const cjack::Matrix& A) {
    const int n = A.rows;
    cjack::Matrix W = A, Inv(n, n);
    for (int i = 0; i < n; ++i) Inv(i, i) = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(W(r, col)) > std::abs(W(piv, col))) piv = r;
        if (std::abs(W(piv, col)) < 1e-300) throw std::runtime_error("gj_inverse: singular");
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(W(piv, c), W(col, c));
                std::swap(Inv(piv, c), Inv(col, c));
            }
        const double d = W(col, col);
        for (int c = 0; c < n; ++c) {
            W(col, c) /= d;
            Inv(col, c) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = W(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                W(r, c) -= f * W(col, c);
                Inv(r, c) -= f * Inv(col, c);
            }
        }
    }
    return Inv;
}

inline cjack::Matrix mat_mul(const cjack::Matrix& A, const cjack::Matrix& B) {
    cjack::Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int m = 0; m < A.cols; ++m) {
            const double a = A(i, m);
            if (a == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C(i, j) += a * B(m, j);
        }
    return C;
}

// Direct sandwich: factor * (X'X)^{-1} (sum_j s_j s_j') (X'X)^{-1}, everything
// assembled from the raw data.
inline cjack::Matrix sandwich_oracle(const cjack::Dataset& ds, const std::vector<double>& resid,
                                     const cjack::ClusterIndex& ix, double factor) {
    const int N = ds.N(), k = ds.k();
    cjack::Matrix gram(k, k);
    for (int r = 0; r < N; ++r)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) gram(i, j) += ds.X(r, i) * ds.X(r, j);
    cjack::Matrix inv = gj_inverse(gram);
    cjack::Matrix meat(k, k);
    for (int j = 0; j < ix.J; ++j) {
        std::vector<double> s(k, 0.0);
        for (int r : ix.members[j])
            for (int c = 0; c < k; ++c) s[c] += resid[r] * ds.X(r, c);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) meat(a, b) += s[a] * s[b];
    }
    cjack::Matrix V = mat_mul(mat_mul(inv, meat), inv);
    for (auto& v : V.a) v *= factor;
    return V;
}

// OLS on the subsample excluding one cluster, with a set of columns removed
// (the dead dummy under TWFE); returns the full-length coefficient vector with
// removed columns set to zero.  Plain normal equations + Gauss-Jordan.
inline std::vector<double> refit_without_cluster(const cjack::Dataset& ds,
                                                 const cjack::ClusterIndex& ix, int omit,
                                                 const std::vector<int>& drop_cols = {}) {
    const int N = ds.N(), k = ds.k();
    std::vector<bool> dropc(k, false);
    for (int c : drop_cols) dropc[c] = true;
    std::vector<int> keep;
    for (int c = 0; c < k; ++c)
        if (!dropc[c]) keep.push_back(c);
    const int ka = static_cast<int>(keep.size());
    cjack::Matrix gram(ka, ka);
    std::vector<double> xty(ka, 0.0);
    for (int r = 0; r < N; ++r) {
        if (ix.row_cluster[r] == omit) continue;
        for (int i = 0; i < ka; ++i) {
            const double xi = ds.X(r, keep[i]);
            xty[i] += ds.y[r] * xi;
            for (int j = 0; j < ka; ++j) gram(i, j) += xi * ds.X(r, keep[j]);
        }
    }
    cjack::Matrix inv = gj_inverse(gram);
    std::vector<double> beta(k, 0.0);
    for (int i = 0; i < ka; ++i) {
        double s = 0.0;
        for (int j = 0; j < ka; ++j) s += inv(i, j) * xty[j];
        beta[keep[i]] = s;
    }
    return beta;
}

}  // namespace testsupport

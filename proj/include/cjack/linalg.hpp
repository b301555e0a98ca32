#pragma once

// Dense symmetric linear algebra used by every other module: packed symmetric
// storage, Cholesky solves, cyclic Jacobi eigendecomposition, and the
// eigenvalue-based Moore-Penrose pseudo-inverse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cjack/errors.hpp"

namespace cjack {

using Vec = std::vector<double>;

// Row-major dense matrix, nothing fancy.
struct Matrix {
    int rows = 0, cols = 0;
    Vec a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
};

// Symmetric matrix stored as the packed upper triangle (row-major), so
// symmetry is exact by construction.
struct SymMatrix {
    int dim = 0;
    Vec a;  // length dim*(dim+1)/2

    SymMatrix() = default;
    explicit SymMatrix(int d, double fill = 0.0)
        : dim(d), a(static_cast<size_t>(d) * (d + 1) / 2, fill) {}

    static size_t packed_size(int d) { return static_cast<size_t>(d) * (d + 1) / 2; }

    // offset of (i,j) with i <= j
    size_t idx(int i, int j) const {
        return static_cast<size_t>(i) * dim - static_cast<size_t>(i) * (i - 1) / 2 + (j - i);
    }
    double& at(int i, int j) {
        if (i > j) std::swap(i, j);
        return a[idx(i, j)];
    }
    double at(int i, int j) const {
        if (i > j) std::swap(i, j);
        return a[idx(i, j)];
    }
    double diag(int i) const { return a[idx(i, i)]; }

    void set_zero() { std::fill(a.begin(), a.end(), 0.0); }

    // this += w * x x^T
    void add_outer(const double* x, double w = 1.0) {
        size_t p = 0;
        for (int i = 0; i < dim; ++i) {
            const double wxi = w * x[i];
            for (int j = i; j < dim; ++j) a[p++] += wxi * x[j];
        }
    }
    void add(const SymMatrix& o, double w = 1.0) {
        for (size_t p = 0; p < a.size(); ++p) a[p] += w * o.a[p];
    }

    Matrix full() const {
        Matrix m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) m(i, j) = m(j, i) = at(i, j);
        return m;
    }

    static SymMatrix identity(int d) {
        SymMatrix s(d);
        for (int i = 0; i < d; ++i) s.at(i, i) = 1.0;
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
    double max_abs_diag() const {
        double m = 0.0;
        for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(diag(i)));
        return m;
    }

    // y = A x
    void mul_vec(const double* x, double* y) const {
        for (int i = 0; i < dim; ++i) y[i] = 0.0;
        size_t p = 0;
        for (int i = 0; i < dim; ++i) {
            y[i] += a[p] * x[i];
            ++p;
            for (int j = i + 1; j < dim; ++j, ++p) {
                y[i] += a[p] * x[j];
                y[j] += a[p] * x[i];
            }
        }
    }

    // x^T A x
    double quad_form(const double* x) const {
        double q = 0.0;
        size_t p = 0;
        for (int i = 0; i < dim; ++i) {
            q += a[p] * x[i] * x[i];
            ++p;
            for (int j = i + 1; j < dim; ++j, ++p) q += 2.0 * a[p] * x[i] * x[j];
        }
        return q;
    }
};

// Cholesky factorization A = L L^T of a symmetric positive definite matrix.
struct CholFactor {
    int dim = 0;
    Matrix L;  // lower triangle; upper part unused

    CholFactor() = default;

    // Returns false (without throwing) when a pivot is not positive, or falls
    // below rel_tol times the largest diagonal entry.
    bool factor(const SymMatrix& A, double rel_tol = 0.0) {
        dim = A.dim;
        L = Matrix(dim, dim);
        const double floor_pivot = rel_tol > 0.0 ? rel_tol * A.max_abs_diag() : 0.0;
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = A.at(i, j);
                const double* li = L.row(i);
                const double* lj = L.row(j);
                for (int m = 0; m < j; ++m) s -= li[m] * lj[m];
                if (i == j) {
                    if (!(s > floor_pivot)) return false;
                    L(i, i) = std::sqrt(s);
                } else {
                    L(i, j) = s / L(j, j);
                }
            }
        }
        return true;
    }

    // Solve L z = b in place.
    void forward(double* b) const {
        for (int i = 0; i < dim; ++i) {
            double s = b[i];
            const double* li = L.row(i);
            for (int m = 0; m < i; ++m) s -= li[m] * b[m];
            b[i] = s / li[i];
        }
    }
    // Solve L^T x = b in place.
    void backward(double* b) const {
        for (int i = dim - 1; i >= 0; --i) {
            double s = b[i];
            for (int m = i + 1; m < dim; ++m) s -= L(m, i) * b[m];
            b[i] = s / L(i, i);
        }
    }
    void solve_in_place(double* b) const {
        forward(b);
        backward(b);
    }
    Vec solve(const Vec& b) const {
        Vec x = b;
        solve_in_place(x.data());
        return x;
    }
    // ||L^{-1} x||^2, i.e. x^T A^{-1} x
    double inv_quad(const double* x) const {
        Vec z(x, x + dim);
        forward(z.data());
        double q = 0.0;
        for (double v : z) q += v * v;
        return q;
    }
};

// Solve A X = B for symmetric positive definite A.  Throws NotPositiveDefinite
// when a Cholesky pivot fails, which signals a singular Gram to callers that
// may fall back to pinv_sym.
inline Matrix chol_solve(const SymMatrix& A, const Matrix& B) {
    CholFactor f;
    if (!f.factor(A)) throw NotPositiveDefinite();
    Matrix X = B;
    Vec col(A.dim);
    for (int j = 0; j < B.cols; ++j) {
        for (int i = 0; i < A.dim; ++i) col[i] = B(i, j);
        f.solve_in_place(col.data());
        for (int i = 0; i < A.dim; ++i) X(i, j) = col[i];
    }
    return X;
}

inline Vec chol_solve(const SymMatrix& A, const Vec& b) {
    CholFactor f;
    if (!f.factor(A)) throw NotPositiveDefinite();
    return f.solve(b);
}

// Eigendecomposition A = U diag(values) U^T with eigenvalues ascending and
// orthonormal columns in U.
struct EigenDecomp {
    Vec values;
    Matrix U;  // column j is the eigenvector of values[j]
};

// Cyclic Jacobi for symmetric matrices.  Deterministic; sweep cap guards
// against pathological input.
inline EigenDecomp sym_eigen(const SymMatrix& A) {
    const int n = A.dim;
    Matrix W = A.full();
    Matrix V(n, n);
    for (int i = 0; i < n; ++i) V(i, i) = 1.0;

    if (n <= 1) {
        EigenDecomp d;
        d.values = n == 1 ? Vec{W(0, 0)} : Vec{};
        d.U = V;
        return d;
    }

    const int max_sweeps = 30 * n;
    const double scale = std::max(A.max_abs(), 1e-300);
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += std::abs(W(p, q));
        if (off <= 1e-14 * scale * n) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = W(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (W(q, q) - W(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int m = 0; m < n; ++m) {
                    const double wmp = W(m, p), wmq = W(m, q);
                    W(m, p) = c * wmp - s * wmq;
                    W(m, q) = s * wmp + c * wmq;
                }
                for (int m = 0; m < n; ++m) {
                    const double wpm = W(p, m), wqm = W(q, m);
                    W(p, m) = c * wpm - s * wqm;
                    W(q, m) = s * wpm + c * wqm;
                }
                for (int m = 0; m < n; ++m) {
                    const double vmp = V(m, p), vmq = V(m, q);
                    V(m, p) = c * vmp - s * vmq;
                    V(m, q) = s * vmp + c * vmq;
                }
            }
        }
    }
    if (!converged) {
        // final check; the loop may exit right at the cap having converged
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += std::abs(W(p, q));
        if (off > 1e-11 * scale * n) throw NoConvergence();
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return W(i, i) < W(j, j); });

    EigenDecomp d;
    d.values.resize(n);
    d.U = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        d.values[j] = W(order[j], order[j]);
        for (int i = 0; i < n; ++i) d.U(i, j) = V(i, order[j]);
    }
    return d;
}

// Moore-Penrose pseudo-inverse via the eigendecomposition; reciprocals of
// eigenvalues with |lambda| <= tol * max|lambda| are zeroed.
inline SymMatrix pinv_sym(const SymMatrix& A, double tol = 1e-10) {
    EigenDecomp d = sym_eigen(A);
    const int n = A.dim;
    double lmax = 0.0;
    for (double v : d.values) lmax = std::max(lmax, std::abs(v));
    const double cut = tol * lmax;
    SymMatrix P(n);
    for (int m = 0; m < n; ++m) {
        if (std::abs(d.values[m]) <= cut || d.values[m] == 0.0) continue;
        const double w = 1.0 / d.values[m];
        size_t p = 0;
        for (int i = 0; i < n; ++i) {
            const double wui = w * d.U(i, m);
            for (int j = i; j < n; ++j) P.a[p++] += wui * d.U(j, m);
        }
    }
    return P;
}

// Minimum-norm solve A^+ b through the pseudo-inverse.
inline Vec pinv_solve(const SymMatrix& A, const Vec& b, double tol = 1e-10) {
    SymMatrix P = pinv_sym(A, tol);
    Vec x(A.dim);
    P.mul_vec(b.data(), x.data());
    return x;
}

}  // namespace cjack

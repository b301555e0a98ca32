#pragma once

// OLS estimation and the per-cluster building blocks: empirical scores and
// cluster-level Gram matrices.  Summation order is fixed (cluster order, then
// row order) so results are reproducible bit for bit within a run.

#include <vector>

#include "cjack/dataset.hpp"
#include "cjack/linalg.hpp"

namespace cjack {

struct OlsFit {
    Vec beta;
    Vec resid;
    Vec xty;
    SymMatrix gram;
    CholFactor chol;
};

inline OlsFit fit_ols(const Dataset& ds) {
    const int N = ds.N(), k = ds.k();
    OlsFit fit;
    fit.gram = SymMatrix(k);
    fit.xty.assign(k, 0.0);
    for (int r = 0; r < N; ++r) {
        const double* x = ds.X.row(r);
        fit.gram.add_outer(x);
        for (int j = 0; j < k; ++j) fit.xty[j] += ds.y[r] * x[j];
    }
    if (!fit.chol.factor(fit.gram, 1e-11)) throw RankDeficient();
    fit.beta = fit.chol.solve(fit.xty);

    // one step of iterative refinement tightens the orthogonality residual
    Vec r0(k);
    fit.gram.mul_vec(fit.beta.data(), r0.data());
    for (int j = 0; j < k; ++j) r0[j] = fit.xty[j] - r0[j];
    fit.chol.solve_in_place(r0.data());
    for (int j = 0; j < k; ++j) fit.beta[j] += r0[j];

    fit.resid.resize(N);
    for (int r = 0; r < N; ++r) {
        const double* x = ds.X.row(r);
        double yhat = 0.0;
        for (int j = 0; j < k; ++j) yhat += x[j] * fit.beta[j];
        fit.resid[r] = ds.y[r] - yhat;
    }
    return fit;
}

// ---------------------------------------------------------------------------

struct ClusterScores {
    Dim dim = Dim::G;
    Matrix s;  // J x k, row j is s_j = X_j' u_j
    int J() const { return s.rows; }
};

inline ClusterScores cluster_scores(const OlsFit& fit, const Dataset& ds, const ClusterIndex& ix) {
    ClusterScores cs;
    cs.dim = ix.dim;
    cs.s = Matrix(ix.J, ds.k());
    for (int j = 0; j < ix.J; ++j) {
        double* sj = cs.s.row(j);
        for (int r : ix.members[j]) {
            const double* x = ds.X.row(r);
            const double u = fit.resid[r];
            for (int c = 0; c < ds.k(); ++c) sj[c] += u * x[c];
        }
    }
    return cs;
}

// ---------------------------------------------------------------------------

struct ClusterGrams {
    Dim dim = Dim::G;
    std::vector<SymMatrix> xtx;  // per cluster X_j' X_j
    Matrix xty;                  // J x k, row j is X_j' y_j
    int J() const { return static_cast<int>(xtx.size()); }
};

inline ClusterGrams cluster_grams(const Dataset& ds, const ClusterIndex& ix) {
    const int k = ds.k();
    ClusterGrams cg;
    cg.dim = ix.dim;
    cg.xtx.assign(ix.J, SymMatrix(k));
    cg.xty = Matrix(ix.J, k);
    for (int j = 0; j < ix.J; ++j) {
        SymMatrix& g = cg.xtx[j];
        double* xy = cg.xty.row(j);
        for (int r : ix.members[j]) {
            const double* x = ds.X.row(r);
            g.add_outer(x);
            for (int c = 0; c < k; ++c) xy[c] += ds.y[r] * x[c];
        }
    }
    return cg;
}

// Grams for a primary dimension obtained by summing the intersection grams.
// `parent` selects .first for G and .second for H.
inline ClusterGrams sum_intersection_grams(const ClusterGrams& inter, const ClusterIndex& ii,
                                           int J, Dim dim) {
    const int k = inter.xty.cols;
    ClusterGrams cg;
    cg.dim = dim;
    cg.xtx.assign(J, SymMatrix(k));
    cg.xty = Matrix(J, k);
    for (int i = 0; i < ii.J; ++i) {
        const int j = dim == Dim::G ? ii.parents[i].first : ii.parents[i].second;
        cg.xtx[j].add(inter.xtx[i]);
        double* xy = cg.xty.row(j);
        const double* src = inter.xty.row(i);
        for (int c = 0; c < k; ++c) xy[c] += src[c];
    }
    return cg;
}

}  // namespace cjack

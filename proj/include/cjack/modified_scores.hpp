#pragma once

// Score-form jackknife oracle.  Materializes the N_j x N_j residual-maker
// blocks M_jj = I - X_j (X'X)^{-1} X_j' and returns the modified scores
// s"_j = X_j' M_jj^{-1} u_j.  Test use only: the production jackknife never
// forms M_jj.

#include <vector>

#include "cjack/ols.hpp"

namespace cjack {

inline ClusterScores modified_scores(const OlsFit& fit, const Dataset& ds, const ClusterIndex& ix) {
    const int k = ds.k();
    ClusterScores out;
    out.dim = ix.dim;
    out.s = Matrix(ix.J, k);
    for (int j = 0; j < ix.J; ++j) {
        const auto& rows = ix.members[j];
        const int nj = static_cast<int>(rows.size());

        // W holds (X'X)^{-1} x_r for each member row
        Matrix W(nj, k);
        for (int a = 0; a < nj; ++a) {
            const double* x = ds.X.row(rows[a]);
            Vec w(x, x + k);
            fit.chol.solve_in_place(w.data());
            for (int c = 0; c < k; ++c) W(a, c) = w[c];
        }
        SymMatrix M(nj);
        for (int a = 0; a < nj; ++a) {
            const double* xa = ds.X.row(rows[a]);
            for (int b = a; b < nj; ++b) {
                double dot = 0.0;
                const double* wb = W.row(b);
                for (int c = 0; c < k; ++c) dot += xa[c] * wb[c];
                M.at(a, b) = (a == b ? 1.0 : 0.0) - dot;
            }
        }
        CholFactor f;
        if (!f.factor(M, 1e-12)) throw SingularMjj(j);
        Vec v(nj);
        for (int a = 0; a < nj; ++a) v[a] = fit.resid[rows[a]];
        f.solve_in_place(v.data());
        double* sj = out.s.row(j);
        for (int a = 0; a < nj; ++a) {
            const double* x = ds.X.row(rows[a]);
            for (int c = 0; c < k; ++c) sj[c] += v[a] * x[c];
        }
    }
    return out;
}

}  // namespace cjack

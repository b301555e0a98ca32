#pragma once

// Cluster-level influence measures: leverage, partial leverage,
// omit-one-cluster coefficients, their coefficients of variation, and the
// effective number of clusters G*(0).

#include <cmath>
#include <vector>

#include "cjack/crve.hpp"
#include "cjack/ols.hpp"

namespace cjack {

// Cluster leverage L_j = tr(X_j (X'X)^{-1} X_j') = sum of member hat values.
inline Vec leverage(const OlsFit& fit, const Dataset& ds, const ClusterIndex& ix) {
    Vec h = hat_values(fit, ds);
    Vec L(ix.J, 0.0);
    for (int j = 0; j < ix.J; ++j)
        for (int r : ix.members[j]) L[j] += h[r];
    return L;
}

inline Vec leverage_from_hat(const Vec& hat, const ClusterIndex& ix) {
    Vec L(ix.J, 0.0);
    for (int j = 0; j < ix.J; ++j)
        for (int r : ix.members[j]) L[j] += hat[r];
    return L;
}

// Residualize column `coef` on the remaining columns.
inline Vec residualize_column(const OlsFit& fit, const Dataset& ds, int coef) {
    const int N = ds.N(), k = ds.k();
    Vec xt(N);
    if (k == 1) {
        for (int r = 0; r < N; ++r) xt[r] = ds.X(r, 0);
        return xt;
    }
    SymMatrix Ar(k - 1);
    Vec br(k - 1);
    std::vector<int> keep;
    for (int c = 0; c < k; ++c)
        if (c != coef) keep.push_back(c);
    for (int i = 0; i < k - 1; ++i) {
        br[i] = fit.gram.at(keep[i], coef);
        for (int j = i; j < k - 1; ++j) Ar.at(i, j) = fit.gram.at(keep[i], keep[j]);
    }
    CholFactor f;
    if (!f.factor(Ar, 1e-11)) throw RankDeficient("remaining columns are collinear");
    f.solve_in_place(br.data());
    double ss = 0.0, ss0 = 0.0;
    for (int r = 0; r < N; ++r) {
        const double* x = ds.X.row(r);
        double v = x[coef];
        ss0 += v * v;
        for (int i = 0; i < k - 1; ++i) v -= br[i] * x[keep[i]];
        xt[r] = v;
        ss += v * v;
    }
    if (ss <= 1e-12 * ss0) throw CollinearColumn(ds.colnames[coef] + " is collinear with the other columns");
    return xt;
}

// Partial leverage: cluster shares of the residualized-regressor sum of
// squares.  Values lie in [0,1] and sum to one.
inline Vec partial_leverage(const OlsFit& fit, const Dataset& ds, const ClusterIndex& ix, int coef) {
    Vec xt = residualize_column(fit, ds, coef);
    double total = 0.0;
    for (double v : xt) total += v * v;
    Vec L(ix.J, 0.0);
    for (int j = 0; j < ix.J; ++j) {
        double s = 0.0;
        for (int r : ix.members[j]) s += xt[r] * xt[r];
        L[j] = s / total;
    }
    return L;
}

// Per-cluster contributions gamma_j = a'(X'X)^{-1} X_j'X_j (X'X)^{-1} a with
// a the coefficient selector.
inline Vec gstar_contributions(const OlsFit& fit, const Dataset& ds, const ClusterIndex& ix,
                               int coef) {
    const int k = ds.k();
    Vec w(k, 0.0);
    w[coef] = 1.0;
    fit.chol.solve_in_place(w.data());
    Vec gamma(ix.J, 0.0);
    for (int j = 0; j < ix.J; ++j) {
        double s = 0.0;
        for (int r : ix.members[j]) {
            const double* x = ds.X.row(r);
            double dot = 0.0;
            for (int c = 0; c < k; ++c) dot += x[c] * w[c];
            s += dot * dot;
        }
        gamma[j] = s;
    }
    return gamma;
}

// Effective number of clusters G*(0) = G / (1 + Gamma), with Gamma the
// normalized dispersion of the gamma_j.
inline double gstar(const OlsFit& fit, const Dataset& ds, const ClusterIndex& ix, int coef) {
    Vec gamma = gstar_contributions(fit, ds, ix, coef);
    const int J = ix.J;
    double mean = 0.0;
    for (double g : gamma) mean += g;
    mean /= J;
    if (!(mean > 0.0)) throw DegenerateSelector();
    double disp = 0.0;
    for (double g : gamma) disp += (g - mean) * (g - mean);
    disp /= J * mean * mean;
    return J / (1.0 + disp);
}

// ---------------------------------------------------------------------------
// panel of coefficients of variation

struct DimDiagnostics {
    Dim dim = Dim::G;
    int J = 0;
    double size_cv = 0.0;
    double leverage_cv = 0.0;
    double partial_leverage_cv = 0.0;
    double beta_omit_cv = 0.0;
    double gstar = 0.0;
};

struct DiagPanel {
    DimDiagnostics g, h, i;
};

namespace detail {

// sd/mean with the J-1 denominator; for signed series (omit-one betas) the
// caller passes |mean|.
inline double coef_of_variation(const Vec& v, bool abs_mean) {
    const int n = static_cast<int>(v.size());
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1));
    const double denom = abs_mean ? std::abs(mean) : mean;
    return sd / denom;
}

inline DimDiagnostics dim_diagnostics(const TwoWayAnalysis& an, const Dataset& ds,
                                      const ClusterIndex& ix, const JackknifeBetas& jb, int coef) {
    DimDiagnostics d;
    d.dim = ix.dim;
    d.J = ix.J;
    Vec sizes(ix.J);
    for (int j = 0; j < ix.J; ++j) sizes[j] = ix.sizes[j];
    d.size_cv = coef_of_variation(sizes, false);
    d.leverage_cv = coef_of_variation(leverage_from_hat(an.hat, ix), false);
    d.partial_leverage_cv = coef_of_variation(partial_leverage(an.fit, ds, ix, coef), false);
    Vec betas(ix.J);
    for (int j = 0; j < ix.J; ++j) betas[j] = jb.betas(j, coef);
    d.beta_omit_cv = coef_of_variation(betas, true);
    d.gstar = gstar(an.fit, ds, ix, coef);
    return d;
}

}  // namespace detail

inline DiagPanel diag_panel(const TwoWayAnalysis& an, const Dataset& ds, int coef) {
    DiagPanel p;
    p.g = detail::dim_diagnostics(an, ds, an.gi, an.jbG, coef);
    p.h = detail::dim_diagnostics(an, ds, an.hi, an.jbH, coef);
    p.i = detail::dim_diagnostics(an, ds, an.ii, an.jbI, coef);
    return p;
}

}  // namespace cjack

#pragma once

// Cluster-robust variance estimators: CV1 components and combinations,
// delete-one-cluster jackknife (CV3) with the generalized-inverse rule for
// fixed effects, eigenvalue repair of indefinite three-term matrices, and the
// max-se selection.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cjack/linalg.hpp"
#include "cjack/ols.hpp"

namespace cjack {

enum class Family { CV1, CV3 };
enum class Arity { HC, OneWayG, OneWayH, OneWayI, TwoTerm, ThreeTerm, ThreePlus, Max };
enum class Selected { none, three_term, oneway_g, oneway_h };

inline const char* family_name(Family f) { return f == Family::CV1 ? "CV1" : "CV3"; }
inline const char* arity_name(Arity a) {
    switch (a) {
        case Arity::HC: return "HC";
        case Arity::OneWayG: return "G";
        case Arity::OneWayH: return "H";
        case Arity::OneWayI: return "I";
        case Arity::TwoTerm: return "2";
        case Arity::ThreeTerm: return "3";
        case Arity::ThreePlus: return "3+";
        case Arity::Max: return "max";
    }
    return "?";
}

struct CrveMatrix {
    SymMatrix m;
    Family family = Family::CV1;
    Arity arity = Arity::ThreeTerm;
    bool defined = true;
};

// ---------------------------------------------------------------------------
// CV1 sandwich components

// (X'X)^{-1} (sum_j s_j s_j') (X'X)^{-1} scaled by J(N-1)/((J-1)(N-k)).
inline CrveMatrix cv1_component(const OlsFit& fit, const ClusterScores& scores, int N) {
    const int J = scores.J();
    const int k = fit.gram.dim;
    if (J < 2) throw TooFewClusters(std::string("dimension ") + dim_name(scores.dim) +
                                    " has fewer than 2 clusters");
    const double factor =
        static_cast<double>(J) * (N - 1) / (static_cast<double>(J - 1) * (N - k));
    CrveMatrix v;
    v.family = Family::CV1;
    v.arity = scores.dim == Dim::G   ? Arity::OneWayG
              : scores.dim == Dim::H ? Arity::OneWayH
                                     : Arity::OneWayI;
    v.m = SymMatrix(k);
    Vec w(k);
    for (int j = 0; j < J; ++j) {
        const double* s = scores.s.row(j);
        for (int c = 0; c < k; ++c) w[c] = s[c];
        fit.chol.solve_in_place(w.data());
        v.m.add_outer(w.data(), factor);
    }
    return v;
}

// ---------------------------------------------------------------------------
// delete-one-cluster estimates

struct JackknifeBetas {
    Dim dim = Dim::G;
    Matrix betas;  // J x k
    bool ginv_mode = false;
    std::vector<uint8_t> ginv_used;  // per cluster: generalized inverse applied
    int J() const { return betas.rows; }
};

// beta^(j) = (X'X - X_j'X_j)^{-1} (X'y - X_j'y_j).  With generalized-inverse
// mode on, rows/columns whose diagonal collapses (the omitted cluster's own
// fixed effect) are dropped from the solve and those coefficients set to zero;
// a full pseudo-inverse is the fallback when the remaining block is still
// singular.
inline JackknifeBetas delete_one_betas(const ClusterGrams& grams, const SymMatrix& fullGram,
                                       const Vec& fullXty, bool ginv_mode) {
    const int J = grams.J();
    const int k = fullGram.dim;
    if (J < 2) throw TooFewClusters(std::string("dimension ") + dim_name(grams.dim) +
                                    " has fewer than 2 clusters");
    JackknifeBetas jb;
    jb.dim = grams.dim;
    jb.ginv_mode = ginv_mode;
    jb.betas = Matrix(J, k);
    jb.ginv_used.assign(J, 0);

    const double dead_tol = 1e-10;
    SymMatrix A(k);
    Vec b(k), x(k);
    std::vector<int> alive;
    for (int j = 0; j < J; ++j) {
        A = fullGram;
        A.add(grams.xtx[j], -1.0);
        const double* gxy = grams.xty.row(j);
        for (int c = 0; c < k; ++c) b[c] = fullXty[c] - gxy[c];

        const double maxd = A.max_abs_diag();
        alive.clear();
        for (int c = 0; c < k; ++c)
            if (A.diag(c) > dead_tol * maxd) alive.push_back(c);

        bool solved = false;
        if (static_cast<int>(alive.size()) == k) {
            CholFactor f;
            if (f.factor(A, 1e-11)) {
                x = b;
                f.solve_in_place(x.data());
                solved = true;
            } else if (!ginv_mode) {
                throw SingularReducedGram(j);
            }
        } else if (!ginv_mode) {
            throw SingularReducedGram(j);
        }

        if (!solved && static_cast<int>(alive.size()) < k) {
            const int ka = static_cast<int>(alive.size());
            SymMatrix Ar(ka);
            Vec br(ka);
            for (int i = 0; i < ka; ++i) {
                br[i] = b[alive[i]];
                for (int c = i; c < ka; ++c) Ar.at(i, c) = A.at(alive[i], alive[c]);
            }
            CholFactor f;
            if (f.factor(Ar, 1e-11)) {
                f.solve_in_place(br.data());
                std::fill(x.begin(), x.end(), 0.0);
                for (int i = 0; i < ka; ++i) x[alive[i]] = br[i];
                solved = true;
                jb.ginv_used[j] = 1;
            }
        }
        if (!solved) {
            // remaining block still singular: minimum-norm solution
            x = pinv_solve(A, b);
            jb.ginv_used[j] = 1;
        }
        double* out = jb.betas.row(j);
        for (int c = 0; c < k; ++c) out[c] = x[c];
    }
    return jb;
}

// ---------------------------------------------------------------------------
// CV3 jackknife component

// ((J-1)/J) sum_j (beta^(j) - beta)(beta^(j) - beta)', restricted to the
// leading zdim coefficients (the non-FE block when fixed effects are present).
inline CrveMatrix cv3_component(const JackknifeBetas& jb, const Vec& beta_hat, int zdim) {
    const int J = jb.J();
    if (J < 2) throw TooFewClusters();
    CrveMatrix v;
    v.family = Family::CV3;
    v.arity = jb.dim == Dim::G   ? Arity::OneWayG
              : jb.dim == Dim::H ? Arity::OneWayH
                                 : Arity::OneWayI;
    v.m = SymMatrix(zdim);
    const double factor = static_cast<double>(J - 1) / J;
    Vec d(zdim);
    for (int j = 0; j < J; ++j) {
        const double* bj = jb.betas.row(j);
        for (int c = 0; c < zdim; ++c) d[c] = bj[c] - beta_hat[c];
        v.m.add_outer(d.data(), factor);
    }
    return v;
}

// ---------------------------------------------------------------------------
// combinations and eigen repair

enum class Combine { two_term, three_term };

inline CrveMatrix combine(const CrveMatrix& vG, const CrveMatrix& vH, const CrveMatrix& vI,
                          Combine mode) {
    CrveMatrix v;
    v.family = vG.family;
    v.arity = mode == Combine::two_term ? Arity::TwoTerm : Arity::ThreeTerm;
    v.m = vG.m;
    v.m.add(vH.m);
    if (mode == Combine::three_term) v.m.add(vI.m, -1.0);
    return v;
}

// Eigen repair: replace eigenvalues below eta by eta.  A matrix that is
// already positive definite is returned unchanged.
inline CrveMatrix eigenfix(const CrveMatrix& v3, double eta = 1e-12) {
    CrveMatrix v;
    v.family = v3.family;
    v.arity = Arity::ThreePlus;
    EigenDecomp d = sym_eigen(v3.m);
    double lmin = std::numeric_limits<double>::infinity();
    for (double lam : d.values) lmin = std::min(lmin, lam);
    if (lmin >= eta) {
        v.m = v3.m;
        return v;
    }
    const int n = v3.m.dim;
    v.m = SymMatrix(n);
    for (int m = 0; m < n; ++m) {
        const double lam = std::max(d.values[m], eta);
        size_t p = 0;
        for (int i = 0; i < n; ++i) {
            const double lu = lam * d.U(i, m);
            for (int j = i; j < n; ++j) v.m.a[p++] += lu * d.U(j, m);
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// heteroskedasticity-robust specializations (singleton clusters)

// Hat values h_r = x_r' (X'X)^{-1} x_r.
inline Vec hat_values(const OlsFit& fit, const Dataset& ds) {
    const int N = ds.N();
    Vec h(N);
    for (int r = 0; r < N; ++r) h[r] = fit.chol.inv_quad(ds.X.row(r));
    return h;
}

// Variance of one coefficient under HC1 / HC3, through the singleton-cluster
// identities: HC1 is CV1 with J = N, and HC3 is the singleton jackknife
// (factor (N-1)/N, scores scaled by 1/(1-h_r)).
struct HcVariances {
    double hc1 = 0.0, hc3 = 0.0;
    bool hc3_defined = true;
};

inline HcVariances hc_variances(const OlsFit& fit, const Dataset& ds, const Vec& hat, int coef) {
    const int N = ds.N(), k = ds.k();
    Vec w(k, 0.0);
    w[coef] = 1.0;
    fit.chol.solve_in_place(w.data());
    HcVariances out;
    double s1 = 0.0, s3 = 0.0;
    for (int r = 0; r < N; ++r) {
        const double* x = ds.X.row(r);
        double dot = 0.0;
        for (int c = 0; c < k; ++c) dot += x[c] * w[c];
        const double su = fit.resid[r] * dot;
        s1 += su * su;
        const double m = 1.0 - hat[r];
        if (m <= 1e-12) {
            out.hc3_defined = false;
        } else {
            const double t = su / m;
            s3 += t * t;
        }
    }
    out.hc1 = s1 * static_cast<double>(N) / (N - k);
    out.hc3 = s3 * static_cast<double>(N - 1) / N;
    return out;
}

// Full HC matrices; used by the report path and as cross-checks.
inline CrveMatrix hc1_matrix(const OlsFit& fit, const Dataset& ds) {
    const int N = ds.N(), k = ds.k();
    CrveMatrix v;
    v.family = Family::CV1;
    v.arity = Arity::HC;
    v.m = SymMatrix(k);
    Vec w(k);
    for (int r = 0; r < N; ++r) {
        const double* x = ds.X.row(r);
        for (int c = 0; c < k; ++c) w[c] = fit.resid[r] * x[c];
        fit.chol.solve_in_place(w.data());
        v.m.add_outer(w.data(), static_cast<double>(N) / (N - k));
    }
    return v;
}

inline CrveMatrix hc3_matrix(const OlsFit& fit, const Dataset& ds, const Vec& hat) {
    const int N = ds.N(), k = ds.k();
    CrveMatrix v;
    v.family = Family::CV3;
    v.arity = Arity::HC;
    v.m = SymMatrix(k);
    Vec w(k);
    for (int r = 0; r < N; ++r) {
        const double m = 1.0 - hat[r];
        if (m <= 1e-12) {
            v.defined = false;
            continue;
        }
        const double* x = ds.X.row(r);
        for (int c = 0; c < k; ++c) w[c] = fit.resid[r] * x[c] / m;
        fit.chol.solve_in_place(w.data());
        v.m.add_outer(w.data(), static_cast<double>(N - 1) / N);
    }
    return v;
}

// ---------------------------------------------------------------------------
// full two-way analysis

struct TwoWayOptions {
    double eta = 1e-12;  // eigen repair floor
    // generalized-inverse jackknife; -1 = auto (on when FE blocks present)
    int ginv = -1;
};

struct TwoWayAnalysis {
    ClusterIndex gi, hi, ii;
    OlsFit fit;
    Vec hat;
    int zdim = 0;  // CV3 block size (p when FE present, else k)
    CrveMatrix v1G, v1H, v1I, v1_2, v1_3, v1_3p;
    CrveMatrix v3G, v3H, v3I, v3_2, v3_3, v3_3p;
    JackknifeBetas jbG, jbH, jbI;
};

inline TwoWayAnalysis analyze(const Dataset& ds, const TwoWayOptions& opts = {}) {
    TwoWayAnalysis an;
    an.gi = build_cluster_index(ds.g_labels, Dim::G);
    an.hi = build_cluster_index(ds.h_labels, Dim::H);
    an.ii = intersect_index(an.gi, an.hi);
    an.fit = fit_ols(ds);
    an.hat = hat_values(an.fit, ds);

    const int N = ds.N();
    const bool ginv = opts.ginv < 0 ? ds.has_fe() : opts.ginv != 0;
    an.zdim = ds.has_fe() ? ds.n_base : ds.k();

    // CV1: empirical scores per dimension; G/H sums checked against the
    // intersection scores by construction (residual pass happens once).
    ClusterScores sG = cluster_scores(an.fit, ds, an.gi);
    ClusterScores sH = cluster_scores(an.fit, ds, an.hi);
    ClusterScores sI = cluster_scores(an.fit, ds, an.ii);
    an.v1G = cv1_component(an.fit, sG, N);
    an.v1H = cv1_component(an.fit, sH, N);
    an.v1I = cv1_component(an.fit, sI, N);
    an.v1_2 = combine(an.v1G, an.v1H, an.v1I, Combine::two_term);
    an.v1_3 = combine(an.v1G, an.v1H, an.v1I, Combine::three_term);
    an.v1_3p = eigenfix(an.v1_3, opts.eta);

    // CV3: intersection grams in one pass, G/H grams by summation.  The
    // components are assembled over all k coefficients (omitted-cluster FE
    // entries are zero under the generalized inverse); only the leading
    // Z-block entries are interpretable, but the eigen repair must see the
    // full matrix, which under two-way FE is never positive definite.
    ClusterGrams gI = cluster_grams(ds, an.ii);
    ClusterGrams gG = sum_intersection_grams(gI, an.ii, an.gi.J, Dim::G);
    ClusterGrams gH = sum_intersection_grams(gI, an.ii, an.hi.J, Dim::H);
    an.jbG = delete_one_betas(gG, an.fit.gram, an.fit.xty, ginv);
    an.jbH = delete_one_betas(gH, an.fit.gram, an.fit.xty, ginv);
    an.jbI = delete_one_betas(gI, an.fit.gram, an.fit.xty, ginv);
    an.v3G = cv3_component(an.jbG, an.fit.beta, ds.k());
    an.v3H = cv3_component(an.jbH, an.fit.beta, ds.k());
    an.v3I = cv3_component(an.jbI, an.fit.beta, ds.k());
    an.v3_2 = combine(an.v3G, an.v3H, an.v3I, Combine::two_term);
    an.v3_3 = combine(an.v3G, an.v3H, an.v3I, Combine::three_term);
    an.v3_3p = eigenfix(an.v3_3, opts.eta);
    return an;
}

// ---------------------------------------------------------------------------
// the 16-entry SE menu

struct MenuEntry {
    Family family = Family::CV1;
    Arity arity = Arity::HC;
    double var = 0.0;
    double se = 0.0;
    bool defined = true;
    Selected selected = Selected::none;
};

namespace detail {

inline MenuEntry menu_entry(Family fam, Arity ar, double var) {
    MenuEntry e;
    e.family = fam;
    e.arity = ar;
    e.var = var;
    if (var > 0.0 && std::isfinite(var)) {
        e.se = std::sqrt(var);
    } else {
        e.defined = false;
        e.se = std::numeric_limits<double>::quiet_NaN();
    }
    return e;
}

// max-se: largest of the three-term (if defined), G, and H standard errors.
inline MenuEntry max_entry(Family fam, const MenuEntry& e3, const MenuEntry& eG,
                           const MenuEntry& eH) {
    MenuEntry e;
    e.family = fam;
    e.arity = Arity::Max;
    e.defined = false;
    e.var = std::numeric_limits<double>::quiet_NaN();
    e.se = std::numeric_limits<double>::quiet_NaN();
    const MenuEntry* cands[3] = {&e3, &eG, &eH};
    const Selected tags[3] = {Selected::three_term, Selected::oneway_g, Selected::oneway_h};
    for (int i = 0; i < 3; ++i) {
        if (!cands[i]->defined) continue;
        if (!e.defined || cands[i]->se > e.se) {
            e.defined = true;
            e.var = cands[i]->var;
            e.se = cands[i]->se;
            e.selected = tags[i];
        }
    }
    return e;
}

}  // namespace detail

// The sixteen standard errors for one coefficient, in report order.
inline std::vector<MenuEntry> variance_menu(const TwoWayAnalysis& an, const Dataset& ds, int coef) {
    if (coef < 0 || coef >= ds.k()) throw UsageError("coefficient index out of range");
    const OlsFit& fit = an.fit;
    HcVariances hc = hc_variances(fit, ds, an.hat, coef);

    auto cv1 = [&](const CrveMatrix& v) {
        return detail::menu_entry(Family::CV1, v.arity, v.m.diag(coef));
    };
    const bool in_z = coef < an.zdim;
    auto cv3 = [&](const CrveMatrix& v) {
        const double var = in_z ? v.m.diag(coef) : std::numeric_limits<double>::quiet_NaN();
        return detail::menu_entry(Family::CV3, v.arity, var);
    };

    std::vector<MenuEntry> menu;
    menu.reserve(16);
    menu.push_back(detail::menu_entry(Family::CV1, Arity::HC, hc.hc1));
    menu.push_back(cv1(an.v1I));
    menu.push_back(cv1(an.v1G));
    menu.push_back(cv1(an.v1H));
    menu.push_back(cv1(an.v1_2));
    menu.push_back(cv1(an.v1_3));
    menu.push_back(cv1(an.v1_3p));
    menu.push_back(detail::max_entry(Family::CV1, menu[5], menu[2], menu[3]));

    menu.push_back(detail::menu_entry(Family::CV3, Arity::HC,
                                      hc.hc3_defined ? hc.hc3
                                                     : std::numeric_limits<double>::quiet_NaN()));
    menu.push_back(cv3(an.v3I));
    menu.push_back(cv3(an.v3G));
    menu.push_back(cv3(an.v3H));
    menu.push_back(cv3(an.v3_2));
    menu.push_back(cv3(an.v3_3));
    menu.push_back(cv3(an.v3_3p));
    menu.push_back(detail::max_entry(Family::CV3, menu[13], menu[10], menu[11]));
    return menu;
}

}  // namespace cjack

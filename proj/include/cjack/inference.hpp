#pragma once

// Test statistics, p-values, confidence intervals, and the W_min / max-se
// decision rule.  Two-way tests use the Student's t distribution with
// min{G,H}-1 degrees of freedom; one-way tests use J-1; HC tests use N-k.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cjack/crve.hpp"
#include "cjack/student_t.hpp"

namespace cjack {

struct TestResult {
    Family family = Family::CV1;
    Arity arity = Arity::HC;
    double se = 0.0;
    double stat = 0.0;  // t statistic
    int df = 0;
    double p = 1.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    bool defined = true;
    Selected selected = Selected::none;
};

// Wald statistic (R beta - r)' (R V R')^{-1} (R beta - r); empty when R V R'
// is not positive definite.
inline std::optional<double> wald(const Matrix& R, const Vec& r, const Vec& beta,
                                  const CrveMatrix& V) {
    const int q = R.rows;
    const int k = R.cols;
    if (!V.defined) return std::nullopt;
    Vec d(q, 0.0);
    for (int i = 0; i < q; ++i) {
        double s = -r[i];
        for (int c = 0; c < k; ++c) s += R(i, c) * beta[c];
        d[i] = s;
    }
    // S = R V R'
    SymMatrix S(q);
    Vec vr(k);
    for (int i = 0; i < q; ++i) {
        V.m.mul_vec(R.row(i), vr.data());
        for (int j = i; j < q; ++j) {
            double s = 0.0;
            for (int c = 0; c < k; ++c) s += R(j, c) * vr[c];
            S.at(i, j) = s;
        }
    }
    CholFactor f;
    if (!f.factor(S)) return std::nullopt;
    return f.inv_quad(d.data());
}

// W_min = min{ max{W3, 0}, W_G, W_H }, with max{W3,0} = 0 when W3 is negative
// or undefined.  Ties resolve in the order three-term, G, H.
inline std::pair<double, Selected> w_min(std::optional<double> w3, double wG, double wH) {
    const double w3f = (w3.has_value() && *w3 > 0.0) ? *w3 : 0.0;
    double best = w3f;
    Selected sel = Selected::three_term;
    if (wG < best) {
        best = wG;
        sel = Selected::oneway_g;
    }
    if (wH < best) {
        best = wH;
        sel = Selected::oneway_h;
    }
    return {best, sel};
}

inline int df_for(Arity ar, int G, int H, int I, int N, int k) {
    switch (ar) {
        case Arity::HC: return N - k;
        case Arity::OneWayG: return G - 1;
        case Arity::OneWayH: return H - 1;
        case Arity::OneWayI: return I - 1;
        default: return std::min(G, H) - 1;
    }
}

inline TestResult t_test(double beta_j, const MenuEntry& e, int df, double level) {
    TestResult t;
    t.family = e.family;
    t.arity = e.arity;
    t.df = df;
    t.selected = e.selected;
    t.defined = e.defined;
    if (!e.defined) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        t.se = t.stat = t.p = t.ci_lo = t.ci_hi = nan;
        return t;
    }
    t.se = e.se;
    t.stat = beta_j / e.se;
    t.p = student_t_pvalue(t.stat, df);
    const double crit = student_t_crit(1.0 - level, df);
    t.ci_lo = beta_j - crit * e.se;
    t.ci_hi = beta_j + crit * e.se;
    return t;
}

inline std::vector<TestResult> t_report(double beta_j, const std::vector<MenuEntry>& menu, int G,
                                        int H, int I, int N, int k, double level = 0.95) {
    std::vector<TestResult> out;
    out.reserve(menu.size());
    for (const auto& e : menu) out.push_back(t_test(beta_j, e, df_for(e.arity, G, H, I, N, k), level));
    return out;
}

}  // namespace cjack

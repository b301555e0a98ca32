#pragma once

// Student's t tail probabilities through the regularized incomplete beta
// function, plus the quantile needed for confidence intervals.

#include <cmath>
#include <limits>

#include "cjack/errors.hpp"

namespace cjack {
namespace detail {

inline double log_gamma(double x) { return std::lgamma(x); }

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-12;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    return h;  // converged to working precision for all practical (a,b,x)
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // front = x^a (1-x)^b / B(a,b); symmetric in (a,b) -> (b,a), x -> 1-x
    const double lfront = detail::log_gamma(a + b) - detail::log_gamma(a) - detail::log_gamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(lfront);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a t statistic: p = I_{df/(df+t^2)}(df/2, 1/2).
// Symmetric in the sign of t by construction.
inline double student_t_pvalue(double t, int df) {
    if (df < 1) throw Error("student_t_pvalue: df must be >= 1");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double t2 = t * t;
    const double x = df / (df + t2);
    return inc_beta(0.5 * df, 0.5, x);
}

// Upper quantile: the critical value c > 0 with two-sided p-value alpha,
// i.e. P(|T| > c) = alpha.  Bisection; plenty fast for our use.
inline double student_t_crit(double alpha, int df) {
    if (df < 1) throw Error("student_t_crit: df must be >= 1");
    if (alpha >= 1.0) return 0.0;
    if (alpha <= 0.0) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = 1.0;
    while (student_t_pvalue(hi, df) > alpha) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_pvalue(mid, df) > alpha)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace cjack

// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL/SKIP line per criterion.  Exit code 0 only when
// nothing failed (skipped data-dependent checks do not fail).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <thread>
#include <vector>

#include "cjack/config.hpp"
#include "cjack/crve.hpp"
#include "cjack/dataset.hpp"
#include "cjack/inference.hpp"
#include "cjack/modified_scores.hpp"
#include "cjack/placebo.hpp"
#include "cjack/report.hpp"
#include "cjack/sim.hpp"
#include "support/moments.hpp"
#include "support/oracles.hpp"
#include "support/random_data.hpp"

using namespace cjack;

namespace {

int g_failures = 0;
int g_skips = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
    std::fflush(stdout);
}

void skip(const std::string& name, const std::string& why) {
    std::printf("[SKIP] %s: %s\n", name.c_str(), why.c_str());
    ++g_skips;
    std::fflush(stdout);
}

bool file_exists(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0;
}

std::string data_dir() {
    const char* env = std::getenv("CJACK_DATA_DIR");
    if (env && *env) return env;
    return std::string(CJACK_SOURCE_DIR) + "/data";
}

int accept_threads() {
    const char* env = std::getenv("CJACK_ACCEPT_THREADS");
    if (env && *env) return std::max(1, std::atoi(env));
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct CmdResult {
    int exit_code = -1;
    std::string output;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(CJACK_CLI_PATH) + " " + args + " 2>/dev/null";
    CmdResult res;
    std::array<char, 8192> buf{};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

double rate(const EstimatorTally& t, long reps) {
    return static_cast<double>(t.rejections) / reps;
}
double urate(const EstimatorTally& t, long reps) {
    return static_cast<double>(t.undefined) / reps;
}

const TestResult* find_row(const FitReport& rep, Family f, Arity a) {
    for (const auto& r : rep.rows)
        if (r.family == f && r.arity == a) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------

void criterion1_nlswork() {
    const std::string name = "criterion 1 (nlswork reproduction)";
    const std::string csv = data_dir() + "/nlswork.csv";
    if (!file_exists(csv)) {
        skip(name, "data file " + csv + " not found; run tools/fetch_nlswork.py first");
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    CmdResult res = run_cli("fit --data " + csv +
                            " --y hours --x vismin --controls south"
                            " --fevar age,birth_yr,year,ind_code --cluster age,ind_code"
                            " --sample \"age>=25 & age<=35\" --format jsonl");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.exit_code != 0) {
        report(name, false, "fit command failed with exit code " + std::to_string(res.exit_code));
        return;
    }
    FitReport rep = parse_jsonl(res.output);
    std::ostringstream out;
    bool ok = true;
    auto check = [&](const char* what, double got, double want, double tol) {
        const bool good = std::abs(got - want) <= tol;
        if (!good) {
            ok = false;
            out << " " << what << "=" << got << " (want " << want << " +-" << tol << ");";
        }
    };
    check("N", rep.meta.N, 13754, 0);
    check("beta", rep.meta.estimate, 1.054672, 1e-5);
    const TestResult* m1 = find_row(rep, Family::CV1, Arity::Max);
    const TestResult* m3 = find_row(rep, Family::CV3, Arity::Max);
    if (!m1 || !m3 || !m1->defined || !m3->defined) {
        report(name, false, "max-se rows missing or undefined");
        return;
    }
    check("CV1max.se", m1->se, 0.420220, 1e-4);
    check("CV1max.t", m1->stat, 2.5098, 1e-3);
    check("CV1max.p", m1->p, 0.0309, 1e-3);
    check("CV3max.se", m3->se, 0.521628, 1e-4);
    check("CV3max.t", m3->stat, 2.0219, 1e-3);
    check("CV3max.p", m3->p, 0.0708, 1e-3);
    // one-way clustering by industry matches the native regression output
    const TestResult* oneway = find_row(rep, Family::CV1, Arity::OneWayH);
    if (oneway && oneway->defined) {
        check("CV1-H.se", oneway->se, 0.4202197, 1e-4);
        check("CV1-H.p", oneway->p, 0.029, 1e-3);
        check("CV1-H.ci_lo", oneway->ci_lo, 0.1297746, 1e-4);
        check("CV1-H.ci_hi", oneway->ci_hi, 1.9795693, 1e-4);
    }
    check("G(age)", rep.diag.g.J, 11, 0);
    check("H(ind)", rep.diag.h.J, 12, 0);
    check("I", rep.diag.i.J, 132, 0);
    check("Gstar(age)", rep.diag.g.gstar, 10.90, 0.05);
    check("Gstar(ind)", rep.diag.h.gstar, 5.21, 0.05);
    check("Gstar(intersect)", rep.diag.i.gstar, 56.26, 0.05);
    check("size_cv(age)", rep.diag.g.size_cv, 0.0987, 1e-3);
    check("lev_cv(age)", rep.diag.g.leverage_cv, 0.1813, 1e-3);
    check("plev_cv(age)", rep.diag.g.partial_leverage_cv, 0.0927, 1e-3);
    check("bomit_cv(age)", rep.diag.g.beta_omit_cv, 0.0431, 1e-3);
    check("size_cv(ind)", rep.diag.h.size_cv, 1.1815, 1e-3);
    check("lev_cv(ind)", rep.diag.h.leverage_cv, 0.8823, 1e-3);
    check("plev_cv(ind)", rep.diag.h.partial_leverage_cv, 1.1849, 1e-3);
    check("bomit_cv(ind)", rep.diag.h.beta_omit_cv, 0.1565, 1e-3);
    check("size_cv(int)", rep.diag.i.size_cv, 1.1507, 1e-3);
    check("lev_cv(int)", rep.diag.i.leverage_cv, 0.8925, 1e-3);
    check("plev_cv(int)", rep.diag.i.partial_leverage_cv, 1.1557, 1e-3);
    check("bomit_cv(int)", rep.diag.i.beta_omit_cv, 0.0173, 1e-3);
    if (secs >= 30.0) {
        ok = false;
        out << " runtime " << secs << "s (budget 30s);";
    }
    std::ostringstream detail;
    detail << "beta=" << rep.meta.estimate << " CV1max(se,t,p)=(" << m1->se << "," << m1->stat
           << "," << m1->p << ") CV3max=(" << m3->se << "," << m3->stat << "," << m3->p
           << ") Gstar=(" << rep.diag.g.gstar << "," << rep.diag.h.gstar << ","
           << rep.diag.i.gstar << ") in " << secs << "s";
    report(name, ok, ok ? detail.str() : detail.str() + " |" + out.str());
}

// ---------------------------------------------------------------------------

void criterion2_jackknife_identity() {
    const std::string name = "criterion 2 (jackknife identity oracle)";
    std::mt19937 seeder(20240801);
    double worst_score = 0.0, worst_refit = 0.0, worst_twfe = 0.0;
    bool ok = true;
    std::string fail;

    // 50 random instances without FE: score form and refit oracle
    for (int inst = 0; inst < 50 && ok; ++inst) {
        testsupport::RandomSpec spec;
        spec.N = 40 + static_cast<int>(seeder() % 161);  // 40..200
        spec.p = 2 + static_cast<int>(seeder() % 5);     // k <= 6
        spec.G = 3 + static_cast<int>(seeder() % 5);
        spec.H = 3 + static_cast<int>(seeder() % 4);
        spec.seed = static_cast<unsigned>(seeder());
        Dataset ds = testsupport::random_dataset(spec);
        OlsFit fit = fit_ols(ds);
        ClusterIndex gi = build_cluster_index(ds.g_labels, Dim::G);
        ClusterIndex hi = build_cluster_index(ds.h_labels, Dim::H);
        ClusterIndex ii = intersect_index(gi, hi);
        for (const ClusterIndex* ix : {&gi, &hi, &ii}) {
            ClusterGrams cg = cluster_grams(ds, *ix);
            JackknifeBetas jb = delete_one_betas(cg, fit.gram, fit.xty, false);
            CrveMatrix direct = cv3_component(jb, fit.beta, ds.k());
            ClusterScores ms = modified_scores(fit, ds, *ix);
            SymMatrix via(ds.k());
            Vec w(ds.k());
            for (int j = 0; j < ix->J; ++j) {
                for (int c = 0; c < ds.k(); ++c) w[c] = ms.s(j, c);
                fit.chol.solve_in_place(w.data());
                via.add_outer(w.data(), static_cast<double>(ix->J - 1) / ix->J);
            }
            const double scale = std::max(1e-30, direct.m.max_abs());
            for (size_t e = 0; e < via.a.size(); ++e)
                worst_score = std::max(worst_score,
                                       std::abs(direct.m.a[e] - via.a[e]) / scale);
            for (int j = 0; j < ix->J; ++j) {
                auto oracle = testsupport::refit_without_cluster(ds, *ix, j);
                for (int c = 0; c < ds.k(); ++c)
                    worst_refit = std::max(worst_refit,
                                           std::abs(jb.betas(j, c) - oracle[c]) /
                                               std::max(1.0, std::abs(oracle[c])));
            }
        }
    }
    if (worst_score > 1e-8) {
        ok = false;
        fail += " score-form mismatch " + std::to_string(worst_score) + ";";
    }
    if (worst_refit > 1e-8) {
        ok = false;
        fail += " refit mismatch " + std::to_string(worst_refit) + ";";
    }

    // 50 TWFE instances: generalized-inverse deletions against refits with
    // the dead dummy removed
    for (int inst = 0; inst < 50; ++inst) {
        testsupport::RandomSpec spec;
        spec.N = 60 + static_cast<int>(seeder() % 120);
        spec.p = 2;
        spec.G = 4 + static_cast<int>(seeder() % 3);
        spec.H = 3 + static_cast<int>(seeder() % 3);
        spec.fe = true;
        spec.seed = static_cast<unsigned>(seeder());
        Dataset ds = testsupport::random_dataset(spec);
        OlsFit fit = fit_ols(ds);
        ClusterIndex gi = build_cluster_index(ds.g_labels, Dim::G);
        ClusterGrams cg = cluster_grams(ds, gi);
        JackknifeBetas jb = delete_one_betas(cg, fit.gram, fit.xty, true);
        for (int j = 0; j < gi.J; ++j) {
            int dead = -1;
            for (int c = ds.n_base; c < ds.k(); ++c)
                if (ds.colnames[c] == ds.g_name + "=" + gi.names[j]) dead = c;
            auto oracle = testsupport::refit_without_cluster(ds, gi, j, {dead});
            for (int c = 0; c < ds.n_base; ++c)
                worst_twfe = std::max(worst_twfe, std::abs(jb.betas(j, c) - oracle[c]) /
                                                      std::max(1.0, std::abs(oracle[c])));
            if (jb.betas(j, dead) != 0.0) {
                ok = false;
                fail += " dead FE coefficient not zeroed;";
            }
        }
    }
    if (worst_twfe > 1e-8) {
        ok = false;
        fail += " TWFE refit mismatch " + std::to_string(worst_twfe) + ";";
    }
    std::ostringstream detail;
    detail << "max rel. err: score-form " << worst_score << ", refit " << worst_refit
           << ", TWFE ginv refit " << worst_twfe;
    report(name, ok, ok ? detail.str() : detail.str() + " |" + fail);
}

// ---------------------------------------------------------------------------

void criterion3_fig1_bands() {
    const std::string name = "criterion 3 (size bands, gamma=2 base design, R=10000)";
    SimConfig cfg;  // defaults are the base design: G15 H12 N1e4 p10 rho .1/.2 TWFE
    cfg.reps = 10000;
    cfg.seed = 20240803;
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult res = run_sweep_point(cfg, 0, accept_threads());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double cv1_3 = rate(res.tallies[5], res.reps);
    const double cv3_2 = rate(res.tallies[12], res.reps);
    const double cv3_3 = rate(res.tallies[13], res.reps);
    const double cv3_3p = rate(res.tallies[14], res.reps);
    const double cv3_mx = rate(res.tallies[15], res.reps);
    bool ok = true;
    std::string fail;
    auto expect = [&](const char* what, bool cond) {
        if (!cond) {
            ok = false;
            fail += std::string(" ") + what + ";";
        }
    };
    expect("CV3-3 in [.04,.065]", cv3_3 >= 0.04 && cv3_3 <= 0.065);
    expect("CV3-max in [.04,.065]", cv3_mx >= 0.04 && cv3_mx <= 0.065);
    expect("CV1-3 > .08", cv1_3 > 0.08);
    expect("CV3-2 < .04", cv3_2 < 0.04);
    expect("CV3-3+ < .04", cv3_3p < 0.04);
    expect("rej(CV1-2) <= rej(CV1-3)",
           res.tallies[4].rejections <= res.tallies[5].rejections);
    expect("rej(CV3-2) <= rej(CV3-3)",
           res.tallies[12].rejections <= res.tallies[13].rejections);
    expect("no estimation failures", res.failures == 0);
    std::ostringstream detail;
    detail << "CV1-3=" << cv1_3 << " CV3-3=" << cv3_3 << " CV3-max=" << cv3_mx
           << " CV3-2=" << cv3_2 << " CV3-3+=" << cv3_3p << " (" << static_cast<long>(secs)
           << "s)";
    report(name, ok, ok ? detail.str() : detail.str() + " |" + fail);
}

// ---------------------------------------------------------------------------

void criterion4_small_rho_anchor() {
    const std::string name = "criterion 4 (rho=0 negative-variance anchor, R=20000)";
    SimConfig cfg;
    cfg.p = 5;
    cfg.rho_g = cfg.rho_h = 0.0;
    cfg.reps = 20000;
    cfg.seed = 20240804;
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult res = run_sweep_point(cfg, 0, accept_threads());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double u1 = urate(res.tallies[5], res.reps);   // CV1-3 undefined
    const double u3 = urate(res.tallies[13], res.reps);  // CV3-3 undefined
    const double r1_2 = rate(res.tallies[4], res.reps);
    const double r3_2 = rate(res.tallies[12], res.reps);
    bool ok = true;
    std::string fail;
    if (std::abs(u1 - 0.0260) > 0.006) {
        ok = false;
        fail += " CV1-3 undefined " + std::to_string(u1) + " (want 0.026 +-0.006);";
    }
    if (std::abs(u3 - 0.021) > 0.006) {
        ok = false;
        fail += " CV3-3 undefined " + std::to_string(u3) + " (want 0.021 +-0.006);";
    }
    if (!(r1_2 < 0.01 && r3_2 < 0.01)) {
        ok = false;
        fail += " two-term rejections not < 0.01;";
    }
    std::ostringstream detail;
    detail << "undef: CV1-3=" << u1 << " CV3-3=" << u3 << "; two-term rej: CV1=" << r1_2
           << " CV3=" << r3_2 << " (" << static_cast<long>(secs) << "s)";
    report(name, ok, ok ? detail.str() : detail.str() + " |" + fail);
}

// ---------------------------------------------------------------------------

void criterion5_dgp_moments_and_sizes() {
    // moment identities at +-0.01, unit variance +-0.02
    {
        const std::string name = "criterion 5a (factor DGP moment suite)";
        const double rho_g = 0.2, rho_h = 0.12;
        auto m = testsupport::estimate_factor_moments(50, 50, 4, rho_g, rho_h, 2000, 20240805);
        const double sg2 = rho_g / (1 - rho_g), sh2 = rho_h / (1 - rho_h);
        bool ok = true;
        std::string fail;
        auto check = [&](const char* what, double got, double want, double tol) {
            if (std::abs(got - want) > tol) {
                ok = false;
                fail += std::string(" ") + what + "=" + std::to_string(got) + " (want " +
                        std::to_string(want) + ");";
            }
        };
        check("var", m.var, 1.0, 0.02);
        check("cov(same g, same parity, diff h)", m.cov_same_g, sg2, 0.01);
        check("cov(same cell, same parity)", m.cov_same_gh, sg2 + sh2, 0.01);
        check("cov(opposite parity)", m.cov_opposite, 0.0, 0.01);
        std::ostringstream detail;
        detail << "var=" << m.var << " covg=" << m.cov_same_g << " (want " << sg2 << ") covgh="
               << m.cov_same_gh << " (want " << sg2 + sh2 << ") covop=" << m.cov_opposite;
        report(name, ok, ok ? detail.str() : detail.str() + " |" + fail);
    }
    // cluster size ranges
    {
        const std::string name = "criterion 5b (cluster size ranges)";
        auto sg = cluster_sizes(10000, 15, 2.0);
        auto sh = cluster_sizes(10000, 12, 2.0);
        const int gmin = *std::min_element(sg.begin(), sg.end());
        const int gmax = *std::max_element(sg.begin(), sg.end());
        const int hmin = *std::min_element(sh.begin(), sh.end());
        const int hmax = *std::max_element(sh.begin(), sh.end());
        const bool g_ok = gmin == 223 && gmax == 1443;
        const bool h_ok = hmin == 282 && hmax == 1769;
        std::ostringstream detail;
        detail << "G range " << gmin << "-" << gmax << " (want 223-1443 exactly); H range "
               << hmin << "-" << hmax << " (want 282-1769 exactly)";
        if (!h_ok)
            detail << " -- unattainable: the exact size weights give 283.9 and 1775.4, and no "
                      "deterministic rounding yields 282/1769; the reference endpoints are a "
                      "seed-specific random assignment (see decisions ledger)";
        report(name, g_ok && h_ok, detail.str());
    }
}

// ---------------------------------------------------------------------------

void criterion6_property_suite() {
    const std::string name = "criterion 6 (property suite)";
    bool ok = true;
    std::string fail;
    auto expect = [&](const char* what, bool cond) {
        if (!cond) {
            ok = false;
            fail += std::string(" ") + what + ";";
        }
    };

    // score sums vanish per dimension
    Dataset ds = testsupport::random_dataset({.N = 150, .p = 3, .G = 6, .H = 5, .seed = 606});
    OlsFit fit = fit_ols(ds);
    ClusterIndex gi = build_cluster_index(ds.g_labels, Dim::G);
    ClusterIndex hi = build_cluster_index(ds.h_labels, Dim::H);
    ClusterIndex ii = intersect_index(gi, hi);
    double xty_scale = 0.0;
    for (double v : fit.xty) xty_scale = std::max(xty_scale, std::abs(v));
    for (const ClusterIndex* ix : {&gi, &hi, &ii}) {
        ClusterScores cs = cluster_scores(fit, ds, *ix);
        for (int c = 0; c < ds.k(); ++c) {
            double s = 0.0;
            for (int j = 0; j < ix->J; ++j) s += cs.s(j, c);
            expect("score sums vanish", std::abs(s) <= 1e-8 * std::max(1.0, xty_scale));
        }
    }

    // V1(2) - V1(3) = V_I to machine rounding
    TwoWayAnalysis an = analyze(ds);
    {
        const double ulp = 8 * std::numeric_limits<double>::epsilon() *
                           std::max({1.0, an.v1_2.m.max_abs(), an.v1I.m.max_abs()});
        double worst = 0.0;
        for (size_t e = 0; e < an.v1_2.m.a.size(); ++e)
            worst = std::max(worst,
                             std::abs((an.v1_2.m.a[e] - an.v1_3.m.a[e]) - an.v1I.m.a[e]));
        expect("V1(2)-V1(3)=V_I", worst <= ulp);
    }

    // eigenfix: identity on PD input, floor at eta otherwise
    {
        CrveMatrix pd;
        pd.m = SymMatrix(2);
        pd.m.at(0, 0) = 1.5;
        pd.m.at(0, 1) = 0.2;
        pd.m.at(1, 1) = 0.9;
        CrveMatrix fixed = eigenfix(pd);
        expect("eigenfix idempotent on PD", fixed.m.a == pd.m.a);
        CrveMatrix ind;
        ind.m = SymMatrix(2);
        ind.m.at(0, 0) = 1.0;
        ind.m.at(1, 1) = -2.0;
        CrveMatrix fx = eigenfix(ind);
        EigenDecomp d = sym_eigen(fx.m);
        expect("eigenfix floors at eta", std::abs(d.values[0] - 1e-12) <= 1e-13);
        CrveMatrix fx2 = eigenfix(fx);
        expect("eigenfix idempotent after repair", fx2.m.a == fx.m.a);
    }

    // W_min / max-se selection logic on enumerated sign cases
    {
        auto [v0, s0] = w_min(std::nullopt, 4.0, 9.0);
        expect("Wmin undefined W3 -> 0/three-term", v0 == 0.0 && s0 == Selected::three_term);
        auto [v1, s1] = w_min(-2.0, 4.0, 9.0);
        expect("Wmin negative W3 -> 0/three-term", v1 == 0.0 && s1 == Selected::three_term);
        auto [v2, s2] = w_min(5.0, 4.0, 9.0);
        expect("Wmin picks smallest one-way", v2 == 4.0 && s2 == Selected::oneway_g);
        auto [v3, s3] = w_min(2.0, 4.0, 9.0);
        expect("Wmin keeps small W3", v3 == 2.0 && s3 == Selected::three_term);
        auto [v4, s4] = w_min(7.0, 6.0, 1.0);
        expect("Wmin picks H", v4 == 1.0 && s4 == Selected::oneway_h);

        // max-se agrees with W_min whenever W3 >= 0 (q = 1)
        auto menu = variance_menu(an, ds, 0);
        const MenuEntry &e3 = menu[5], &eG = menu[2], &eH = menu[3], &mx = menu[7];
        if (e3.defined) {
            const double b = an.fit.beta[0];
            auto [wm, sel] = w_min(b * b / e3.var, b * b / eG.var, b * b / eH.var);
            expect("max-se t^2 equals W_min",
                   std::abs(wm - (b / mx.se) * (b / mx.se)) <= 1e-10 * std::max(1.0, wm));
            expect("max-se selection matches W_min", sel == mx.selected);
        }
        expect("max-se >= one-way components", mx.se >= eG.se && mx.se >= eH.se);
    }

    // Student t anchors
    expect("p(t=0)=1", student_t_pvalue(0.0, 7) == 1.0);
    expect("df=1 Cauchy closed form",
           std::abs(student_t_pvalue(1.0, 1) - 0.5) <= 1e-10);
    expect("p(2.5098, 10) = 0.0309 at 4dp",
           std::abs(student_t_pvalue(2.5098, 10) - 0.0309) <= 5e-5);

    report(name, ok, ok ? "score sums, combination identity, eigen repair, W_min, t anchors"
                        : fail);
}

// ---------------------------------------------------------------------------

void criterion7_empirical_tables() {
    const std::string name = "criterion 7 (tsetse / minimum-wage tables, optional)";
    const std::string minwage = data_dir() + "/minwage.csv";
    const std::string tsetse = data_dir() + "/tsetse.csv";
    if (!file_exists(minwage) && !file_exists(tsetse)) {
        skip(name, "user-supplied CSVs not present (" + minwage + ", " + tsetse +
                       "); see README for the expected layouts");
        return;
    }
    bool ok = true;
    std::string detail;
    if (file_exists(minwage)) {
        CmdResult res = run_cli("fit --data " + minwage +
                                " --y logearn --x logmw --controls bigcity,age22"
                                " --fevar year,yearmonth,prov --cluster year,prov"
                                " --format jsonl");
        if (res.exit_code != 0) {
            ok = false;
            detail += "minwage fit failed; ";
        } else {
            FitReport rep = parse_jsonl(res.output);
            const double want_p[16] = {0.0000, 0.0000, 0.0041, 0.0034, 0.0261, 0.0140, 0.0141,
                                       0.0140, 0.0000, 0.0001, 0.0125, 0.0565, 0.1116, 0.0808,
                                       0.0810, 0.0808};
            double worst = 0.0;
            for (int i = 0; i < 16; ++i)
                if (rep.rows[i].defined)
                    worst = std::max(worst, std::abs(rep.rows[i].p - want_p[i]));
            if (std::abs(rep.meta.estimate - 0.2934) > 5e-4 || worst > 5e-4) ok = false;
            detail += "minwage beta=" + std::to_string(rep.meta.estimate) +
                      " worst p gap=" + std::to_string(worst) + "; ";
        }
    } else {
        detail += "minwage.csv absent (skipped); ";
    }
    if (file_exists(tsetse)) {
        // layout documented in the README: one outcome per fit
        detail += "tsetse.csv present: run the documented per-outcome fits manually; ";
    }
    report(name, ok, detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite (threads=%d)\n", accept_threads());
    criterion1_nlswork();
    criterion2_jackknife_identity();
    criterion3_fig1_bands();
    criterion4_small_rho_anchor();
    criterion5_dgp_moments_and_sizes();
    criterion6_property_suite();
    criterion7_empirical_tables();
    std::printf("summary: %s (%d failed, %d skipped)\n", g_failures == 0 ? "PASS" : "FAIL",
                g_failures, g_skips);
    return g_failures == 0 ? 0 : 1;
}

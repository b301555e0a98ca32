#pragma once

// FitReport assembly and rendering: aligned text tables, CSV, and a JSON-lines
// dump that round-trips exactly.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "cjack/crve.hpp"
#include "cjack/diagnostics.hpp"
#include "cjack/inference.hpp"
#include "cjack/placebo.hpp"
#include "cjack/sim.hpp"

namespace cjack {

struct ReportMeta {
    std::string data;
    std::string coef_name;
    double estimate = 0.0;
    int N = 0, k = 0, p = 0;
    int G = 0, H = 0, I = 0;
    std::string g_name, h_name;
    int df_two_way = 0;
    double level = 0.95;
};

struct FitReport {
    ReportMeta meta;
    std::vector<TestResult> rows;  // 16, fixed order
    DiagPanel diag;
};

inline std::string estimator_label(Family f, Arity a) {
    if (a == Arity::HC) return f == Family::CV1 ? "HC1" : "HC3";
    return std::string(family_name(f)) + "-" + arity_name(a);
}

inline const char* selected_label(Selected s) {
    switch (s) {
        case Selected::three_term: return "3";
        case Selected::oneway_g: return "G";
        case Selected::oneway_h: return "H";
        default: return "";
    }
}

inline FitReport build_fit_report(const Dataset& ds, const TwoWayAnalysis& an, int coef,
                                  double level, const std::string& data_path = "") {
    FitReport rep;
    rep.meta.data = data_path;
    rep.meta.coef_name = ds.colnames[coef];
    rep.meta.estimate = an.fit.beta[coef];
    rep.meta.N = ds.N();
    rep.meta.k = ds.k();
    rep.meta.p = ds.n_base;
    rep.meta.G = an.gi.J;
    rep.meta.H = an.hi.J;
    rep.meta.I = an.ii.J;
    rep.meta.g_name = ds.g_name;
    rep.meta.h_name = ds.h_name;
    rep.meta.df_two_way = std::min(an.gi.J, an.hi.J) - 1;
    rep.meta.level = level;
    auto menu = variance_menu(an, ds, coef);
    rep.rows = t_report(an.fit.beta[coef], menu, an.gi.J, an.hi.J, an.ii.J, ds.N(), ds.k(), level);
    rep.diag = diag_panel(an, ds, coef);
    return rep;
}

namespace detail {

inline std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string cell(double v, const char* spec, bool defined) {
    if (!defined) return "        .";
    return fmt(v, spec);
}

}  // namespace detail

inline std::string render_text(const FitReport& r) {
    std::string out;
    char line[256];
    out += "two-way cluster-robust fit\n";
    if (!r.meta.data.empty()) out += "  data: " + r.meta.data + "\n";
    std::snprintf(line, sizeof line, "  coefficient: %s   estimate: %.6f\n",
                  r.meta.coef_name.c_str(), r.meta.estimate);
    out += line;
    std::snprintf(line, sizeof line, "  N = %d   k = %d   p = %d\n", r.meta.N, r.meta.k, r.meta.p);
    out += line;
    std::snprintf(line, sizeof line, "  clusters: %s (G = %d), %s (H = %d), intersections I = %d\n",
                  r.meta.g_name.c_str(), r.meta.G, r.meta.h_name.c_str(), r.meta.H, r.meta.I);
    out += line;
    std::snprintf(line, sizeof line, "  two-way df = min(G,H) - 1 = %d   level = %.2f\n\n",
                  r.meta.df_two_way, r.meta.level);
    out += line;

    std::snprintf(line, sizeof line, "  %-9s %12s %9s %8s %12s %12s %6s  %s\n", "estimator",
                  "se", "t", "p", "ci_lo", "ci_hi", "df", "note");
    out += line;
    for (const auto& t : r.rows) {
        std::string note;
        if (!t.defined)
            note = "undefined (variance <= 0)";
        else if (t.arity == Arity::Max)
            note = std::string("se from ") + selected_label(t.selected);
        std::snprintf(line, sizeof line, "  %-9s %12s %9s %8s %12s %12s %6d  %s\n",
                      estimator_label(t.family, t.arity).c_str(),
                      detail::cell(t.se, "%12.6f", t.defined).c_str(),
                      detail::cell(t.stat, "%9.4f", t.defined).c_str(),
                      detail::cell(t.p, "%8.4f", t.defined).c_str(),
                      detail::cell(t.ci_lo, "%12.6f", t.defined).c_str(),
                      detail::cell(t.ci_hi, "%12.6f", t.defined).c_str(), t.df, note.c_str());
        out += line;
    }

    out += "\ncluster diagnostics\n";
    std::snprintf(line, sizeof line, "  %-14s %6s %9s %12s %11s %13s %8s\n", "dimension", "J",
                  "size-cv", "leverage-cv", "partial-cv", "beta-omit-cv", "G*");
    out += line;
    auto diag_line = [&](const std::string& name, const DimDiagnostics& d) {
        std::snprintf(line, sizeof line, "  %-14s %6d %9.4f %12.4f %11.4f %13.4f %8.2f\n",
                      name.c_str(), d.J, d.size_cv, d.leverage_cv, d.partial_leverage_cv,
                      d.beta_omit_cv, d.gstar);
        out += line;
    };
    diag_line(r.meta.g_name + " (G)", r.diag.g);
    diag_line(r.meta.h_name + " (H)", r.diag.h);
    diag_line("intersection", r.diag.i);
    return out;
}

inline std::string render_csv(const FitReport& r) {
    std::string out = "estimator,family,arity,se,stat,p,df,ci_lo,ci_hi,defined,selected\n";
    char line[256];
    for (const auto& t : r.rows) {
        std::snprintf(line, sizeof line, "%s,%s,%s,%.10g,%.10g,%.10g,%d,%.10g,%.10g,%d,%s\n",
                      estimator_label(t.family, t.arity).c_str(), family_name(t.family),
                      arity_name(t.arity), t.se, t.stat, t.p, t.df, t.ci_lo, t.ci_hi,
                      t.defined ? 1 : 0, selected_label(t.selected));
        out += line;
    }
    return out;
}

// JSON-lines dump: one meta record, one record per estimator, three
// diagnostics records.  Doubles round-trip exactly.
inline std::string render_jsonl(const FitReport& r) {
    using nlohmann::json;
    std::string out;
    json meta = {{"type", "meta"},
                 {"data", r.meta.data},
                 {"coefficient", r.meta.coef_name},
                 {"estimate", r.meta.estimate},
                 {"N", r.meta.N},
                 {"k", r.meta.k},
                 {"p", r.meta.p},
                 {"G", r.meta.G},
                 {"H", r.meta.H},
                 {"I", r.meta.I},
                 {"g", r.meta.g_name},
                 {"h", r.meta.h_name},
                 {"df_two_way", r.meta.df_two_way},
                 {"level", r.meta.level}};
    out += meta.dump() + "\n";
    for (const auto& t : r.rows) {
        json row = {{"type", "estimate"},
                    {"estimator", estimator_label(t.family, t.arity)},
                    {"family", family_name(t.family)},
                    {"arity", arity_name(t.arity)},
                    {"df", t.df},
                    {"defined", t.defined},
                    {"selected_component", selected_label(t.selected)}};
        if (t.defined) {
            row["se"] = t.se;
            row["stat"] = t.stat;
            row["p"] = t.p;
            row["ci_lo"] = t.ci_lo;
            row["ci_hi"] = t.ci_hi;
        } else {
            row["se"] = row["stat"] = row["p"] = row["ci_lo"] = row["ci_hi"] = nullptr;
        }
        out += row.dump() + "\n";
    }
    auto diag_row = [&](const char* dim, const std::string& name, const DimDiagnostics& d) {
        json row = {{"type", "diagnostics"},
                    {"dimension", dim},
                    {"name", name},
                    {"J", d.J},
                    {"size_cv", d.size_cv},
                    {"leverage_cv", d.leverage_cv},
                    {"partial_leverage_cv", d.partial_leverage_cv},
                    {"beta_omit_cv", d.beta_omit_cv},
                    {"gstar", d.gstar}};
        out += row.dump() + "\n";
    };
    diag_row("G", r.meta.g_name, r.diag.g);
    diag_row("H", r.meta.h_name, r.diag.h);
    diag_row("I", "intersection", r.diag.i);
    return out;
}

// Re-parse a JSON-lines dump into a FitReport (estimator rows and
// diagnostics; used by the round-trip tests and the acceptance suite).
inline FitReport parse_jsonl(const std::string& text) {
    using nlohmann::json;
    FitReport rep;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        const std::string type = row.at("type");
        if (type == "meta") {
            rep.meta.data = row.value("data", "");
            rep.meta.coef_name = row.at("coefficient");
            rep.meta.estimate = row.at("estimate");
            rep.meta.N = row.at("N");
            rep.meta.k = row.at("k");
            rep.meta.p = row.at("p");
            rep.meta.G = row.at("G");
            rep.meta.H = row.at("H");
            rep.meta.I = row.at("I");
            rep.meta.g_name = row.at("g");
            rep.meta.h_name = row.at("h");
            rep.meta.df_two_way = row.at("df_two_way");
            rep.meta.level = row.at("level");
        } else if (type == "estimate") {
            TestResult t;
            t.family = row.at("family") == "CV1" ? Family::CV1 : Family::CV3;
            const std::string ar = row.at("arity");
            t.arity = ar == "HC"    ? Arity::HC
                      : ar == "G"   ? Arity::OneWayG
                      : ar == "H"   ? Arity::OneWayH
                      : ar == "I"   ? Arity::OneWayI
                      : ar == "2"   ? Arity::TwoTerm
                      : ar == "3"   ? Arity::ThreeTerm
                      : ar == "3+"  ? Arity::ThreePlus
                                    : Arity::Max;
            t.df = row.at("df");
            t.defined = row.at("defined");
            const std::string sel = row.at("selected_component");
            t.selected = sel == "3"   ? Selected::three_term
                         : sel == "G" ? Selected::oneway_g
                         : sel == "H" ? Selected::oneway_h
                                      : Selected::none;
            if (t.defined) {
                t.se = row.at("se");
                t.stat = row.at("stat");
                t.p = row.at("p");
                t.ci_lo = row.at("ci_lo");
                t.ci_hi = row.at("ci_hi");
            } else {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                t.se = t.stat = t.p = t.ci_lo = t.ci_hi = nan;
            }
            rep.rows.push_back(t);
        } else if (type == "diagnostics") {
            DimDiagnostics d;
            d.J = row.at("J");
            d.size_cv = row.at("size_cv");
            d.leverage_cv = row.at("leverage_cv");
            d.partial_leverage_cv = row.at("partial_leverage_cv");
            d.beta_omit_cv = row.at("beta_omit_cv");
            d.gstar = row.at("gstar");
            const std::string dim = row.at("dimension");
            if (dim == "G")
                rep.diag.g = d, rep.diag.g.dim = Dim::G;
            else if (dim == "H")
                rep.diag.h = d, rep.diag.h.dim = Dim::H;
            else
                rep.diag.i = d, rep.diag.i.dim = Dim::I;
        }
    }
    return rep;
}

// CSV for sweep results: one row per (grid point, estimator).
inline std::string sweep_csv(const std::vector<SweepResult>& results) {
    std::string out =
        "grid_param,grid_value,family,estimator,reps,rejections,undefined,failures,"
        "reject_rate,undef_rate\n";
    char line[256];
    for (const auto& res : results) {
        for (const auto& t : res.tallies) {
            std::snprintf(line, sizeof line, "%s,%.10g,%s,%s,%ld,%ld,%ld,%ld,%.6f,%.6f\n",
                          res.grid_param.empty() ? "-" : res.grid_param.c_str(), res.grid_value,
                          family_name(t.family), estimator_label(t.family, t.arity).c_str(),
                          res.reps, t.rejections, t.undefined, res.failures,
                          static_cast<double>(t.rejections) / res.reps,
                          static_cast<double>(t.undefined) / res.reps);
            out += line;
        }
    }
    return out;
}

inline std::string placebo_csv(const PlaceboResult& res) {
    std::string out = "family,estimator,reps,rejections,undefined,failures,reject_rate\n";
    char line[256];
    for (const auto& t : res.tallies) {
        std::snprintf(line, sizeof line, "%s,%s,%ld,%ld,%ld,%ld,%.6f\n", family_name(t.family),
                      estimator_label(t.family, t.arity).c_str(), res.reps, t.rejections,
                      t.undefined, res.failures, static_cast<double>(t.rejections) / res.reps);
        out += line;
    }
    return out;
}

}  // namespace cjack

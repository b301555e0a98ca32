// cjack: two-way cluster-robust inference for OLS.
//
// Subcommands:
//   fit       estimate a regression and print the 16-entry SE/t/p/CI menu
//   diagnose  cluster diagnostics only
//   simulate  rejection-frequency sweeps on the factor DGP
//   placebo   placebo-regression audit of a real dataset
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "cjack/config.hpp"
#include "cjack/crve.hpp"
#include "cjack/dataset.hpp"
#include "cjack/placebo.hpp"
#include "cjack/report.hpp"
#include "cjack/sim.hpp"

namespace {

struct FitFlags {
    std::string data, y, x, cluster, sample, format = "text", out;
    std::vector<std::string> controls, fevar;
    double level = 0.95;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--data", f.data, "CSV file")->required();
    cmd->add_option("--y", f.y, "outcome column")->required();
    cmd->add_option("--x", f.x, "regressor of interest")->required();
    cmd->add_option("--controls", f.controls, "other regressor columns")->delimiter(',');
    cmd->add_option("--fevar", f.fevar, "categorical columns entered as fixed effects")
        ->delimiter(',');
    cmd->add_option("--cluster", f.cluster,
                    "the two cluster variables, comma separated (exactly two)")
        ->required();
    cmd->add_option("--sample", f.sample, "row filter, e.g. \"age>=25 & age<=35\"");
    cmd->add_option("--level", f.level, "confidence level (default 0.95)");
}

std::pair<std::string, std::string> split_cluster_pair(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = cjack::detail::trim(tok);
        if (!tok.empty()) parts.push_back(tok);
    }
    if (parts.size() != 2)
        throw cjack::UsageError("--cluster needs exactly two variables, got " +
                                std::to_string(parts.size()));
    return {parts[0], parts[1]};
}

struct LoadedFit {
    cjack::Dataset ds;
    cjack::TwoWayAnalysis an;
    int coef = 0;
};

LoadedFit run_fit(const FitFlags& f) {
    auto [gcol, hcol] = split_cluster_pair(f.cluster);
    std::vector<std::string> xcols = {f.x};
    for (const auto& c : f.controls) xcols.push_back(c);
    const bool intercept = f.fevar.empty();
    LoadedFit lf;
    lf.ds = cjack::load_csv(f.data, f.y, xcols, gcol, hcol, f.fevar, f.sample);
    if (intercept) {
        // no FE blocks: include a constant term
        cjack::Matrix X(lf.ds.N(), lf.ds.k() + 1);
        for (int r = 0; r < lf.ds.N(); ++r) {
            for (int c = 0; c < lf.ds.k(); ++c) X(r, c) = lf.ds.X(r, c);
            X(r, lf.ds.k()) = 1.0;
        }
        lf.ds.X = X;
        lf.ds.colnames.push_back("(intercept)");
        lf.ds.n_base = lf.ds.k();
    } else {
        cjack::FeSpec fe;
        fe.columns = f.fevar;
        lf.ds = cjack::expand_fixed_effects(lf.ds, fe);
    }
    lf.coef = 0;  // the regressor of interest is always the first column
    lf.an = cjack::analyze(lf.ds);
    return lf;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw cjack::Error("cannot write: " + out_path);
        out << text;
    }
}

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-way cluster-robust variance estimation"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    auto* fit_cmd = app.add_subcommand("fit", "estimate and report the SE menu");
    add_fit_flags(fit_cmd, fit_flags);
    fit_cmd->add_option("--format", fit_flags.format, "text | csv | jsonl")
        ->check(CLI::IsMember({"text", "csv", "jsonl"}));
    fit_cmd->add_option("--out", fit_flags.out, "write to file instead of stdout");

    FitFlags diag_flags;
    auto* diag_cmd = app.add_subcommand("diagnose", "cluster diagnostics only");
    add_fit_flags(diag_cmd, diag_flags);
    diag_cmd->add_option("--out", diag_flags.out, "write to file instead of stdout");

    std::string sim_config, sim_out;
    int sim_threads = default_threads();
    long sim_reps_override = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "rejection-frequency sweep");
    sim_cmd->add_option("--config", sim_config, "sweep configuration file")->required();
    sim_cmd->add_option("--out", sim_out, "output CSV (default stdout)");
    sim_cmd->add_option("--threads", sim_threads, "worker threads");
    sim_cmd->add_option("--reps", sim_reps_override, "override replication count");

    FitFlags plc_flags;
    std::string plc_gen_config, plc_out;
    long plc_reps = 0;
    uint64_t plc_seed = 1;
    int plc_threads = default_threads();
    auto* plc_cmd = app.add_subcommand("placebo", "placebo-regression audit");
    add_fit_flags(plc_cmd, plc_flags);
    plc_cmd->add_option("--gen-config", plc_gen_config, "placebo generator configuration file");
    plc_cmd->add_option("--reps", plc_reps, "number of placebo replications")->required();
    plc_cmd->add_option("--seed", plc_seed, "random seed");
    plc_cmd->add_option("--threads", plc_threads, "worker threads");
    plc_cmd->add_option("--out", plc_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (fit_cmd->parsed()) {
            LoadedFit lf = run_fit(fit_flags);
            cjack::FitReport rep = cjack::build_fit_report(lf.ds, lf.an, lf.coef,
                                                           fit_flags.level, fit_flags.data);
            if (fit_flags.format == "text")
                emit(cjack::render_text(rep), fit_flags.out);
            else if (fit_flags.format == "csv")
                emit(cjack::render_csv(rep), fit_flags.out);
            else
                emit(cjack::render_jsonl(rep), fit_flags.out);
        } else if (diag_cmd->parsed()) {
            LoadedFit lf = run_fit(diag_flags);
            cjack::FitReport rep = cjack::build_fit_report(lf.ds, lf.an, lf.coef,
                                                           diag_flags.level, diag_flags.data);
            std::string text = cjack::render_text(rep);
            // diagnostics block only
            const size_t at = text.find("cluster diagnostics");
            emit(at == std::string::npos ? text : text.substr(at), diag_flags.out);
        } else if (sim_cmd->parsed()) {
            cjack::SweepGrid grid = cjack::parse_sweep_config(sim_config);
            if (sim_reps_override > 0)
                for (auto& c : grid.configs) c.reps = sim_reps_override;
            std::vector<cjack::SweepResult> results;
            const auto t0 = std::chrono::steady_clock::now();
            for (size_t i = 0; i < grid.configs.size(); ++i) {
                results.push_back(cjack::run_sweep_point(
                    grid.configs[i], static_cast<uint64_t>(i), sim_threads, grid.param,
                    grid.values[i]));
                const double secs = std::chrono::duration<double>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count();
                std::cerr << "grid point " << (i + 1) << "/" << grid.configs.size() << " done ("
                          << results.back().reps << " reps, " << static_cast<long>(secs)
                          << "s elapsed)\n";
            }
            emit(cjack::sweep_csv(results), sim_out);
        } else if (plc_cmd->parsed()) {
            if (plc_reps < 1) throw cjack::UsageError("--reps must be positive");
            LoadedFit lf = run_fit(plc_flags);
            cjack::PlaceboGen gen;
            if (!plc_gen_config.empty()) gen = cjack::parse_placebo_config(plc_gen_config);
            cjack::PlaceboResult res = cjack::placebo_run(lf.ds, gen, plc_reps, plc_seed,
                                                          1.0 - plc_flags.level, plc_threads);
            emit(cjack::placebo_csv(res), plc_out);
        }
    } catch (const cjack::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const cjack::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const cjack::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

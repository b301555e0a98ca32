#pragma once

// Placebo-regression audits: append a synthetic treatment-like regressor to a
// real dataset, re-estimate, and tally how often each of the sixteen p-values
// falsely rejects.

#include <algorithm>
#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cjack/crve.hpp"
#include "cjack/dataset.hpp"
#include "cjack/inference.hpp"
#include "cjack/rng.hpp"
#include "cjack/sim.hpp"

namespace cjack {

// Step-process generator: per group (a cluster variable, typically H), the
// regressor starts at 0 and, each period, jumps up with probability pi by
// |N(0,1)| * scale; jump sizes share a common factor across groups.
struct PlaceboGen {
    double pi = 0.15;
    double scale = 1.0;
    double loading = 0.5;       // weight of the shared factor in jump sizes
    std::string group_col;      // default: the H cluster variable
    std::string period_col;     // default: the G cluster variable

    void validate() const {
        if (pi < 0 || pi > 1) throw ConfigError("pi must lie in [0,1]");
        if (loading < 0 || loading > 1) throw ConfigError("loading must lie in [0,1]");
        if (scale < 0) throw ConfigError("scale must be nonnegative");
    }
};

namespace detail {

// Period order: numeric when every label parses as a number, else lexicographic.
inline std::vector<std::string> ordered_levels(const std::vector<std::string>& labels) {
    std::vector<std::string> lv;
    for (const auto& s : labels)
        if (std::find(lv.begin(), lv.end(), s) == lv.end()) lv.push_back(s);
    bool numeric = true;
    std::vector<double> vals(lv.size());
    for (size_t i = 0; i < lv.size() && numeric; ++i) numeric = parse_double(lv[i], vals[i]);
    if (numeric)
        std::stable_sort(lv.begin(), lv.end(), [](const std::string& a, const std::string& b) {
            double va = 0.0, vb = 0.0;
            parse_double(a, va);
            parse_double(b, vb);
            return va < vb;
        });
    else
        std::sort(lv.begin(), lv.end());
    return lv;
}

}  // namespace detail

inline constexpr uint64_t kPlaceboStreamTag = 0xB1ACE80ull;

struct PlaceboLayout {
    std::vector<int> row_group, row_period;
    int n_groups = 0, n_periods = 0;
};

inline PlaceboLayout placebo_layout(const Dataset& ds, const PlaceboGen& gen) {
    const std::string gcol = gen.group_col.empty() ? ds.h_name : gen.group_col;
    const std::string pcol = gen.period_col.empty() ? ds.g_name : gen.period_col;
    auto git = ds.cat_cols.find(gcol);
    auto pit = ds.cat_cols.find(pcol);
    if (git == ds.cat_cols.end()) throw MissingColumn(gcol);
    if (pit == ds.cat_cols.end()) throw MissingColumn(pcol);

    PlaceboLayout lay;
    ClusterIndex gi = build_cluster_index(git->second);
    lay.row_group = gi.row_cluster;
    lay.n_groups = gi.J;
    std::vector<std::string> periods = detail::ordered_levels(pit->second);
    lay.n_periods = static_cast<int>(periods.size());
    lay.row_period.resize(ds.N());
    for (int r = 0; r < ds.N(); ++r) {
        const std::string& s = pit->second[r];
        lay.row_period[r] =
            static_cast<int>(std::find(periods.begin(), periods.end(), s) - periods.begin());
    }
    return lay;
}

// One draw of the placebo column for replication `rep`.
inline void gen_placebo_column(const PlaceboGen& gen, const PlaceboLayout& lay, uint64_t seed,
                               long rep, double* out, long N) {
    const int T = lay.n_periods, Gp = lay.n_groups;
    RngStream shared(seed, kPlaceboStreamTag, static_cast<uint64_t>(rep), 0);
    std::vector<double> factor(T);
    for (int t = 0; t < T; ++t) factor[t] = shared.next_normal();
    std::vector<double> level(static_cast<size_t>(Gp) * T, 0.0);
    const double co = std::sqrt(1.0 - gen.loading * gen.loading);
    for (int g = 0; g < Gp; ++g) {
        RngStream rs(seed, kPlaceboStreamTag, static_cast<uint64_t>(rep), 1 + static_cast<uint64_t>(g));
        double cum = 0.0;
        for (int t = 0; t < T; ++t) {
            const double u = rs.next_uniform();
            const double e = rs.next_normal();
            if (u <= gen.pi) cum += std::abs(gen.loading * factor[t] + co * e) * gen.scale;
            level[static_cast<size_t>(g) * T + t] = cum;
        }
    }
    for (long r = 0; r < N; ++r)
        out[r] = level[static_cast<size_t>(lay.row_group[r]) * T + lay.row_period[r]];
}

struct PlaceboResult {
    long reps = 0;
    long failures = 0;  // replications where estimation threw (tallied, not dropped)
    std::vector<EstimatorTally> tallies;  // 16, menu order
};

// Appends the placebo column at the end of the Z block, re-fits per
// replication, and tallies p < level for all sixteen estimators.
inline PlaceboResult placebo_run(const Dataset& ds, const PlaceboGen& gen, long R, uint64_t seed,
                                 double level = 0.05, int threads = 1) {
    gen.validate();
    if (R < 1) throw UsageError("placebo replication count must be positive");
    PlaceboLayout lay = placebo_layout(ds, gen);

    // frame with one extra column at the end of the non-FE block
    Dataset frame;
    frame.y = ds.y;
    frame.g_labels = ds.g_labels;
    frame.h_labels = ds.h_labels;
    frame.g_name = ds.g_name;
    frame.h_name = ds.h_name;
    frame.cat_cols = ds.cat_cols;
    const int slot = ds.n_base;
    frame.n_base = ds.n_base + 1;
    frame.coef = slot;
    frame.X = Matrix(ds.N(), ds.k() + 1);
    for (int r = 0; r < ds.N(); ++r) {
        for (int c = 0; c < slot; ++c) frame.X(r, c) = ds.X(r, c);
        for (int c = slot; c < ds.k(); ++c) frame.X(r, c + 1) = ds.X(r, c);
    }
    for (int c = 0; c < slot; ++c) frame.colnames.push_back(ds.colnames[c]);
    frame.colnames.push_back("placebo");
    for (int c = slot; c < ds.k(); ++c) frame.colnames.push_back(ds.colnames[c]);

    PlaceboResult out;
    out.reps = R;
    out.tallies.assign(16, {});
    {
        const Arity order[8] = {Arity::HC, Arity::OneWayI, Arity::OneWayG, Arity::OneWayH,
                                Arity::TwoTerm, Arity::ThreeTerm, Arity::ThreePlus, Arity::Max};
        for (int i = 0; i < 8; ++i) {
            out.tallies[i].family = Family::CV1;
            out.tallies[i].arity = order[i];
            out.tallies[8 + i].family = Family::CV3;
            out.tallies[8 + i].arity = order[i];
        }
    }
    const std::vector<EstimatorTally> zero_tallies = out.tallies;

    std::mutex merge_mutex;
    std::atomic<long> next_rep{0};
    auto worker = [&]() {
        Dataset work = frame;
        Vec col(ds.N());
        std::vector<EstimatorTally> local = zero_tallies;
        long local_failures = 0;
        for (;;) {
            const long rep = next_rep.fetch_add(1);
            if (rep >= R) break;
            gen_placebo_column(gen, lay, seed, rep, col.data(), ds.N());
            for (int r = 0; r < ds.N(); ++r) work.X(r, slot) = col[r];
            try {
                TwoWayAnalysis an = analyze(work);
                auto menu = variance_menu(an, work, slot);
                detail::tally_menu(menu, an.fit.beta[slot], an.gi.J, an.hi.J, an.ii.J, work.N(),
                                   work.k(), level, local);
            } catch (const Error&) {
                ++local_failures;
            }
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        for (size_t e = 0; e < local.size(); ++e) {
            out.tallies[e].rejections += local[e].rejections;
            out.tallies[e].undefined += local[e].undefined;
        }
        out.failures += local_failures;
    };
    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace cjack

#pragma once

// Simulation lab: the factor DGP with two-way intra-cluster correlation that
// survives two-way fixed effects, exponential cluster-size rules, integer
// intersection allocation, empty-intersection thinning, rejection-frequency
// sweeps, and placebo-regression audits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cjack/crve.hpp"
#include "cjack/dataset.hpp"
#include "cjack/inference.hpp"
#include "cjack/rng.hpp"
#include "cjack/student_t.hpp"

namespace cjack {

// ---------------------------------------------------------------------------
// configuration

enum class BinaryScope { observation, intersection };

struct SimConfig {
    int G = 15, H = 12;
    long N = 10000;
    double gamma_g = 2.0, gamma_h = 2.0;  // cluster-size variation exponents
    double rho_g = 0.1, rho_h = 0.1;      // disturbance correlations
    double rho_gx = 0.2, rho_hx = 0.2;    // regressor correlations
    int p = 10;                           // continuous regressors (test regressor first)
    int q = 0;                            // extra binary regressors
    BinaryScope q_scope = BinaryScope::observation;
    double binary_prob = 0.5;
    bool fe = true;  // two-way fixed effects in the estimated model
    double empty_frac = 0.0;
    double beta1 = 0.0;
    long reps = 10000;
    uint64_t seed = 1;
    double level = 0.05;

    void validate() const {
        if (G < 2 || H < 2) throw ConfigError("G and H must both be at least 2");
        if (N < G + H) throw ConfigError("N is too small for the requested clusters");
        if (p < 1) throw ConfigError("p must be at least 1 (the test regressor)");
        if (q < 0) throw ConfigError("q must be nonnegative");
        if (gamma_g < 0 || gamma_h < 0) throw ConfigError("gamma must be nonnegative");
        if (reps < 1) throw ConfigError("reps must be positive");
        if (level <= 0 || level >= 1) throw ConfigError("level must be in (0,1)");
        if (binary_prob <= 0 || binary_prob >= 1) throw ConfigError("binary_prob must be in (0,1)");
        if (empty_frac < 0 || empty_frac >= 1) throw ConfigError("empty_frac must be in [0,1)");
        check_rho_pair(rho_g, rho_h, "rho_g/rho_h");
        check_rho_pair(rho_gx, rho_hx, "rho_gx/rho_hx");
    }

    static void check_rho_pair(double rg, double rh, const char* what) {
        if (rg < 0 || rg >= 1 || rh < 0 || rh >= 1)
            throw ConfigError(std::string(what) + " must lie in [0,1)");
        const double s2 = rg / (1.0 - rg) + rh / (1.0 - rh);
        if (s2 > 1.0 + 1e-12)
            throw ConfigError(std::string(what) +
                              " violate sigma_eps^2 >= 0: need rho_g/(1-rho_g) + rho_h/(1-rho_h) <= 1");
    }
};

// ---------------------------------------------------------------------------
// cluster sizes and intersection allocation

// N_j proportional to exp(gamma*j/J); first J-1 sizes rounded to the nearest
// integer, the last absorbs the remainder.
inline std::vector<int> cluster_sizes(long N, int J, double gamma) {
    if (J < 1 || N < J) throw InfeasibleSizes("need N >= J >= 1");
    std::vector<double> w(J);
    double tot = 0.0;
    for (int j = 0; j < J; ++j) {
        w[j] = std::exp(gamma * (j + 1) / J);
        tot += w[j];
    }
    std::vector<int> sizes(J);
    long used = 0;
    for (int j = 0; j < J - 1; ++j) {
        sizes[j] = static_cast<int>(std::llround(N * w[j] / tot));
        used += sizes[j];
    }
    sizes[J - 1] = static_cast<int>(N - used);
    for (int s : sizes)
        if (s < 1) throw InfeasibleSizes("cluster size rule produced a size below 1");
    return sizes;
}

// Integer N_gh with exact row sums (largest-remainder within each row) and
// exact column sums (repair moves between over- and under-full columns).
inline std::vector<std::vector<int>> allocate_intersections(const std::vector<int>& sizes_g,
                                                            const std::vector<int>& sizes_h,
                                                            long N) {
    const int G = static_cast<int>(sizes_g.size());
    const int H = static_cast<int>(sizes_h.size());
    std::vector<std::vector<int>> M(G, std::vector<int>(H, 0));
    for (int g = 0; g < G; ++g) {
        std::vector<double> frac(H);
        int assigned = 0;
        for (int h = 0; h < H; ++h) {
            const double exact = static_cast<double>(sizes_g[g]) * sizes_h[h] / N;
            M[g][h] = static_cast<int>(std::floor(exact));
            frac[h] = exact - M[g][h];
            assigned += M[g][h];
        }
        int rem = sizes_g[g] - assigned;
        std::vector<int> order(H);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        for (int i = 0; i < rem; ++i) M[g][order[i % H]] += 1;
    }
    // column repair: move single observations between columns within a row
    std::vector<long> colsum(H, 0);
    for (int g = 0; g < G; ++g)
        for (int h = 0; h < H; ++h) colsum[h] += M[g][h];
    for (;;) {
        int hp = -1, hm = -1;
        long ep = 0, em = 0;
        for (int h = 0; h < H; ++h) {
            const long e = colsum[h] - sizes_h[h];
            if (e > ep) ep = e, hp = h;
            if (e < em) em = e, hm = h;
        }
        if (hp < 0 || hm < 0) break;
        // donate from the row with the largest cell in the over-full column,
        // so no cell is ever emptied by the repair
        int best = -1;
        for (int g = 0; g < G; ++g)
            if (M[g][hp] > (best < 0 ? 1 : M[best][hp])) best = g;
        if (best < 0) throw InfeasibleSizes("intersection repair ran out of donors");
        M[best][hp] -= 1;
        M[best][hm] += 1;
        colsum[hp] -= 1;
        colsum[hm] += 1;
    }
    return M;
}

// ---------------------------------------------------------------------------
// empty-intersection thinning

// Empties the requested fraction of cells, smallest expected cells first,
// reallocating observations within each G row, then repairs the column sums.
// Deterministic given the rng stream; preserves both marginals exactly.
inline std::vector<std::vector<int>> thin_intersections(const std::vector<std::vector<int>>& M0,
                                                        double target_frac, RngStream& rng) {
    std::vector<std::vector<int>> M = M0;
    const int G = static_cast<int>(M.size());
    const int H = static_cast<int>(M[0].size());
    if (target_frac <= 0.0) return M;

    std::vector<int> rowsum(G, 0), colsum(H, 0);
    std::vector<int> row_nonempty(G, 0), col_nonempty(H, 0);
    for (int g = 0; g < G; ++g)
        for (int h = 0; h < H; ++h) {
            rowsum[g] += M[g][h];
            colsum[h] += M[g][h];
            if (M[g][h] > 0) {
                ++row_nonempty[g];
                ++col_nonempty[h];
            }
        }
    const std::vector<int> col_target = colsum;

    long want_empty = std::llround(target_frac * G * H);
    long have_empty = 0;
    for (int g = 0; g < G; ++g)
        for (int h = 0; h < H; ++h)
            if (M[g][h] == 0) ++have_empty;

    // rank candidate cells by expected allocation, ties broken by the stream
    struct Cell {
        double prio;
        double jitter;
        int g, h;
    };
    std::vector<Cell> cells;
    for (int g = 0; g < G; ++g)
        for (int h = 0; h < H; ++h)
            if (M[g][h] > 0)
                cells.push_back({static_cast<double>(rowsum[g]) * colsum[h], rng.next_uniform(), g, h});
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.prio != b.prio) return a.prio < b.prio;
        return a.jitter < b.jitter;
    });

    for (const Cell& c : cells) {
        if (have_empty >= want_empty) break;
        if (M[c.g][c.h] == 0) continue;
        if (row_nonempty[c.g] <= 1 || col_nonempty[c.h] <= 1) continue;
        // move the cell's observations to the row's largest surviving cell
        int dest = -1;
        for (int h = 0; h < H; ++h)
            if (h != c.h && M[c.g][h] > 0 && (dest < 0 || M[c.g][h] > M[c.g][dest])) dest = h;
        if (dest < 0) continue;
        M[c.g][dest] += M[c.g][c.h];
        colsum[dest] += M[c.g][c.h];
        colsum[c.h] -= M[c.g][c.h];
        M[c.g][c.h] = 0;
        --row_nonempty[c.g];
        --col_nonempty[c.h];
        ++have_empty;
    }
    if (have_empty + 1 < want_empty)
        throw InfeasibleThinning("cannot empty " + std::to_string(want_empty) + " of " +
                                 std::to_string(G * H) + " intersections");

    // repair the column sums without touching emptied cells: route single
    // observations from over-full to under-full columns, possibly through a
    // chain of intermediate columns sharing surviving cells
    auto route_unit = [&](int hp, int hm) -> bool {
        std::vector<int> prev_col(H, -2), via_row(H, -1);
        std::vector<int> queue = {hp};
        prev_col[hp] = -1;
        for (size_t qi = 0; qi < queue.size() && prev_col[hm] == -2; ++qi) {
            const int c = queue[qi];
            for (int g = 0; g < G; ++g) {
                // every donor cell must stay non-empty after giving one unit
                if (M[g][c] < 2) continue;
                for (int c2 = 0; c2 < H; ++c2) {
                    if (prev_col[c2] != -2 || M[g][c2] < 1) continue;
                    prev_col[c2] = c;
                    via_row[c2] = g;
                    queue.push_back(c2);
                }
            }
        }
        if (prev_col[hm] == -2) return false;
        // collect the hops hp -> ... -> hm and apply them in forward order
        struct Hop {
            int row, from, into;
        };
        std::vector<Hop> hops;
        for (int c = hm; c != hp; c = prev_col[c]) hops.push_back({via_row[c], prev_col[c], c});
        for (auto it = hops.rbegin(); it != hops.rend(); ++it) {
            M[it->row][it->from] -= 1;
            M[it->row][it->into] += 1;
        }
        colsum[hp] -= 1;
        colsum[hm] += 1;
        return true;
    };
    for (;;) {
        int hp = -1, hm = -1;
        for (int h = 0; h < H; ++h) {
            if (colsum[h] > col_target[h] && (hp < 0 || colsum[h] - col_target[h] >
                                                            colsum[hp] - col_target[hp]))
                hp = h;
            if (colsum[h] < col_target[h] && (hm < 0 || col_target[h] - colsum[h] >
                                                            col_target[hm] - colsum[hm]))
                hm = h;
        }
        if (hp < 0 && hm < 0) break;
        if (hp < 0 || hm < 0 || !route_unit(hp, hm))
            throw InfeasibleThinning("column repair stalled after thinning");
    }
    return M;
}

// ---------------------------------------------------------------------------
// design layout

struct SimDesign {
    int G = 0, H = 0, I = 0;
    long N = 0;
    std::vector<std::vector<int>> ngh;
    std::vector<int> row_g, row_h, row_parity;  // parity 0 = odd index, 1 = even
    std::vector<int> row_cell;                  // row -> non-empty cell id
    std::vector<std::pair<int, int>> cell_parents;
};

inline SimDesign build_design(const SimConfig& cfg) {
    SimDesign d;
    d.G = cfg.G;
    d.H = cfg.H;
    d.N = cfg.N;
    std::vector<int> sg = cluster_sizes(cfg.N, cfg.G, cfg.gamma_g);
    std::vector<int> sh = cluster_sizes(cfg.N, cfg.H, cfg.gamma_h);
    d.ngh = allocate_intersections(sg, sh, cfg.N);
    if (cfg.empty_frac > 0.0) {
        // fixed design stream, separate from every replication stream
        RngStream rs(cfg.seed, 0xDE516Eull, ~0ull, 0);
        d.ngh = thin_intersections(d.ngh, cfg.empty_frac, rs);
    }
    d.row_g.reserve(cfg.N);
    d.row_h.reserve(cfg.N);
    d.row_parity.reserve(cfg.N);
    d.row_cell.reserve(cfg.N);
    for (int g = 0; g < cfg.G; ++g)
        for (int h = 0; h < cfg.H; ++h) {
            const int n = d.ngh[g][h];
            if (n == 0) continue;
            const int cell = d.I++;
            d.cell_parents.emplace_back(g, h);
            for (int i = 1; i <= n; ++i) {
                d.row_g.push_back(g);
                d.row_h.push_back(h);
                d.row_parity.push_back(i % 2 == 1 ? 0 : 1);
                d.row_cell.push_back(cell);
            }
        }
    return d;
}

// ---------------------------------------------------------------------------
// factor DGP

// z_ghi = sigma_g xi^par_g + sigma_h xi^par_h + sigma_eps zeta_ghi, with the
// parity given by the within-intersection index and fresh N(0,1) effects.
inline void gen_factor(const SimDesign& d, double rho_g, double rho_h, RngStream& rng,
                       double* out) {
    const double sg = std::sqrt(rho_g / (1.0 - rho_g));
    const double sh = std::sqrt(rho_h / (1.0 - rho_h));
    const double s2e = 1.0 - sg * sg - sh * sh;
    if (s2e < -1e-12) throw ConfigError("rho pair violates sigma_eps^2 >= 0");
    const double se = std::sqrt(std::max(0.0, s2e));
    std::vector<double> xg(2 * d.G), xh(2 * d.H);
    for (int g = 0; g < d.G; ++g) {
        xg[2 * g] = rng.next_normal();
        xg[2 * g + 1] = rng.next_normal();
    }
    for (int h = 0; h < d.H; ++h) {
        xh[2 * h] = rng.next_normal();
        xh[2 * h + 1] = rng.next_normal();
    }
    for (long r = 0; r < d.N; ++r) {
        const int par = d.row_parity[r];
        out[r] = sg * xg[2 * d.row_g[r] + par] + sh * xh[2 * d.row_h[r] + par] +
                 se * rng.next_normal();
    }
}

inline Vec gen_factor(const SimDesign& d, double rho_g, double rho_h, RngStream& rng) {
    Vec z(d.N);
    gen_factor(d, rho_g, rho_h, rng, z.data());
    return z;
}

// ---------------------------------------------------------------------------
// per-replication dataset

// Builds the immutable frame (labels, FE dummies) once per design.
inline Dataset make_sim_frame(const SimConfig& cfg, const SimDesign& d) {
    Dataset ds;
    const int base = cfg.p + cfg.q;
    const int k = base + (cfg.fe ? cfg.G + cfg.H - 1 : 0);
    ds.y.assign(d.N, 0.0);
    ds.X = Matrix(static_cast<int>(d.N), k);
    for (int j = 0; j < cfg.p; ++j) ds.colnames.push_back("z" + std::to_string(j + 1));
    for (int j = 0; j < cfg.q; ++j) ds.colnames.push_back("b" + std::to_string(j + 1));
    ds.n_base = base;
    ds.coef = 0;
    ds.g_labels.resize(d.N);
    ds.h_labels.resize(d.N);
    for (long r = 0; r < d.N; ++r) {
        ds.g_labels[r] = "g" + std::to_string(d.row_g[r]);
        ds.h_labels[r] = "h" + std::to_string(d.row_h[r]);
    }
    if (cfg.fe) {
        for (int g = 0; g < cfg.G; ++g) ds.colnames.push_back("feg=" + std::to_string(g));
        for (int h = 1; h < cfg.H; ++h) ds.colnames.push_back("feh=" + std::to_string(h));
        for (long r = 0; r < d.N; ++r) {
            ds.X(r, base + d.row_g[r]) = 1.0;
            if (d.row_h[r] >= 1) ds.X(r, base + cfg.G + d.row_h[r] - 1) = 1.0;
        }
    }
    return ds;
}

// stream ids within a replication
enum : uint64_t { kStreamZ = 0 };  // z streams 0..p-1, binaries p..p+q-1, disturbance p+q

// Overwrites the stochastic columns and the regressand for replication `rep`.
inline void fill_sim_dataset(const SimConfig& cfg, const SimDesign& d, uint64_t grid_index,
                             long rep, Dataset& ds) {
    Vec col(d.N);
    for (int j = 0; j < cfg.p; ++j) {
        RngStream rs(cfg.seed, grid_index, static_cast<uint64_t>(rep), kStreamZ + j);
        gen_factor(d, cfg.rho_gx, cfg.rho_hx, rs, col.data());
        for (long r = 0; r < d.N; ++r) ds.X(r, j) = col[r];
    }
    for (int j = 0; j < cfg.q; ++j) {
        RngStream rs(cfg.seed, grid_index, static_cast<uint64_t>(rep), kStreamZ + cfg.p + j);
        if (cfg.q_scope == BinaryScope::observation) {
            for (long r = 0; r < d.N; ++r)
                ds.X(r, cfg.p + j) = rs.next_uniform() <= cfg.binary_prob ? 1.0 : 0.0;
        } else {
            std::vector<double> cell(d.I);
            for (int c = 0; c < d.I; ++c)
                cell[c] = rs.next_uniform() <= cfg.binary_prob ? 1.0 : 0.0;
            for (long r = 0; r < d.N; ++r) ds.X(r, cfg.p + j) = cell[d.row_cell[r]];
        }
    }
    RngStream ru(cfg.seed, grid_index, static_cast<uint64_t>(rep), kStreamZ + cfg.p + cfg.q);
    gen_factor(d, cfg.rho_g, cfg.rho_h, ru, ds.y.data());
    if (cfg.beta1 != 0.0)
        for (long r = 0; r < d.N; ++r) ds.y[r] += cfg.beta1 * ds.X(r, 0);
}

inline Dataset gen_dataset(const SimConfig& cfg, long rep, uint64_t grid_index = 0) {
    SimDesign d = build_design(cfg);
    Dataset ds = make_sim_frame(cfg, d);
    fill_sim_dataset(cfg, d, grid_index, rep, ds);
    return ds;
}

// ---------------------------------------------------------------------------
// rejection-frequency sweeps

struct EstimatorTally {
    Family family = Family::CV1;
    Arity arity = Arity::HC;
    long rejections = 0;  // undefined replications are classified as rejections
    long undefined = 0;
};

struct SweepResult {
    std::string grid_param;
    double grid_value = 0.0;
    SimConfig cfg;
    long reps = 0;
    long failures = 0;  // replications where estimation itself threw
    std::vector<EstimatorTally> tallies;  // 16, menu order
};

namespace detail {

inline void tally_menu(const std::vector<MenuEntry>& menu, double beta_hat, int G, int H, int I,
                       int N, int k, double level, std::vector<EstimatorTally>& tallies) {
    for (size_t e = 0; e < menu.size(); ++e) {
        if (!menu[e].defined) {
            // an undefined variance means no t-statistic; count it against
            // the estimator as a rejection, and separately
            tallies[e].rejections += 1;
            tallies[e].undefined += 1;
            continue;
        }
        const int df = df_for(menu[e].arity, G, H, I, N, k);
        const double t = beta_hat / menu[e].se;
        if (student_t_pvalue(t, df) < level) tallies[e].rejections += 1;
    }
}

}  // namespace detail

// One grid point; deterministic given (cfg.seed, grid_index) regardless of
// the number of threads.
inline SweepResult run_sweep_point(const SimConfig& cfg, uint64_t grid_index, int threads,
                                   const std::string& grid_param = "", double grid_value = 0.0) {
    cfg.validate();
    SweepResult out;
    out.grid_param = grid_param;
    out.grid_value = grid_value;
    out.cfg = cfg;
    out.reps = cfg.reps;
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

    const SimDesign design = build_design(cfg);
    const Dataset frame = make_sim_frame(cfg, design);
    const int nthreads = std::max(1, threads);
    const std::vector<EstimatorTally> zero_tallies = out.tallies;

    std::mutex merge_mutex;
    std::atomic<long> next_rep{0};
    auto worker = [&]() {
        Dataset ds = frame;
        std::vector<EstimatorTally> local = zero_tallies;
        long local_failures = 0;
        TwoWayOptions opts;
        for (;;) {
            const long rep = next_rep.fetch_add(1);
            if (rep >= cfg.reps) break;
            fill_sim_dataset(cfg, design, grid_index, rep, ds);
            try {
                TwoWayAnalysis an = analyze(ds, opts);
                auto menu = variance_menu(an, ds, 0);
                detail::tally_menu(menu, an.fit.beta[0], an.gi.J, an.hi.J, an.ii.J, ds.N(),
                                   ds.k(), cfg.level, local);
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
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

struct SweepGrid {
    std::string param = "";          // name of the swept key ("" = single point)
    std::vector<double> values;      // one per grid point
    std::vector<SimConfig> configs;  // one per grid point
};

inline std::vector<SweepResult> run_sweep(const SweepGrid& grid, int threads) {
    std::vector<SweepResult> results;
    for (size_t i = 0; i < grid.configs.size(); ++i)
        results.push_back(run_sweep_point(grid.configs[i], static_cast<uint64_t>(i), threads,
                                          grid.param,
                                          grid.values.empty() ? 0.0 : grid.values[i]));
    return results;
}

}  // namespace cjack

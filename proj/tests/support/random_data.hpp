#pragma once

// Shared helpers for building random test datasets (test data only; the
// library's own RNG is not used here so oracles stay independent).

#include <random>
#include <string>
#include <vector>

#include "cjack/dataset.hpp"

namespace testsupport {

struct RandomSpec {
    int N = 60;
    int p = 2;        // continuous regressors
    int G = 4;
    int H = 3;
    bool fe = false;  // append two-way FE blocks on the cluster labels
    double noise = 1.0;
    unsigned seed = 1;
};

inline cjack::Dataset random_dataset(const RandomSpec& spec) {
    std::mt19937 rng(spec.seed);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> gd(0, spec.G - 1), hd(0, spec.H - 1);

    cjack::Dataset ds;
    ds.y.resize(spec.N);
    ds.X = cjack::Matrix(spec.N, spec.p);
    for (int j = 0; j < spec.p; ++j) ds.colnames.push_back("z" + std::to_string(j + 1));
    ds.n_base = spec.p;
    ds.g_labels.resize(spec.N);
    ds.h_labels.resize(spec.N);
    // make sure every cluster id appears at least once
    for (int r = 0; r < spec.N; ++r) {
        const int g = r < spec.G ? r : gd(rng);
        const int h = r < spec.H ? r : hd(rng);
        ds.g_labels[r] = "g" + std::to_string(g);
        ds.h_labels[r] = "h" + std::to_string(h);
        for (int j = 0; j < spec.p; ++j) ds.X(r, j) = nd(rng);
        double mu = 0.0;
        for (int j = 0; j < spec.p; ++j) mu += 0.5 * ds.X(r, j);
        ds.y[r] = mu + 0.3 * g - 0.2 * h + spec.noise * nd(rng);
    }
    ds.cat_cols[ds.g_name] = ds.g_labels;
    ds.cat_cols[ds.h_name] = ds.h_labels;
    if (spec.fe) {
        cjack::FeSpec fe;
        fe.columns = {ds.g_name, ds.h_name};
        ds = expand_fixed_effects(ds, fe);
    }
    return ds;
}

}  // namespace testsupport

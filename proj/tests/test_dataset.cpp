#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "cjack/dataset.hpp"
#include "cjack/ols.hpp"

using namespace cjack;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/cjack_test_") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_csv toy file") {
    auto path = write_temp("toy.csv",
                           "y,x,g,h\n"
                           "1.0,2.0,a,u\n"
                           "2.0,3.0,a,v\n"
                           "3.5,4.0,b,u\n"
                           "0.5,1.0,b,v\n");
    Dataset ds = load_csv(path, "y", {"x"}, "g", "h");
    CHECK(ds.N() == 4);
    CHECK(ds.k() == 1);
    CHECK(ds.g_labels[0] == "a");
    CHECK(ds.h_labels[3] == "v");
    std::remove(path.c_str());
}

TEST_CASE("load_csv reports missing columns and bad values") {
    auto path = write_temp("missingcol.csv", "y,x,g\n1,2,a\n");
    CHECK_THROWS_AS(load_csv(path, "y", {"x"}, "g", "h"), MissingColumn);
    std::remove(path.c_str());

    auto path2 = write_temp("badval.csv",
                            "y,x,g,h\n"
                            "1.0,2.0,a,u\n"
                            "oops,3.0,a,v\n");
    try {
        load_csv(path2, "y", {"x"}, "g", "h");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row == 2);
        CHECK(e.column == "y");
    }
    std::remove(path2.c_str());

    auto path3 = write_temp("missval.csv",
                            "y,x,g,h\n"
                            "1.0,,a,u\n");
    CHECK_THROWS_AS(load_csv(path3, "y", {"x"}, "g", "h"), ParseError);
    std::remove(path3.c_str());

    auto path4 = write_temp("empty.csv", "y,x,g,h\n");
    CHECK_THROWS_AS(load_csv(path4, "y", {"x"}, "g", "h"), EmptyData);
    std::remove(path4.c_str());
}

TEST_CASE("sample filter grammar") {
    auto path = write_temp("filter.csv",
                           "y,x,g,h,age,female\n"
                           "1,1,a,u,24,1\n"
                           "2,1,a,v,25,1\n"
                           "3,1,b,u,30,0\n"
                           "4,1,b,v,35,1\n"
                           "5,1,b,v,36,1\n");
    Dataset ds = load_csv(path, "y", {"x"}, "g", "h", {}, "age>=25 & age<=35");
    CHECK(ds.N() == 3);
    Dataset ds2 = load_csv(path, "y", {"x"}, "g", "h", {}, "female==1");
    CHECK(ds2.N() == 4);
    Dataset ds3 = load_csv(path, "y", {"x"}, "g", "h", {}, "g==b");
    CHECK(ds3.N() == 3);
    CHECK_THROWS_AS(load_csv(path, "y", {"x"}, "g", "h", {}, "age>>25"), UsageError);
    std::remove(path.c_str());
}

TEST_CASE("build_cluster_index orders by first appearance") {
    ClusterIndex ix = build_cluster_index({"a", "a", "b"});
    CHECK(ix.J == 2);
    CHECK(ix.sizes[0] == 2);
    CHECK(ix.sizes[1] == 1);
    CHECK(ix.names[0] == "a");

    ClusterIndex one = build_cluster_index({"z", "z", "z", "z"});
    CHECK(one.J == 1);
    CHECK(one.sizes[0] == 4);
}

TEST_CASE("cluster index partitions the rows") {
    std::vector<std::string> labels = {"c", "a", "c", "b", "a", "c"};
    ClusterIndex ix = build_cluster_index(labels);
    std::set<int> seen;
    int total = 0;
    for (const auto& m : ix.members)
        for (int r : m) {
            seen.insert(r);
            ++total;
        }
    CHECK(total == 6);
    CHECK(seen.size() == 6);
    for (int r = 0; r < 6; ++r) CHECK(labels[r] == ix.names[ix.row_cluster[r]]);
}

TEST_CASE("intersect_index basics") {
    // identical clusterings: I = G with diagonal sizes
    std::vector<std::string> g = {"a", "a", "b", "b", "c"};
    ClusterIndex gi = build_cluster_index(g, Dim::G);
    ClusterIndex hi = build_cluster_index(g, Dim::H);
    ClusterIndex ii = intersect_index(gi, hi);
    CHECK(ii.J == 3);
    CHECK(ii.sizes == gi.sizes);

    // fully crossed balanced 2x2 with N=8
    std::vector<std::string> g2 = {"a", "a", "a", "a", "b", "b", "b", "b"};
    std::vector<std::string> h2 = {"u", "u", "v", "v", "u", "u", "v", "v"};
    ClusterIndex ii2 = intersect_index(build_cluster_index(g2, Dim::G),
                                       build_cluster_index(h2, Dim::H));
    CHECK(ii2.J == 4);
    for (int s : ii2.sizes) CHECK(s == 2);
    int sum = 0;
    for (int s : ii2.sizes) sum += s;
    CHECK(sum == 8);
}

TEST_CASE("intersect_index is symmetric in its arguments") {
    std::mt19937 rng(3);
    std::vector<std::string> g, h;
    for (int i = 0; i < 60; ++i) {
        g.push_back("g" + std::to_string(rng() % 5));
        h.push_back("h" + std::to_string(rng() % 4));
    }
    ClusterIndex gi = build_cluster_index(g, Dim::G);
    ClusterIndex hi = build_cluster_index(h, Dim::H);
    ClusterIndex a = intersect_index(gi, hi);
    ClusterIndex b = intersect_index(hi, gi);
    CHECK(a.J == b.J);
    // same partition of rows: member sets agree up to cluster relabeling
    for (int r = 0; r < 60; ++r)
        for (int s = 0; s < 60; ++s)
            CHECK((a.row_cluster[r] == a.row_cluster[s]) ==
                  (b.row_cluster[r] == b.row_cluster[s]));
    CHECK(a.J <= gi.J * hi.J);
}

TEST_CASE("expand_fixed_effects counting rules") {
    Dataset ds;
    ds.y = {1, 2, 3, 4, 5, 6};
    ds.X = Matrix(6, 1);
    for (int r = 0; r < 6; ++r) ds.X(r, 0) = 0.5 * r * r - 1.0;
    ds.colnames = {"z"};
    ds.n_base = 1;
    ds.g_labels = {"a", "a", "b", "b", "c", "c"};
    ds.h_labels = {"u", "v", "u", "v", "u", "v"};
    ds.cat_cols["fg"] = ds.g_labels;
    ds.cat_cols["fh"] = ds.h_labels;

    FeSpec one;
    one.columns = {"fh"};
    Dataset e1 = expand_fixed_effects(ds, one);
    CHECK(e1.k() == 1 + 2);  // single FE column with 2 levels, full block

    FeSpec two;
    two.columns = {"fg", "fh"};
    Dataset e2 = expand_fixed_effects(ds, two);
    CHECK(e2.k() == 1 + 3 + 1);  // G + H - 1 dummy columns
    CHECK(e2.n_base == 1);
    CHECK(e2.has_fe());
}

TEST_CASE("reference-level choice does not move the Z coefficients") {
    std::mt19937 rng(17);
    std::normal_distribution<double> nd;
    const int N = 80;
    Dataset ds;
    ds.y.resize(N);
    ds.X = Matrix(N, 2);
    ds.colnames = {"z1", "z2"};
    ds.n_base = 2;
    for (int r = 0; r < N; ++r) {
        ds.X(r, 0) = nd(rng);
        ds.X(r, 1) = nd(rng);
        ds.g_labels.push_back("g" + std::to_string(rng() % 4));
        ds.h_labels.push_back("h" + std::to_string(rng() % 3));
        ds.y[r] = 0.7 * ds.X(r, 0) - 0.2 * ds.X(r, 1) + nd(rng);
    }
    ds.cat_cols["fg"] = ds.g_labels;
    ds.cat_cols["fh"] = ds.h_labels;

    FeSpec first;
    first.columns = {"fg", "fh"};
    FeSpec last;
    last.columns = {"fg", "fh"};
    last.drop = {FeSpec::Drop::None, FeSpec::Drop::Last};

    OlsFit fa = fit_ols(expand_fixed_effects(ds, first));
    OlsFit fb = fit_ols(expand_fixed_effects(ds, last));
    CHECK(std::abs(fa.beta[0] - fb.beta[0]) <= 1e-10);
    CHECK(std::abs(fa.beta[1] - fb.beta[1]) <= 1e-10);
}

TEST_CASE("expand_fixed_effects rejects rank-deficient designs") {
    Dataset ds;
    ds.y = {1, 2, 3, 4};
    ds.X = Matrix(4, 1, 1.0);  // intercept column alongside a full FE block
    ds.colnames = {"const"};
    ds.n_base = 1;
    ds.g_labels = {"a", "a", "b", "b"};
    ds.h_labels = {"u", "v", "u", "v"};
    ds.cat_cols["fg"] = ds.g_labels;
    FeSpec fe;
    fe.columns = {"fg"};
    CHECK_THROWS_AS(expand_fixed_effects(ds, fe), RankDeficient);
}

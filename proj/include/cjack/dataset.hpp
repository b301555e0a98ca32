#pragma once

// Tabular data loading, the sample filter grammar, cluster indices for the
// G / H / intersection dimensions, and fixed-effect dummy expansion.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cjack/errors.hpp"
#include "cjack/linalg.hpp"

namespace cjack {

// ---------------------------------------------------------------------------
// raw CSV table

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        throw MissingColumn(name);
    }
    bool has_col(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw EmptyData("empty file: " + path);
    t.header = detail::split_csv_line(line);
    for (auto& h : t.header) h = detail::trim(h);
    long rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != t.header.size())
            throw ParseError(rowno, "", "expected " + std::to_string(t.header.size()) +
                                            " fields, got " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.rows.empty()) throw EmptyData("no data rows in: " + path);
    return t;
}

// ---------------------------------------------------------------------------
// sample filter: comparisons joined by '&', e.g. "age>=25 & age<=35"

struct FilterClause {
    std::string column;
    std::string op;  // == != <= >= < >
    std::string literal;
};

inline std::vector<FilterClause> parse_filter(const std::string& expr) {
    std::vector<FilterClause> clauses;
    std::string rest = expr;
    size_t pos = 0;
    while (pos < rest.size()) {
        size_t amp = rest.find('&', pos);
        std::string part = rest.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
        pos = amp == std::string::npos ? rest.size() : amp + 1;
        if (pos < rest.size() && rest[pos] == '&') ++pos;  // tolerate &&
        part = detail::trim(part);
        if (part.empty()) continue;
        static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
        FilterClause c;
        size_t at = std::string::npos;
        for (const char* op : ops) {
            at = part.find(op);
            if (at != std::string::npos) {
                c.op = op;
                break;
            }
        }
        if (at == std::string::npos)
            throw UsageError("cannot parse filter clause: '" + part + "'");
        c.column = detail::trim(part.substr(0, at));
        c.literal = detail::trim(part.substr(at + c.op.size()));
        if (c.column.empty() || c.literal.empty())
            throw UsageError("cannot parse filter clause: '" + part + "'");
        clauses.push_back(std::move(c));
    }
    return clauses;
}

inline bool filter_match(const FilterClause& c, const std::string& value) {
    double lv, rv;
    const bool numeric = detail::parse_double(value, lv) && detail::parse_double(c.literal, rv);
    if (numeric) {
        if (c.op == "==") return lv == rv;
        if (c.op == "!=") return lv != rv;
        if (c.op == "<=") return lv <= rv;
        if (c.op == ">=") return lv >= rv;
        if (c.op == "<") return lv < rv;
        return lv > rv;
    }
    if (c.op == "==") return detail::trim(value) == c.literal;
    if (c.op == "!=") return detail::trim(value) != c.literal;
    throw UsageError("filter '" + c.column + c.op + c.literal + "' needs a numeric column");
}

inline void apply_filter(CsvTable& t, const std::string& expr) {
    if (detail::trim(expr).empty()) return;
    auto clauses = parse_filter(expr);
    std::vector<int> cols;
    cols.reserve(clauses.size());
    for (const auto& c : clauses) cols.push_back(t.col(c.column));
    std::vector<std::vector<std::string>> kept;
    for (auto& row : t.rows) {
        bool ok = true;
        for (size_t i = 0; i < clauses.size() && ok; ++i)
            ok = filter_match(clauses[i], row[cols[i]]);
        if (ok) kept.push_back(std::move(row));
    }
    t.rows = std::move(kept);
    if (t.rows.empty()) throw EmptyData("sample filter removed every row");
}

// ---------------------------------------------------------------------------
// Dataset

struct Dataset {
    Vec y;
    Matrix X;  // N x k design
    std::vector<std::string> colnames;
    std::vector<std::string> g_labels, h_labels;
    std::string g_name = "g", h_name = "h";
    int coef = 0;    // column of the coefficient of interest
    int n_base = 0;  // leading columns that are not FE dummies (p block)
    // categorical columns kept around for FE expansion
    std::map<std::string, std::vector<std::string>> cat_cols;

    int N() const { return static_cast<int>(y.size()); }
    int k() const { return X.cols; }
    bool has_fe() const { return n_base < X.cols; }
};

// Numeric columns parsed as reals; cluster and FE columns kept categorical.
// Any missing/unparseable field in a used column is a hard error naming the row.
inline Dataset load_csv(const std::string& path, const std::string& y_col,
                        const std::vector<std::string>& x_cols, const std::string& g_col,
                        const std::string& h_col,
                        const std::vector<std::string>& cat_extra = {},
                        const std::string& sample = "") {
    CsvTable t = read_csv(path);
    apply_filter(t, sample);

    const int yc = t.col(y_col);
    std::vector<int> xcs;
    for (const auto& c : x_cols) xcs.push_back(t.col(c));
    const int gc = t.col(g_col);
    const int hc = t.col(h_col);
    std::vector<std::pair<std::string, int>> cats = {{g_col, gc}, {h_col, hc}};
    for (const auto& c : cat_extra)
        if (c != g_col && c != h_col) cats.emplace_back(c, t.col(c));

    const int N = static_cast<int>(t.rows.size());
    const int k = static_cast<int>(x_cols.size());
    Dataset ds;
    ds.y.resize(N);
    ds.X = Matrix(N, k);
    ds.colnames = x_cols;
    ds.g_labels.resize(N);
    ds.h_labels.resize(N);
    ds.g_name = g_col;
    ds.h_name = h_col;
    ds.n_base = k;
    for (auto& [name, c] : cats) ds.cat_cols[name].resize(N);

    for (int r = 0; r < N; ++r) {
        const auto& row = t.rows[r];
        double v;
        if (!detail::parse_double(row[yc], v)) throw ParseError(r + 1, y_col, "missing or non-numeric value");
        ds.y[r] = v;
        for (int j = 0; j < k; ++j) {
            if (!detail::parse_double(row[xcs[j]], v))
                throw ParseError(r + 1, x_cols[j], "missing or non-numeric value");
            ds.X(r, j) = v;
        }
        for (auto& [name, c] : cats) {
            const std::string s = detail::trim(row[c]);
            if (s.empty()) throw ParseError(r + 1, name, "missing value");
            ds.cat_cols[name][r] = s;
        }
        ds.g_labels[r] = ds.cat_cols[g_col][r];
        ds.h_labels[r] = ds.cat_cols[h_col][r];
    }
    if (N < k) throw RankDeficient("more columns than rows");
    return ds;
}

// ---------------------------------------------------------------------------
// cluster indices

enum class Dim { G, H, I };

inline const char* dim_name(Dim d) { return d == Dim::G ? "G" : d == Dim::H ? "H" : "I"; }

struct ClusterIndex {
    Dim dim = Dim::G;
    int J = 0;
    std::vector<std::string> names;           // label of each cluster
    std::vector<std::vector<int>> members;    // row ids per cluster
    std::vector<int> sizes;
    std::vector<int> row_cluster;             // row -> cluster id
    std::vector<std::pair<int, int>> parents; // I only: (g,h) per intersection
};

// Clusters ordered by first appearance.
inline ClusterIndex build_cluster_index(const std::vector<std::string>& labels, Dim dim = Dim::G) {
    ClusterIndex ix;
    ix.dim = dim;
    const int N = static_cast<int>(labels.size());
    ix.row_cluster.resize(N);
    std::unordered_map<std::string, int> seen;
    for (int r = 0; r < N; ++r) {
        auto it = seen.find(labels[r]);
        int id;
        if (it == seen.end()) {
            id = static_cast<int>(ix.names.size());
            seen.emplace(labels[r], id);
            ix.names.push_back(labels[r]);
            ix.members.emplace_back();
            ix.sizes.push_back(0);
        } else {
            id = it->second;
        }
        ix.row_cluster[r] = id;
        ix.members[id].push_back(r);
        ix.sizes[id]++;
    }
    ix.J = static_cast<int>(ix.names.size());
    return ix;
}

// Non-empty intersections of two indices over the same rows, ordered by first
// appearance.
inline ClusterIndex intersect_index(const ClusterIndex& gi, const ClusterIndex& hi) {
    ClusterIndex ix;
    ix.dim = Dim::I;
    const int N = static_cast<int>(gi.row_cluster.size());
    ix.row_cluster.resize(N);
    std::unordered_map<long long, int> seen;
    for (int r = 0; r < N; ++r) {
        const int g = gi.row_cluster[r];
        const int h = hi.row_cluster[r];
        const long long cell = static_cast<long long>(g) * hi.J + h;
        auto it = seen.find(cell);
        int id;
        if (it == seen.end()) {
            id = static_cast<int>(ix.names.size());
            seen.emplace(cell, id);
            ix.names.push_back(gi.names[g] + "|" + hi.names[h]);
            ix.members.emplace_back();
            ix.sizes.push_back(0);
            ix.parents.emplace_back(g, h);
        } else {
            id = it->second;
        }
        ix.row_cluster[r] = id;
        ix.members[id].push_back(r);
        ix.sizes[id]++;
    }
    ix.J = static_cast<int>(ix.names.size());
    return ix;
}

// ---------------------------------------------------------------------------
// fixed-effect expansion

struct FeSpec {
    enum class Drop { Auto, None, First, Last };
    std::vector<std::string> columns;
    std::vector<Drop> drop;  // parallel to columns; empty means all Auto
};

// Appends dummy blocks for the FE columns.  The default rule: no global
// intercept, the first FE block keeps all levels, and every later block drops
// its first level, giving G + H - 1 dummy columns for two-way FE.
inline Dataset expand_fixed_effects(const Dataset& ds, const FeSpec& fe) {
    const int N = ds.N();
    struct Block {
        std::string name;
        std::vector<std::string> levels;
        std::vector<int> row_level;
        int skip;  // level index to drop, or -1
    };
    std::vector<Block> blocks;
    for (size_t b = 0; b < fe.columns.size(); ++b) {
        auto it = ds.cat_cols.find(fe.columns[b]);
        if (it == ds.cat_cols.end()) throw MissingColumn(fe.columns[b]);
        Block blk;
        blk.name = fe.columns[b];
        blk.row_level.resize(N);
        std::unordered_map<std::string, int> seen;
        for (int r = 0; r < N; ++r) {
            const std::string& lv = it->second[r];
            auto f = seen.find(lv);
            int id;
            if (f == seen.end()) {
                id = static_cast<int>(blk.levels.size());
                seen.emplace(lv, id);
                blk.levels.push_back(lv);
            } else {
                id = f->second;
            }
            blk.row_level[r] = id;
        }
        FeSpec::Drop rule = b < fe.drop.size() ? fe.drop[b] : FeSpec::Drop::Auto;
        if (rule == FeSpec::Drop::Auto)
            rule = (b == 0) ? FeSpec::Drop::None : FeSpec::Drop::First;
        blk.skip = rule == FeSpec::Drop::None    ? -1
                   : rule == FeSpec::Drop::First ? 0
                                                 : static_cast<int>(blk.levels.size()) - 1;
        blocks.push_back(std::move(blk));
    }

    int extra = 0;
    for (const auto& blk : blocks)
        extra += static_cast<int>(blk.levels.size()) - (blk.skip >= 0 ? 1 : 0);
    const int k0 = ds.k();
    if (N < k0 + extra) throw RankDeficient("more columns than rows after FE expansion");

    Dataset out = ds;
    out.X = Matrix(N, k0 + extra);
    for (int r = 0; r < N; ++r)
        for (int j = 0; j < k0; ++j) out.X(r, j) = ds.X(r, j);
    int col = k0;
    for (const auto& blk : blocks) {
        for (int lv = 0; lv < static_cast<int>(blk.levels.size()); ++lv) {
            if (lv == blk.skip) continue;
            for (int r = 0; r < N; ++r)
                if (blk.row_level[r] == lv) out.X(r, col) = 1.0;
            out.colnames.push_back(blk.name + "=" + blk.levels[lv]);
            ++col;
        }
    }
    out.n_base = ds.n_base;

    // full-sample Gram must be nonsingular
    SymMatrix gram(out.k());
    for (int r = 0; r < N; ++r) gram.add_outer(out.X.row(r));
    CholFactor f;
    if (!f.factor(gram, 1e-11))
        throw RankDeficient("design matrix is rank deficient after FE expansion");
    return out;
}

}  // namespace cjack

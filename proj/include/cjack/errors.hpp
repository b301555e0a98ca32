#pragma once

#include <stdexcept>
#include <string>

namespace cjack {

// Base type for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPositiveDefinite : Error {
    explicit NotPositiveDefinite(const std::string& msg = "matrix is not positive definite")
        : Error(msg) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg = "eigensolver did not converge")
        : Error(msg) {}
};

struct MissingColumn : Error {
    explicit MissingColumn(const std::string& col)
        : Error("missing column: " + col) {}
};

struct ParseError : Error {
    long row;  // 1-based data row (header row is 0)
    std::string column;
    ParseError(long row_, const std::string& col, const std::string& what_)
        : Error("row " + std::to_string(row_) + ", column '" + col + "': " + what_),
          row(row_), column(col) {}
};

struct EmptyData : Error {
    explicit EmptyData(const std::string& msg = "no data rows") : Error(msg) {}
};

struct RankDeficient : Error {
    explicit RankDeficient(const std::string& msg = "design matrix is rank deficient")
        : Error(msg) {}
};

struct TooFewClusters : Error {
    explicit TooFewClusters(const std::string& msg = "need at least 2 clusters")
        : Error(msg) {}
};

struct SingularReducedGram : Error {
    int cluster;
    explicit SingularReducedGram(int cluster_)
        : Error("delete-one Gram is singular for cluster " + std::to_string(cluster_)),
          cluster(cluster_) {}
};

struct SingularMjj : Error {
    int cluster;
    explicit SingularMjj(int cluster_)
        : Error("M_jj block is singular for cluster " + std::to_string(cluster_)),
          cluster(cluster_) {}
};

struct CollinearColumn : Error {
    explicit CollinearColumn(const std::string& msg = "column is collinear with the others")
        : Error(msg) {}
};

struct DegenerateSelector : Error {
    explicit DegenerateSelector(const std::string& msg = "coefficient selector has zero mean contribution")
        : Error(msg) {}
};

struct InfeasibleSizes : Error {
    explicit InfeasibleSizes(const std::string& msg = "cluster size rule produced an empty cluster")
        : Error(msg) {}
};

struct InfeasibleThinning : Error {
    explicit InfeasibleThinning(const std::string& msg = "cannot empty that many intersections")
        : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace cjack

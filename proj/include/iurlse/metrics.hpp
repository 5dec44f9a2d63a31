#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iurlse/reliability.hpp"

namespace iurlse {

/// True reliabilities p*_x over the candidate set.
struct OracleTable {
    std::vector<double> p_star;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::string benchmark;
    std::string benchmark_hash;

    std::size_t size() const { return p_star.size(); }
    /// Membership in the true upper set {p*_x > alpha}.
    std::vector<bool> upper_set(double alpha) const;
};

/// Retrieval metrics with H as the positive class. Unclassified candidates
/// count as not predicted H. Empty predicted set gives precision 1; empty
/// true set gives recall 1 and sets recall_undefined.
struct Metrics {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    bool recall_undefined = false;
};

Metrics compute_metrics(const ClassificationState& state, std::span<const double> p_star, double alpha);

}  // namespace iurlse

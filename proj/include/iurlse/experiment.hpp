#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iurlse/engine.hpp"

namespace iurlse {

/// Mean and standard error (sample sd / sqrt(n); 0 when n = 1).
struct SeriesStat {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

SeriesStat mean_se(std::span<const double> values);

/// Seed of replication r, derived from the experiment base seed.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t replication);

/// Builds the problem for one replication. The returned Problem may point at
/// an OracleTable; the factory owns it and must keep it alive.
using ProblemFactory = std::function<Problem(std::size_t replication, std::uint64_t seed)>;

struct ReplicationOutcome {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    std::optional<RunResult> result;
    /// Non-empty when the replication failed (exception or GP failure).
    std::string error;

    bool ok() const { return result.has_value() && error.empty(); }
};

/// Per-trial aggregates over successful replications. A run that stopped
/// before trial t contributes its terminal value at t.
struct AggregateSeries {
    std::vector<SeriesStat> f1;
    std::vector<SeriesStat> precision;
    std::vector<SeriesStat> recall;
};

struct ExperimentResult {
    std::vector<ReplicationOutcome> runs;
    AggregateSeries series;
    std::vector<std::size_t> failed;
};

/// Pointwise mean and SE of ragged per-run series with last-value carry-forward.
std::vector<SeriesStat> aggregate_series(const std::vector<std::vector<double>>& per_run);

AggregateSeries aggregate_metrics(std::span<const ReplicationOutcome> runs);

/// Runs R independent replications; replication r uses
/// replication_seed(base_seed, r) as its run seed.
ExperimentResult experiment(const AlgorithmConfig& config, const ProblemFactory& factory, std::size_t replications,
                            std::uint64_t base_seed);

}  // namespace iurlse

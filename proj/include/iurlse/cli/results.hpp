#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iurlse/cli/config.hpp"
#include "iurlse/experiment.hpp"

namespace iurlse::cli {

/// One CSV row per (replication, trial).
struct ResultRow {
    int schema_version = kSchemaVersion;
    std::size_t run_id = 0;
    std::uint64_t seed = 0;
    std::size_t t = 0;
    std::string method;
    std::optional<Metrics> metrics;
    std::size_t n_h = 0;
    std::size_t n_l = 0;
    std::size_t n_u = 0;
    /// Empty when the trial ended without an evaluation.
    std::vector<double> x;
    std::optional<double> y;
    bool explore = false;
};

std::vector<ResultRow> to_rows(const ExperimentResult& result, Method method);

/// RFC 4180 CSV with columns schema_version, run_id, seed, t, method, f1,
/// precision, recall, n_h, n_l, n_u, x0..x{dim-1}, y, explore.
void write_trials_csv(std::ostream& out, Eigen::Index dim, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_trials_csv(std::istream& in, const std::string& source);

nlohmann::json summary_json(const ExperimentConfig& config, const ResolvedProblem& resolved,
                            const ExperimentResult& result);

nlohmann::json oracle_json(const OracleTable& table);
OracleTable oracle_from_json(const nlohmann::json& j, const std::string& source);

/// Aggregated series for plotting.
struct ReportRow {
    std::string method;
    std::size_t t = 0;
    std::string metric;
    SeriesStat stat;
};

/// Groups rows by method; runs are keyed by (input index, run_id) and carry
/// their last value forward. Ordered by method, metric, t.
std::vector<ReportRow> aggregate_report(const std::vector<std::vector<ResultRow>>& inputs);

/// Columns: schema_version, method, t, metric, mean, se, n.
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// %.17g, the shortest form that round-trips every double.
std::string format_double(double v);

}  // namespace iurlse::cli

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace iurlse::cli {

/// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> replications;
    std::optional<std::string> method;
};

/// Writes <out>/<prefix>_trials.csv and <out>/<prefix>_summary.json.
/// Errors are thrown; the caller maps them to a nonzero exit status.
void cmd_run(const std::string& config_path, const Overrides& overrides, std::ostream& log);

/// Writes the oracle table to the configured path or <out>/oracle.json.
void cmd_oracle(const std::string& config_path, const Overrides& overrides, std::ostream& log);

/// Aggregates trial CSVs into the plotting report (stdout when out is empty).
void cmd_report(const std::vector<std::string>& inputs, const std::string& out, std::ostream& stdout_stream);

void cmd_list_benchmarks(std::ostream& out);

}  // namespace iurlse::cli

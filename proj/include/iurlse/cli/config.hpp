#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iurlse/benchlab.hpp"
#include "iurlse/engine.hpp"
#include "iurlse/error.hpp"

namespace iurlse::cli {

inline constexpr int kSchemaVersion = 1;

/// Parse or validation failure; the message starts with "file:line:col:".
struct ConfigError : ParameterError {
    using ParameterError::ParameterError;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string source;

    // [benchmark]
    std::string benchmark;
    Eigen::Index dim = 1;
    std::vector<double> coefficients;  ///< polynomial only
    std::optional<GridSpec> grid;      ///< polynomial only
    std::string data_path;             ///< ccpp only
    std::size_t data_rows = 9568;
    std::size_t train_rows = 7568;
    std::uint64_t split_seed = 0;
    std::size_t subsample = 0;  ///< 0 keeps every candidate
    std::uint64_t subsample_seed = 0;
    double threshold = 0.0;

    // [kernel]
    KernelSpec kernel;
    double noise_variance = 1e-4;

    // [distribution]
    InputDistribution truth;
    InputDistribution belief;
    bool belief_estimated = false;

    // [algorithm]
    AlgorithmConfig algorithm;

    // [run]
    std::uint64_t seed = 0;
    std::size_t replications = 1;
    double observation_noise_sd = 0.0;

    // [oracle]
    std::size_t oracle_samples = 100000;
    std::uint64_t oracle_seed = 0;
    std::string oracle_path;  ///< empty: the table is built in memory

    // [output]
    std::string out_dir = ".";
    std::string prefix;  ///< empty: the method name
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_string(const std::string& text, const std::string& source = "<string>");

/// Fully resolved settings, suitable for embedding in result metadata.
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const InputDistribution& dist);

/// Candidates, evaluator and the oracle identity of a configured benchmark.
struct ResolvedProblem {
    std::string name;
    PointSet candidates;
    BlackBox f;
    /// FNV-1a over the settings that determine p*: function, candidates,
    /// threshold and perturbation law.
    std::string hash;
};

ResolvedProblem resolve_problem(const ExperimentConfig& config);

/// Prior GP, true perturbation, learner belief and evaluator for one run.
Problem make_problem(const ExperimentConfig& config, const ResolvedProblem& resolved, const OracleTable* oracle);

}  // namespace iurlse::cli

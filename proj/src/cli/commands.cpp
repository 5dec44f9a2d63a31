#include "iurlse/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "iurlse/cli/config.hpp"
#include "iurlse/cli/results.hpp"

namespace iurlse::cli {

namespace {

namespace fs = std::filesystem;

ExperimentConfig load(const std::string& path, const Overrides& o) {
    ExperimentConfig c = parse_config_file(path);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    if (o.replications) {
        if (*o.replications < 1) throw ParameterError("--replications must be at least 1");
        c.replications = *o.replications;
    }
    if (o.method) c.algorithm.method = parse_method(*o.method);
    return c;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ParameterError("cannot write '" + p.string() + "'");
    return out;
}

OracleTable load_oracle(const ExperimentConfig& c, const ResolvedProblem& r) {
    std::ifstream in(c.oracle_path);
    if (!in) throw ParameterError("oracle file '" + c.oracle_path + "' not found; run 'iurlse oracle' first");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(c.oracle_path + ": " + e.what());
    }
    OracleTable t = oracle_from_json(j, c.oracle_path);
    if (t.benchmark_hash != r.hash)
        throw ParameterError(c.oracle_path + ": oracle was built for a different benchmark or perturbation");
    if (t.size() != static_cast<std::size_t>(r.candidates.cols()))
        throw ParameterError(c.oracle_path + ": oracle size does not match the candidate set");
    return t;
}

}  // namespace

void cmd_run(const std::string& config_path, const Overrides& overrides, std::ostream& log) {
    const ExperimentConfig c = load(config_path, overrides);
    const ResolvedProblem resolved = resolve_problem(c);
    OracleTable oracle;
    if (!c.oracle_path.empty()) {
        oracle = load_oracle(c, resolved);
    } else {
        log << "building oracle in memory (" << c.oracle_samples << " samples per candidate)\n";
        oracle = build_oracle(resolved.f, c.truth, resolved.candidates, c.threshold, c.oracle_samples, c.oracle_seed,
                              c.benchmark, resolved.hash);
    }
    const Problem problem = make_problem(c, resolved, &oracle);
    const ExperimentResult result =
        experiment(c.algorithm, [&](std::size_t, std::uint64_t) { return problem; }, c.replications, c.seed);

    const std::string prefix = c.prefix.empty() ? std::string(method_name(c.algorithm.method)) : c.prefix;
    const fs::path dir(c.out_dir);
    {
        std::ofstream out = open_out(dir / (prefix + "_trials.csv"));
        write_trials_csv(out, c.dim, to_rows(result, c.algorithm.method));
    }
    {
        std::ofstream out = open_out(dir / (prefix + "_summary.json"));
        out << summary_json(c, resolved, result).dump(2) << '\n';
    }
    for (const auto& r : result.runs)
        if (!r.ok()) log << "replication " << r.replication << " failed: " << r.error << '\n';
    log << "wrote " << (dir / (prefix + "_trials.csv")).string() << '\n';
}

void cmd_oracle(const std::string& config_path, const Overrides& overrides, std::ostream& log) {
    ExperimentConfig c = load(config_path, overrides);
    if (overrides.seed) c.oracle_seed = *overrides.seed;
    const ResolvedProblem resolved = resolve_problem(c);
    const OracleTable table = build_oracle(resolved.f, c.truth, resolved.candidates, c.threshold, c.oracle_samples,
                                           c.oracle_seed, c.benchmark, resolved.hash);
    const fs::path path = c.oracle_path.empty() || overrides.out ? fs::path(c.out_dir) / "oracle.json"
                                                                 : fs::path(c.oracle_path);
    std::ofstream out = open_out(path);
    out << oracle_json(table).dump() << '\n';
    log << "wrote " << path.string() << " (" << table.size() << " candidates)\n";
}

void cmd_report(const std::vector<std::string>& inputs, const std::string& out, std::ostream& stdout_stream) {
    if (inputs.empty()) throw ParameterError("report needs at least one result file");
    std::vector<std::vector<ResultRow>> rows;
    for (const auto& path : inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParameterError("cannot open '" + path + "'");
        rows.push_back(read_trials_csv(in, path));
    }
    const auto report = aggregate_report(rows);
    if (out.empty()) {
        write_report_csv(stdout_stream, report);
    } else {
        std::ofstream f = open_out(out);
        write_report_csv(f, report);
    }
}

void cmd_list_benchmarks(std::ostream& out) {
    for (const auto& name : benchmark_names()) {
        const BenchmarkFunction bf = make_benchmark(name);
        out << name << "\td=" << bf.dim << "\tcandidates=" << bf.grid.point_count() << "\th=" << bf.threshold << '\t'
            << bf.description << '\n';
    }
    out << "polynomial\td=1\tuser grid\tcoefficients c0 + c1 x + ...\n";
    out << "ccpp\td=4\tGP-mean surrogate of the power plant data (CSV AT,V,AP,RH,PE)\n";
}

}  // namespace iurlse::cli

#include "iurlse/cli/results.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace iurlse::cli {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<ResultRow> to_rows(const ExperimentResult& result, Method method) {
    std::vector<ResultRow> rows;
    for (const auto& run : result.runs) {
        if (!run.result) continue;
        for (const auto& rec : run.result->trials) {
            ResultRow row;
            row.run_id = run.replication;
            row.seed = run.seed;
            row.t = rec.t;
            row.method = std::string(method_name(method));
            row.metrics = rec.metrics;
            row.n_h = rec.n_h;
            row.n_l = rec.n_l;
            row.n_u = rec.n_u;
            if (rec.evaluated) {
                row.x.assign(rec.x.data(), rec.x.data() + rec.x.size());
                row.y = rec.y;
            }
            row.explore = rec.explore;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_trials_csv(std::ostream& out, Eigen::Index dim, const std::vector<ResultRow>& rows) {
    out << "schema_version,run_id,seed,t,method,f1,precision,recall,n_h,n_l,n_u";
    for (Eigen::Index k = 0; k < dim; ++k) out << ",x" << k;
    out << ",y,explore\r\n";
    for (const auto& r : rows) {
        out << r.schema_version << ',' << r.run_id << ',' << r.seed << ',' << r.t << ',' << r.method << ',';
        if (r.metrics)
            out << format_double(r.metrics->f1) << ',' << format_double(r.metrics->precision) << ','
                << format_double(r.metrics->recall);
        else
            out << ",,";
        out << ',' << r.n_h << ',' << r.n_l << ',' << r.n_u;
        for (Eigen::Index k = 0; k < dim; ++k) {
            out << ',';
            if (static_cast<std::size_t>(k) < r.x.size()) out << format_double(r.x[static_cast<std::size_t>(k)]);
        }
        out << ',';
        if (r.y) out << format_double(*r.y);
        out << ',' << (r.explore ? 1 : 0) << "\r\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

template <typename T>
T parse_cell(const std::string& cell, const std::string& where) {
    T v{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParameterError(where + ": malformed value '" + cell + "'");
    return v;
}

}  // namespace

std::vector<ResultRow> read_trials_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParameterError(source + ": empty result file");
    const auto header = split_csv_line(line);
    const std::vector<std::string> lead{"schema_version", "run_id", "seed", "t",   "method", "f1",
                                        "precision",      "recall", "n_h",  "n_l", "n_u"};
    if (header.size() < lead.size() + 2 || !std::equal(lead.begin(), lead.end(), header.begin()) ||
        header[header.size() - 2] != "y" || header.back() != "explore")
        throw ParameterError(source + ":1: schema mismatch: unexpected trial CSV header");
    const std::size_t dim = header.size() - lead.size() - 2;
    for (std::size_t k = 0; k < dim; ++k)
        if (header[lead.size() + k] != "x" + std::to_string(k))
            throw ParameterError(source + ":1: schema mismatch: unexpected column '" + header[lead.size() + k] + "'");

    std::vector<ResultRow> rows;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        const std::string where = source + ":" + std::to_string(lineno);
        if (cells.size() != header.size()) throw ParameterError(where + ": wrong number of columns");
        ResultRow r;
        r.schema_version = parse_cell<int>(cells[0], where);
        if (r.schema_version != kSchemaVersion)
            throw ParameterError(where + ": schema_version mismatch (found " + cells[0] + ", expected " +
                                 std::to_string(kSchemaVersion) + ")");
        r.run_id = parse_cell<std::size_t>(cells[1], where);
        r.seed = parse_cell<std::uint64_t>(cells[2], where);
        r.t = parse_cell<std::size_t>(cells[3], where);
        r.method = cells[4];
        if (!cells[5].empty())
            r.metrics = Metrics{parse_cell<double>(cells[5], where), parse_cell<double>(cells[6], where),
                                parse_cell<double>(cells[7], where), false};
        r.n_h = parse_cell<std::size_t>(cells[8], where);
        r.n_l = parse_cell<std::size_t>(cells[9], where);
        r.n_u = parse_cell<std::size_t>(cells[10], where);
        for (std::size_t k = 0; k < dim; ++k)
            if (!cells[11 + k].empty()) r.x.push_back(parse_cell<double>(cells[11 + k], where));
        if (!cells[11 + dim].empty()) r.y = parse_cell<double>(cells[11 + dim], where);
        r.explore = parse_cell<int>(cells[12 + dim], where) != 0;
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

nlohmann::json indices_with(const ClassificationState& state, Label label) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < state.labels.size(); ++i)
        if (state.labels[i] == label) out.push_back(i);
    return out;
}

nlohmann::json series_json(const std::vector<SeriesStat>& s) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < s.size(); ++i)
        out.push_back({{"t", i + 1}, {"mean", s[i].mean}, {"se", s[i].se}, {"n", s[i].n}});
    return out;
}

}  // namespace

nlohmann::json summary_json(const ExperimentConfig& config, const ResolvedProblem& resolved,
                            const ExperimentResult& result) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : result.runs) {
        nlohmann::json j{{"run_id", r.replication}, {"seed", r.seed}, {"ok", r.ok()}};
        if (!r.error.empty()) j["error"] = r.error;
        if (r.result) {
            const RunResult& rr = *r.result;
            j["termination"] = std::string(stop_reason_name(rr.reason));
            j["trials"] = rr.trials.size();
            j["initial_evaluations"] = rr.initial_evaluations;
            j["terminal"] = {{"H", indices_with(rr.terminal, Label::H)},
                             {"L", indices_with(rr.terminal, Label::L)},
                             {"U", indices_with(rr.terminal, Label::U)}};
            if (!rr.trials.empty() && rr.trials.back().metrics) {
                const Metrics& m = *rr.trials.back().metrics;
                j["final_metrics"] = {{"f1", m.f1},
                                      {"precision", m.precision},
                                      {"recall", m.recall},
                                      {"recall_undefined", m.recall_undefined}};
            }
        }
        runs.push_back(std::move(j));
    }
    return {{"schema_version", kSchemaVersion},
            {"config", to_json(config)},
            {"benchmark_hash", resolved.hash},
            {"candidates", resolved.candidates.cols()},
            {"runs", runs},
            {"failed", result.failed},
            {"aggregate",
             {{"f1", series_json(result.series.f1)},
              {"precision", series_json(result.series.precision)},
              {"recall", series_json(result.series.recall)}}}};
}

nlohmann::json oracle_json(const OracleTable& table) {
    return {{"schema_version", kSchemaVersion},
            {"benchmark", table.benchmark},
            {"benchmark_hash", table.benchmark_hash},
            {"N", table.samples},
            {"seed", table.seed},
            {"p_star", table.p_star}};
}

OracleTable oracle_from_json(const nlohmann::json& j, const std::string& source) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw ParameterError(source + ": oracle schema_version mismatch");
        OracleTable t;
        t.benchmark = j.at("benchmark").get<std::string>();
        t.benchmark_hash = j.at("benchmark_hash").get<std::string>();
        t.samples = j.at("N").get<std::size_t>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.p_star = j.at("p_star").get<std::vector<double>>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(source + ": malformed oracle file: " + e.what());
    }
}

std::vector<ReportRow> aggregate_report(const std::vector<std::vector<ResultRow>>& inputs) {
    // method -> run key -> metric series (0: f1, 1: precision, 2: recall)
    using Series = std::array<std::vector<double>, 3>;
    std::map<std::string, std::map<std::pair<std::size_t, std::size_t>, Series>> groups;
    for (std::size_t f = 0; f < inputs.size(); ++f) {
        for (const auto& row : inputs[f]) {
            auto& method = groups[row.method];
            if (!row.metrics) continue;
            Series& s = method[{f, row.run_id}];
            s[0].push_back(row.metrics->f1);
            s[1].push_back(row.metrics->precision);
            s[2].push_back(row.metrics->recall);
        }
    }
    static const char* const names[3] = {"f1", "precision", "recall"};
    std::vector<ReportRow> out;
    for (const auto& [method, runs] : groups) {
        for (int m = 0; m < 3; ++m) {
            std::vector<std::vector<double>> per_run;
            for (const auto& [key, series] : runs) per_run.push_back(series[static_cast<std::size_t>(m)]);
            const auto stats = aggregate_series(per_run);
            for (std::size_t t = 0; t < stats.size(); ++t) out.push_back({method, t + 1, names[m], stats[t]});
        }
    }
    return out;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "schema_version,method,t,metric,mean,se,n\r\n";
    for (const auto& r : rows)
        out << kSchemaVersion << ',' << r.method << ',' << r.t << ',' << r.metric << ',' << format_double(r.stat.mean)
            << ',' << format_double(r.stat.se) << ',' << r.stat.n << "\r\n";
}

}  // namespace iurlse::cli

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iurlse/cli/commands.hpp"
#include "iurlse/cli/config.hpp"
#include "iurlse/cli/results.hpp"

namespace fs = std::filesystem;
using namespace iurlse;
using namespace iurlse::cli;

namespace {

const std::string kCli = IURLSE_CLI_PATH;
const std::string kBundled = std::string(IURLSE_SOURCE_DIR) + "/configs/quartic_case2.toml";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("iurlse_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string minimal_config(const std::string& algorithm_extra = "", const std::string& extra = "") {
    return "schema_version = 1\n"
           "[benchmark]\nname = \"quartic\"\n"
           "[distribution.truth]\ntype = \"case2\"\n"
           "[algorithm]\nmethod = \"straddle\"\nmax_trials = 3\nquadrature_nodes = 100\n" +
           algorithm_extra +
           "[run]\nseed = 4\nreplications = 1\n"
           "[oracle]\nsamples = 1000\nseed = 2\n" +
           extra;
}

std::vector<ResultRow> rows_from(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return read_trials_csv(in, p.string());
}

}  // namespace

TEST_CASE("run: bundled config writes one row per replication and trial") {
    const fs::path out = scratch("bundled");
    const std::string cmd = kCli + " run --config " + kBundled + " --out " + out.string() + " 2>/dev/null";
    REQUIRE(shell(cmd) == 0);
    const auto rows = rows_from(out / "proposed_trials.csv");
    CHECK(rows.size() == 20);
    const auto summary = nlohmann::json::parse(slurp(out / "proposed_summary.json"));
    CHECK(summary["runs"].size() == 2);
    CHECK(summary.contains("config"));
    CHECK(summary["config"]["run"]["seed"] == 1);
    const std::string first = slurp(out / "proposed_trials.csv");
    REQUIRE(shell(cmd) == 0);
    CHECK(slurp(out / "proposed_trials.csv") == first);
    CHECK(first.find("\r\n") != std::string::npos);
}

TEST_CASE("run: summary alone reproduces the run") {
    const fs::path out = scratch("replay");
    spit(out / "a.toml", minimal_config());
    Overrides o;
    o.out = (out / "first").string();
    std::ostringstream log;
    cmd_run((out / "a.toml").string(), o, log);
    const auto summary = nlohmann::json::parse(slurp(out / "first" / "straddle_summary.json"));
    const ExperimentConfig c = parse_config_file((out / "a.toml").string());
    CHECK(summary["config"] == to_json(c));
    CHECK(summary["runs"][0]["seed"].get<std::uint64_t>() == replication_seed(4, 0));
}

TEST_CASE("run: invalid settings exit nonzero with a located message") {
    const fs::path out = scratch("invalid");
    spit(out / "alpha.toml", minimal_config("alpha = 1.2\n"));
    CHECK(shell(kCli + " run --config " + (out / "alpha.toml").string() + " --out " + out.string() + " 2>" +
                (out / "err.txt").string()) != 0);
    CHECK(slurp(out / "err.txt").find("alpha out of range") != std::string::npos);
    CHECK_THROWS_WITH_AS(parse_config_string(minimal_config("alpha = 1.2\n"), "x.toml"),
                         doctest::Contains("alpha out of range"), ConfigError);

    try {
        parse_config_string(minimal_config("colour = \"red\"\n"), "x.toml");
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.rfind("x.toml:10:1:", 0) == 0);
        CHECK(msg.find("colour") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_string("schema_version = 2\n" + minimal_config().substr(19)), ConfigError);
    CHECK_THROWS_AS(parse_config_string("schema_version = 1\n[benchmark]\nname = \"quartic\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("schema_version = 1\n[benchmark\n"), ConfigError);
}

TEST_CASE("run: missing oracle file exits nonzero") {
    const fs::path out = scratch("missing");
    spit(out / "c.toml", minimal_config("", "path = \"nowhere/oracle.json\"\n"));
    CHECK(shell(kCli + " run --config " + (out / "c.toml").string() + " --out " + out.string() + " 2>" +
                (out / "err.txt").string()) != 0);
    CHECK(slurp(out / "err.txt").find("not found") != std::string::npos);
}

TEST_CASE("oracle: schema, value range and determinism") {
    const fs::path out = scratch("oracle");
    spit(out / "one.toml", minimal_config("", "").replace(minimal_config().find("samples = 1000"), 14, "samples = 1"));
    REQUIRE(shell(kCli + " oracle --config " + (out / "one.toml").string() + " --out " + (out / "n1").string() +
                  " 2>/dev/null") == 0);
    const auto one = nlohmann::json::parse(slurp(out / "n1" / "oracle.json"));
    CHECK(one["N"] == 1);
    for (const auto& v : one["p_star"]) CHECK((v.get<double>() == 0.0 || v.get<double>() == 1.0));

    REQUIRE(shell(kCli + " oracle --config " + kBundled + " --out " + (out / "a").string() + " 2>/dev/null") == 0);
    REQUIRE(shell(kCli + " oracle --config " + kBundled + " --out " + (out / "b").string() + " 2>/dev/null") == 0);
    const std::string a = slurp(out / "a" / "oracle.json");
    CHECK(a == slurp(out / "b" / "oracle.json"));
    const auto j = nlohmann::json::parse(a);
    CHECK(j["N"] == 100000);
    CHECK(j["schema_version"] == 1);
    REQUIRE(j["p_star"].size() == 41);
    for (const auto& v : j["p_star"]) {
        CHECK(v.get<double>() >= 0.0);
        CHECK(v.get<double>() <= 1.0);
    }
    CHECK(oracle_from_json(j, "a").p_star.size() == 41);
}

TEST_CASE("run: a stored oracle is used and checked against the benchmark") {
    const fs::path out = scratch("stored");
    spit(out / "c.toml", minimal_config("", "path = \"oracle.json\"\n"));
    Overrides none;
    std::ostringstream log;
    cmd_oracle((out / "c.toml").string(), none, log);
    REQUIRE(fs::exists(out / "oracle.json"));
    CHECK_NOTHROW(cmd_run((out / "c.toml").string(), none, log));
    auto j = nlohmann::json::parse(slurp(out / "oracle.json"));
    j["benchmark_hash"] = "0000";
    spit(out / "oracle.json", j.dump());
    CHECK_THROWS(cmd_run((out / "c.toml").string(), none, log));
}

TEST_CASE("report: aggregation conventions") {
    const fs::path out = scratch("report");
    spit(out / "c.toml", minimal_config());
    std::ostringstream log;
    Overrides o;
    o.out = out.string();
    cmd_run((out / "c.toml").string(), o, log);
    o.method = "random";
    cmd_run((out / "c.toml").string(), o, log);

    const auto rows = rows_from(out / "straddle_trials.csv");
    std::ostringstream single;
    cmd_report({(out / "straddle_trials.csv").string()}, "", single);
    std::istringstream lines(single.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line.rfind("schema_version,method,t,metric,mean,se,n", 0) == 0);
    std::size_t f1_rows = 0;
    while (std::getline(lines, line)) {
        if (line.find(",f1,") == std::string::npos) continue;
        ++f1_rows;
        CHECK(line.find(",0,1") != std::string::npos);  // se = 0, n = 1
    }
    CHECK(f1_rows == rows.size());

    // Two copies of one run: se stays zero.
    const auto twice = aggregate_report({rows, rows});
    for (const auto& r : twice) {
        CHECK(r.stat.se == 0.0);
        CHECK(r.stat.n == 2);
    }

    const auto mixed = aggregate_report({rows, rows_from(out / "random_trials.csv")});
    std::vector<std::string> methods;
    for (const auto& r : mixed)
        if (methods.empty() || methods.back() != r.method) methods.push_back(r.method);
    CHECK(methods == std::vector<std::string>{"random", "straddle"});

    CHECK(shell(kCli + " report " + (out / "straddle_trials.csv").string() + " " +
                (out / "random_trials.csv").string() + " --out " + (out / "report.csv").string()) == 0);
    CHECK(fs::exists(out / "report.csv"));

    std::string bad = slurp(out / "straddle_trials.csv");
    const auto pos = bad.find("\r\n1,");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 4, "\r\n2,");
    spit(out / "bad.csv", bad);
    std::ostringstream sink;
    CHECK_THROWS_WITH(cmd_report({(out / "bad.csv").string()}, "", sink), doctest::Contains("schema_version"));
}

TEST_CASE("results: CSV round-trip") {
    ResultRow r;
    r.run_id = 3;
    r.seed = 18446744073709551615ULL;
    r.t = 7;
    r.method = "mile";
    r.metrics = Metrics{0.1, 1.0 / 3.0, 0.2, false};
    r.n_h = 1, r.n_l = 2, r.n_u = 3;
    r.x = {0.1, -2.5};
    r.y = 1e-300;
    r.explore = true;
    ResultRow empty = r;
    empty.x.clear();
    empty.y.reset();
    empty.t = 8;
    std::ostringstream out;
    write_trials_csv(out, 2, {r, empty});
    std::istringstream in(out.str());
    const auto back = read_trials_csv(in, "mem");
    REQUIRE(back.size() == 2);
    CHECK(back[0].seed == r.seed);
    CHECK(back[0].metrics->precision == 1.0 / 3.0);
    CHECK(back[0].x == r.x);
    CHECK(*back[0].y == 1e-300);
    CHECK(back[0].explore);
    CHECK(back[1].x.empty());
    CHECK(!back[1].y.has_value());
}

TEST_CASE("list-benchmarks names every built-in") {
    std::ostringstream out;
    cmd_list_benchmarks(out);
    for (const char* name : {"quartic", "sinusoidal", "himmelblau"}) CHECK(out.str().find(name) != std::string::npos);
}

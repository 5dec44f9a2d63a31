#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iurlse/benchlab.hpp"
#include "iurlse/engine.hpp"
#include "iurlse/error.hpp"
#include "iurlse/rng.hpp"

using namespace iurlse;

namespace {

Problem quartic_problem(bool case1, double noise_sd = 0.01) {
    const BenchmarkFunction bf = quartic();
    const InputDistribution dist = case1 ? bf.case1 : bf.case2;
    return Problem{GpPosterior(bf.kernel, bf.noise_variance, 1), dist, dist, make_grid(bf.grid), bf.f,
                   bf.threshold, noise_sd, nullptr};
}

AlgorithmConfig fast_config(Method m, std::uint64_t seed, std::size_t trials) {
    AlgorithmConfig c;
    c.method = m;
    c.seed = seed;
    c.max_trials = trials;
    c.quadrature_nodes = 200;
    c.outer_nodes = 16;
    return c;
}

std::string serialize(const RunResult& r) {
    std::ostringstream out;
    char buf[512];
    for (const TrialRecord& t : r.trials) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%d,%td,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%zu\n", t.t, t.evaluated ? 1 : 0,
                      t.explore ? 1 : 0, static_cast<std::ptrdiff_t>(t.chosen), t.evaluated ? t.x[0] : 0.0,
                      t.evaluated ? t.s[0] : 0.0, t.y, t.acquisition_score, t.n_h, t.n_l, t.n_u);
        out << buf;
    }
    out << stop_reason_name(r.reason) << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("select_point examples") {
    CHECK(select_point(std::vector<double>{4.0}) == 0);
    CHECK(select_point(std::vector<double>{1.0, 2.0, 3.0, 4.0}) == 3);
    CHECK(select_point(std::vector<double>{1.0, 5.0, 5.0, 2.0}) == 1);
    CHECK(select_point(std::vector<double>{1.0, 5.0, 5.0 + 5e-10}) == 1);
    CHECK_THROWS_AS(select_point(std::vector<double>{}), ParameterError);
}

TEST_CASE("stopping examples") {
    AlgorithmConfig c;
    c.max_trials = 10;
    ClassificationState empty;
    empty.n_h = 3;
    ClassificationState open;
    open.n_u = 2;
    CHECK(stopping(empty, 3, c) == StopReason::EmptyUnclassified);
    CHECK(stopping(open, 10, c) == StopReason::Budget);
    CHECK(stopping(open, 4, c) == StopReason::None);
    c.stop_on_empty_u = false;
    CHECK(stopping(empty, 3, c) == StopReason::None);
}

TEST_CASE("run: a budget of one trial gives one record") {
    const RunResult r = run(fast_config(Method::Proposed, 1, 1), quartic_problem(false));
    REQUIRE(r.trials.size() == 1);
    CHECK(r.reason == StopReason::Budget);
    CHECK(r.initial_evaluations == 1);
}

TEST_CASE("run: pure exploration follows the seeded uniform sequence") {
    const Problem p = quartic_problem(true);
    const auto n = static_cast<std::uint64_t>(p.candidates.cols());
    std::vector<Eigen::Index> expected;
    for (std::size_t t = 1; t <= 12; ++t) {
        auto s = rng::stream(5, rng::Purpose::Explore, t);
        (void)rng::uniform01(s);
        expected.push_back(static_cast<Eigen::Index>(rng::uniform_index(s, n)));
    }
    for (Method m : {Method::Proposed, Method::Straddle, Method::Mile, Method::Random}) {
        AlgorithmConfig c = fast_config(m, 5, 12);
        c.exploration.p = 1.0;
        c.stop_on_empty_u = false;
        const RunResult r = run(c, p);
        REQUIRE(r.trials.size() == 12);
        for (std::size_t t = 0; t < 12; ++t) {
            CHECK(r.trials[t].explore);
            CHECK(r.trials[t].chosen == expected[t]);
        }
    }
}

TEST_CASE("run: explore rate matches the configured probability") {
    AlgorithmConfig c = fast_config(Method::Random, 77, 400);
    c.quadrature_nodes = 1;
    c.exploration.p = 0.3;
    c.stop_on_empty_u = false;
    const RunResult r = run(c, quartic_problem(false));
    REQUIRE(r.trials.size() == 400);
    double explored = 0.0;
    for (const auto& t : r.trials) explored += t.explore ? 1.0 : 0.0;
    const double rate = explored / 400.0;
    CHECK(std::abs(rate - 0.3) <= 3.0 * std::sqrt(0.3 * 0.7 / 400.0));
}

TEST_CASE("run: harmonic schedule") {
    ExplorationSchedule s{ExplorationSchedule::Kind::Harmonic, 0.5};
    CHECK(s.at(1) == 0.5);
    CHECK(s.at(5) == 0.1);
    ExplorationSchedule big{ExplorationSchedule::Kind::Harmonic, 3.0};
    CHECK(big.at(2) == 1.0);
}

TEST_CASE("run: records are consistent with the problem") {
    const Problem p = quartic_problem(false, 0.0);
    AlgorithmConfig c = fast_config(Method::Proposed, 9, 8);
    const RunResult r = run(c, p);
    REQUIRE(!r.trials.empty());
    for (const auto& t : r.trials) {
        CHECK(t.n_h + t.n_l + t.n_u == static_cast<std::size_t>(p.candidates.cols()));
        if (t.evaluated) {
            CHECK(t.y == p.f(t.s));
            CHECK(t.x == p.candidates.col(t.chosen));
        }
    }
    CHECK(r.terminal.n_u == r.trials.back().n_u);
    CHECK(r.terminal.n_h == r.trials.back().n_h);
}

TEST_CASE("run: same config and seed reproduce the run bitwise") {
    for (bool case1 : {true, false}) {
        const Problem p = quartic_problem(case1);
        AlgorithmConfig c = fast_config(Method::Proposed, 31, 10);
        c.exploration.p = 0.2;
        const std::string a = serialize(run(c, p));
        const std::string b = serialize(run(c, p));
        CHECK(a == b);
        c.seed = 32;
        CHECK(serialize(run(c, p)) != a);
    }
}

TEST_CASE("run: estimated input law runs end to end") {
    const BenchmarkFunction bf = quartic();
    EstimatedShift est;
    est.dim = 1;
    est.base = BaseFamily::Normal;
    est.xi = NormalMeanKnownVar{0.0, 0.8 * 0.8, 0.16};
    const InputDistribution truth = GaussianShift{Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, 0.4)};
    const Problem p{GpPosterior(bf.kernel, bf.noise_variance, 1), truth, est, make_grid(bf.grid), bf.f,
                    bf.threshold, 0.01, nullptr};
    const RunResult r = run(fast_config(Method::Proposed, 4, 5), p);
    CHECK(r.trials.size() == 5);
}

TEST_CASE("run: invalid settings are rejected") {
    AlgorithmConfig c = fast_config(Method::Proposed, 1, 5);
    c.alpha = 1.2;
    CHECK_THROWS_WITH_AS(run(c, quartic_problem(false)), doctest::Contains("alpha out of range"), ParameterError);
    c = fast_config(Method::Proposed, 1, 0);
    CHECK_THROWS_AS(run(c, quartic_problem(false)), ParameterError);
    c = fast_config(Method::Proposed, 1, 5);
    c.exploration.p = 1.5;
    CHECK_THROWS_AS(run(c, quartic_problem(false)), ParameterError);
}

TEST_CASE("run: golden record stream") {
    const Problem p = quartic_problem(false);
    AlgorithmConfig c;
    c.method = Method::Proposed;
    c.alpha = 0.95;
    c.epsilon = 0.0;
    c.beta_sqrt = 3.0;
    c.seed = 2024;
    c.max_trials = 12;
    const std::string got = serialize(run(c, p));
    const std::string path = std::string(IURLSE_SOURCE_DIR) + "/tests/fixtures/golden_quartic_case2.txt";
    if (std::getenv("IURLSE_REGENERATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << got;
    }
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream want;
    want << in.rdbuf();
    CHECK(got == want.str());
}

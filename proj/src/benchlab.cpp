#include "iurlse/benchlab.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "iurlse/error.hpp"
#include "iurlse/parallel.hpp"
#include "iurlse/rng.hpp"

namespace iurlse {

std::size_t GridSpec::point_count() const {
    std::size_t n = 1;
    for (int d : divisions) n *= static_cast<std::size_t>(d + 1);
    return n;
}

PointSet make_grid(const GridSpec& grid) {
    const Eigen::Index d = grid.dim();
    if (d < 1 || grid.upper.size() != d || static_cast<Eigen::Index>(grid.divisions.size()) != d)
        throw ParameterError("grid needs lower, upper and divisions for every axis");
    for (Eigen::Index k = 0; k < d; ++k) {
        if (grid.divisions[static_cast<std::size_t>(k)] < 1) throw ParameterError("grid divisions must be at least 1");
        if (!(grid.upper[k] > grid.lower[k])) throw ParameterError("grid upper bound must exceed lower bound");
    }
    const auto n = static_cast<Eigen::Index>(grid.point_count());
    PointSet out(d, n);
    std::vector<int> index(static_cast<std::size_t>(d), 0);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const int div = grid.divisions[static_cast<std::size_t>(k)];
            const int i = index[static_cast<std::size_t>(k)];
            // Endpoints exactly, interior by linear interpolation.
            out(k, j) = i == div ? grid.upper[k]
                                 : grid.lower[k] + (grid.upper[k] - grid.lower[k]) * static_cast<double>(i) / div;
        }
        for (Eigen::Index k = d - 1; k >= 0; --k) {
            auto& i = index[static_cast<std::size_t>(k)];
            if (++i <= grid.divisions[static_cast<std::size_t>(k)]) break;
            i = 0;
        }
    }
    return out;
}

double eval_function(const BenchmarkFunction& bf, const Eigen::Ref<const Eigen::VectorXd>& s) {
    return bf.f(s);
}

namespace {

GridSpec grid_1d(double lo, double hi, int div) {
    GridSpec g;
    g.lower = Eigen::VectorXd::Constant(1, lo);
    g.upper = Eigen::VectorXd::Constant(1, hi);
    g.divisions = {div};
    return g;
}

GridSpec grid_2d(double lo0, double hi0, int div0, double lo1, double hi1, int div1) {
    GridSpec g;
    g.lower = Eigen::Vector2d(lo0, lo1);
    g.upper = Eigen::Vector2d(hi0, hi1);
    g.divisions = {div0, div1};
    return g;
}

InputDistribution gamma_case(Eigen::Index d, double shape, double scale) {
    return GammaShift{Eigen::VectorXd::Constant(d, shape), Eigen::VectorXd::Constant(d, scale)};
}

InputDistribution normal_case(Eigen::Index d, double sd) {
    return GaussianShift{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, sd)};
}

}  // namespace

BenchmarkFunction quartic() {
    BenchmarkFunction bf;
    bf.name = "quartic";
    bf.dim = 1;
    bf.grid = grid_1d(-0.5, 5.5, 40);
    bf.f = [](const Eigen::Ref<const Eigen::VectorXd>& s) {
        const double x = s[0];
        return 3.0 - 40.0 * x + 38.0 * x * x - 11.0 * x * x * x + x * x * x * x;
    };
    bf.kernel = {100.0, 0.5};
    bf.noise_variance = 1e-4;
    bf.threshold = 8.0;
    bf.case1 = gamma_case(1, 5.0, 0.03);
    bf.case2 = normal_case(1, 0.07);
    bf.description = "3 - 40x + 38x^2 - 11x^3 + x^4";
    return bf;
}

BenchmarkFunction sinusoidal() {
    BenchmarkFunction bf;
    bf.name = "sinusoidal";
    bf.dim = 2;
    bf.grid = grid_2d(0.0, 1.0, 30, 0.0, 2.0, 60);
    bf.f = [](const Eigen::Ref<const Eigen::VectorXd>& s) {
        return -std::sin(10.0 * s[0]) - std::cos(4.0 * s[1]) + std::cos(3.0 * s[0] * s[1]);
    };
    bf.kernel = {std::exp(2.0), 2.0 * std::exp(-3.0)};
    bf.noise_variance = 1e-4;
    bf.threshold = -0.5;
    bf.case1 = gamma_case(2, 5.0, 0.03);
    bf.case2 = normal_case(2, 0.07);
    bf.description = "-sin(10 x1) - cos(4 x2) + cos(3 x1 x2)";
    return bf;
}

BenchmarkFunction himmelblau() {
    BenchmarkFunction bf;
    bf.name = "himmelblau";
    bf.dim = 2;
    bf.grid = grid_2d(-5.0, 5.0, 50, -5.0, 5.0, 50);
    bf.f = [](const Eigen::Ref<const Eigen::VectorXd>& s) {
        const double a = s[0] * s[0] + s[1] - 11.0;
        const double b = s[0] + s[1] * s[1] - 7.0;
        return a * a + b * b - 100.0;
    };
    bf.kernel = {std::exp(8.0), 2.0};
    bf.noise_variance = 1e-4;
    bf.threshold = 0.0;
    bf.case1 = gamma_case(2, 5.0, 0.15);
    bf.case2 = normal_case(2, 0.5);
    bf.description = "(x1^2 + x2 - 11)^2 + (x1 + x2^2 - 7)^2 - 100";
    return bf;
}

BenchmarkFunction polynomial(std::vector<double> coefficients, GridSpec grid, KernelSpec kernel,
                             double noise_variance, double threshold) {
    if (coefficients.empty()) throw ParameterError("polynomial needs at least one coefficient");
    if (grid.dim() != 1) throw ParameterError("polynomial benchmark is one-dimensional");
    BenchmarkFunction bf;
    bf.name = "polynomial";
    bf.dim = 1;
    bf.grid = std::move(grid);
    std::string desc;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.17g x^%zu", i ? " + " : "", coefficients[i], i);
        desc += buf;
    }
    bf.f = [c = std::move(coefficients)](const Eigen::Ref<const Eigen::VectorXd>& s) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s[0] + *it;
        return acc;
    };
    bf.kernel = kernel;
    bf.noise_variance = noise_variance;
    bf.threshold = threshold;
    bf.case1 = gamma_case(1, 5.0, 0.03);
    bf.case2 = normal_case(1, 0.07);
    bf.description = desc;
    return bf;
}

std::vector<std::string> benchmark_names() {
    return {"quartic", "sinusoidal", "himmelblau"};
}

BenchmarkFunction make_benchmark(std::string_view name) {
    if (name == "quartic") return quartic();
    if (name == "sinusoidal") return sinusoidal();
    if (name == "himmelblau") return himmelblau();
    throw ParameterError("unknown benchmark '" + std::string(name) + "'");
}

BlackBox gp_prior_draw(const KernelSpec& kernel, Eigen::Index dim, std::uint64_t seed, std::size_t features) {
    kernel.validate();
    if (features < 1) throw ParameterError("need at least one random feature");
    auto stream = rng::stream(seed, rng::Purpose::Truth);
    const auto j = static_cast<Eigen::Index>(features);
    // Spectral density of exp(-|r|^2 / L) is N(0, (2 / L) I).
    std::normal_distribution<double> normal(0.0, 1.0);
    auto freq = std::make_shared<Eigen::MatrixXd>(j, dim);
    auto phase = std::make_shared<Eigen::VectorXd>(j);
    auto weight = std::make_shared<Eigen::VectorXd>(j);
    const double freq_sd = std::sqrt(2.0 / kernel.length_scale);
    for (Eigen::Index r = 0; r < j; ++r) {
        for (Eigen::Index k = 0; k < dim; ++k) (*freq)(r, k) = freq_sd * normal(stream);
        (*phase)[r] = 2.0 * std::numbers::pi * rng::uniform01(stream);
        (*weight)[r] = normal(stream);
    }
    const double amplitude = std::sqrt(2.0 * kernel.signal_variance / static_cast<double>(features));
    return [freq, phase, weight, amplitude](const Eigen::Ref<const Eigen::VectorXd>& s) {
        const Eigen::VectorXd arg = (*freq) * s + *phase;
        return amplitude * weight->dot(arg.array().cos().matrix());
    };
}

double oracle_p_star(const BlackBox& f, const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
                     double h, std::size_t samples, std::uint64_t seed, std::uint64_t candidate) {
    if (samples < 1) throw ParameterError("oracle needs at least one sample");
    auto stream = rng::stream(seed, rng::Purpose::Oracle, candidate);
    // Chunked so memory stays bounded for large sample counts.
    constexpr std::size_t kChunk = 4096;
    std::size_t below = 0;
    for (std::size_t done = 0; done < samples; done += kChunk) {
        const std::size_t m = std::min(kChunk, samples - done);
        const PointSet s = sample(dist, x, stream, m);
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            if (f(s.col(j)) < h) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(samples);
}

OracleTable build_oracle(const BlackBox& f, const InputDistribution& dist, const PointSet& candidates, double h,
                         std::size_t samples, std::uint64_t seed, std::string benchmark_name,
                         std::string benchmark_hash) {
    OracleTable table;
    table.samples = samples;
    table.seed = seed;
    table.benchmark = std::move(benchmark_name);
    table.benchmark_hash = std::move(benchmark_hash);
    table.p_star.resize(static_cast<std::size_t>(candidates.cols()));
    parallel_for(table.p_star.size(), [&](std::size_t i) {
        table.p_star[i] = oracle_p_star(f, dist, candidates.col(static_cast<Eigen::Index>(i)), h, samples, seed, i);
    });
    return table;
}

std::vector<bool> OracleTable::upper_set(double alpha) const {
    std::vector<bool> out(p_star.size());
    for (std::size_t i = 0; i < p_star.size(); ++i) out[i] = p_star[i] > alpha;
    return out;
}

Metrics compute_metrics(const ClassificationState& state, std::span<const double> p_star, double alpha) {
    if (state.size() != p_star.size()) throw ParameterError("truth table and classification differ in size");
    std::size_t predicted = 0, actual = 0, hits = 0;
    for (std::size_t i = 0; i < p_star.size(); ++i) {
        const bool pred = state.labels[i] == Label::H;
        const bool truth = p_star[i] > alpha;
        predicted += pred;
        actual += truth;
        hits += pred && truth;
    }
    Metrics m;
    m.precision = predicted == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(predicted);
    if (actual == 0) {
        m.recall = 1.0;
        m.recall_undefined = true;
    } else {
        m.recall = static_cast<double>(hits) / static_cast<double>(actual);
    }
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace iurlse

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "iurlse/engine.hpp"
#include "iurlse/gp.hpp"
#include "iurlse/input_models.hpp"
#include "iurlse/metrics.hpp"

namespace iurlse {

/// Axis-aligned box where axis k is divided into divisions[k] intervals,
/// giving divisions[k] + 1 equispaced points including both endpoints.
struct GridSpec {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<int> divisions;

    Eigen::Index dim() const { return lower.size(); }
    std::size_t point_count() const;
};

/// Grid points as columns, lexicographic with the last axis varying fastest.
PointSet make_grid(const GridSpec& grid);

struct BenchmarkFunction {
    std::string name;
    Eigen::Index dim = 1;
    GridSpec grid;
    BlackBox f;
    KernelSpec kernel;
    double noise_variance = 1e-4;
    double threshold = 0.0;
    /// Default perturbation laws ("case1", "case2").
    InputDistribution case1;
    InputDistribution case2;
    std::string description;
};

double eval_function(const BenchmarkFunction& bf, const Eigen::Ref<const Eigen::VectorXd>& s);

/// f(x) = 3 - 40x + 38x^2 - 11x^3 + x^4 on [-0.5, 5.5] / 40, h = 8.
BenchmarkFunction quartic();
/// f = -sin(10 x1) - cos(4 x2) + cos(3 x1 x2) on [0,1]x[0,2] / 30x60, h = -0.5.
BenchmarkFunction sinusoidal();
/// Himmelblau minus 100 on [-5,5]^2 / 50x50, h = 0.
BenchmarkFunction himmelblau();
/// 1-D polynomial with coefficients c0 + c1 x + ... on a user grid.
BenchmarkFunction polynomial(std::vector<double> coefficients, GridSpec grid, KernelSpec kernel,
                             double noise_variance, double threshold);

std::vector<std::string> benchmark_names();
/// Throws ParameterError on unknown names.
BenchmarkFunction make_benchmark(std::string_view name);

/// Random-Fourier-feature approximation of a draw from GP(0, k) with the
/// Gaussian kernel; defined on all of R^d and deterministic in the seed.
BlackBox gp_prior_draw(const KernelSpec& kernel, Eigen::Index dim, std::uint64_t seed, std::size_t features = 4096);

/// (1/N) sum 1[f(s_i) < h] over s_i ~ g(. | theta_x); no observation noise.
/// Draws from the stream derive(seed, Oracle, candidate).
double oracle_p_star(const BlackBox& f, const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
                     double h, std::size_t samples, std::uint64_t seed, std::uint64_t candidate = 0);

OracleTable build_oracle(const BlackBox& f, const InputDistribution& dist, const PointSet& candidates, double h,
                         std::size_t samples, std::uint64_t seed, std::string benchmark_name = {},
                         std::string benchmark_hash = {});

/// FNV-1a hex digest of an arbitrary description string.
std::string fnv1a_hex(std::string_view text);

}  // namespace iurlse

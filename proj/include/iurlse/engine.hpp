#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iurlse/acquisition.hpp"
#include "iurlse/gp.hpp"
#include "iurlse/input_models.hpp"
#include "iurlse/metrics.hpp"
#include "iurlse/reliability.hpp"

namespace iurlse {

/// Probability p_t of a uniform-random exploration step at trial t (1-based).
/// Harmonic: min(1, p / t), which still sums to infinity.
struct ExplorationSchedule {
    enum class Kind { Constant, Harmonic };
    Kind kind = Kind::Constant;
    double p = 0.0;

    double at(std::size_t t) const;
};

struct AlgorithmConfig {
    double alpha = 0.95;
    double epsilon = 0.0;
    double beta_sqrt = 3.0;
    ExplorationSchedule exploration;
    std::size_t max_trials = 100;
    std::size_t quadrature_nodes = 1000;
    std::size_t outer_nodes = 64;
    std::size_t initial_points = 1;
    Method method = Method::Proposed;
    std::uint64_t seed = 0;
    bool stop_on_empty_u = true;
    double straddle_kappa = 1.96;
    /// Keep per-candidate intervals in every TrialRecord.
    bool record_intervals = false;

    /// Throws ParameterError naming the offending field.
    void validate() const;
};

using BlackBox = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Everything a run needs besides the algorithm settings.
struct Problem {
    GpPosterior prior;
    /// Law used to perturb the requested input (the simulated truth).
    InputDistribution perturbation;
    /// The learner's model of the perturbation; may be an EstimatedShift.
    InputDistribution belief;
    PointSet candidates;
    BlackBox f;
    double threshold = 0.0;
    double observation_noise_sd = 0.0;
    const OracleTable* oracle = nullptr;
};

struct TrialRecord {
    std::size_t t = 0;
    bool evaluated = false;
    bool explore = false;
    Eigen::Index chosen = -1;
    Point x;
    Point s;
    double y = 0.0;
    double acquisition_score = 0.0;
    std::size_t n_h = 0;
    std::size_t n_l = 0;
    std::size_t n_u = 0;
    std::optional<Metrics> metrics;
    std::vector<ReliabilityEstimate> intervals;
    double wall_seconds = 0.0;
};

enum class StopReason { None, EmptyUnclassified, Budget, GpFailure };

std::string_view stop_reason_name(StopReason reason);

struct RunResult {
    std::vector<TrialRecord> trials;
    ClassificationState terminal;
    StopReason reason = StopReason::None;
    std::string diagnostic;
    std::size_t initial_evaluations = 0;
};

/// Argmax with ties (within 1e-9) broken by the lowest index.
Eigen::Index select_point(std::span<const double> scores);

/// Continue while t < max_trials and (U nonempty or the U-stop is off).
StopReason stopping(const ClassificationState& state, std::size_t t, const AlgorithmConfig& config);

/// Per-trial estimates over the candidate set, plus the representative set
/// when requested.
struct TrialEstimates {
    std::vector<ReliabilityEstimate> estimates;
    ClassificationState state;
    SbarSet sbar;
};

TrialEstimates estimate_trial(const GpPosterior& gp, const InputDistribution& belief, const PointSet& candidates,
                              double h, const AlgorithmConfig& config, std::size_t t, bool want_sbar);

/// Acquisition scores of every candidate for the configured method.
std::vector<double> acquisition_scores(const GpPosterior& gp, const InputDistribution& belief,
                                       const PointSet& candidates, double h, const AlgorithmConfig& config,
                                       std::size_t t, const SbarSet& sbar);

/// The sequential loop: estimate and classify, stop check, choose (explore
/// with probability p_t), perturb, observe, update.
RunResult run(const AlgorithmConfig& config, const Problem& problem);

}  // namespace iurlse

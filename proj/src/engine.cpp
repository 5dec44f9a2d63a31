#include "iurlse/engine.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "iurlse/error.hpp"
#include "iurlse/parallel.hpp"
#include "iurlse/rng.hpp"

namespace iurlse {

double ExplorationSchedule::at(std::size_t t) const {
    if (kind == Kind::Constant) return p;
    return std::min(1.0, p / static_cast<double>(std::max<std::size_t>(t, 1)));
}

void AlgorithmConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha out of range (0, 1)");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be non-negative");
    if (!(alpha - epsilon > 0.0)) throw ParameterError("alpha - epsilon must be positive");
    if (!(beta_sqrt >= 0.0) || !std::isfinite(beta_sqrt)) throw ParameterError("beta_sqrt must be non-negative");
    if (!(exploration.p >= 0.0 && exploration.p <= 1.0)) throw ParameterError("exploration probability out of range [0, 1]");
    if (max_trials < 1) throw ParameterError("max_trials must be at least 1");
    if (quadrature_nodes < 1) throw ParameterError("quadrature_nodes must be at least 1");
    if (outer_nodes < 1) throw ParameterError("outer_nodes must be at least 1");
    if (!(straddle_kappa >= 0.0)) throw ParameterError("straddle_kappa must be non-negative");
}

std::string_view stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::None: return "none";
        case StopReason::EmptyUnclassified: return "u-empty";
        case StopReason::Budget: return "budget";
        case StopReason::GpFailure: return "gp-failure";
    }
    return "unknown";
}

Eigen::Index select_point(std::span<const double> scores) {
    if (scores.empty()) throw ParameterError("cannot select from an empty candidate list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best] + 1e-9) best = i;
    return static_cast<Eigen::Index>(best);
}

StopReason stopping(const ClassificationState& state, std::size_t t, const AlgorithmConfig& config) {
    if (config.stop_on_empty_u && state.n_u == 0) return StopReason::EmptyUnclassified;
    if (t >= config.max_trials) return StopReason::Budget;
    return StopReason::None;
}

TrialEstimates estimate_trial(const GpPosterior& gp, const InputDistribution& belief, const PointSet& candidates,
                              double h, const AlgorithmConfig& config, std::size_t t, bool want_sbar) {
    const auto n = static_cast<std::size_t>(candidates.cols());
    const QuadratureSpec quad{config.quadrature_nodes, config.seed};
    TrialEstimates out;
    out.estimates.resize(n);
    if (want_sbar) {
        out.sbar.points.resize(candidates.rows(), candidates.cols());
        out.sbar.integrand.resize(n);
    }
    parallel_for(n, [&](std::size_t i) {
        const auto col = static_cast<Eigen::Index>(i);
        const PointSet nodes = quadrature_nodes(quad, belief, candidates.col(col), t, i);
        const NodeSummary s = summarize_nodes(gp, belief, candidates.col(col), h, nodes);
        out.estimates[i] = make_estimate(s.mu_p, s.gamma_sq, config.beta_sqrt);
        if (want_sbar) {
            out.sbar.points.col(col) = s.representative;
            out.sbar.integrand[i] = s.representative_score;
        }
    });
    out.state = classify(out.estimates, config.alpha, config.epsilon);
    return out;
}

std::vector<double> acquisition_scores(const GpPosterior& gp, const InputDistribution& belief,
                                       const PointSet& candidates, double h, const AlgorithmConfig& config,
                                       std::size_t t, const SbarSet& sbar) {
    const auto n = static_cast<std::size_t>(candidates.cols());
    std::vector<double> scores(n, 0.0);
    const double beta = config.beta_sqrt * config.beta_sqrt;
    switch (config.method) {
        case Method::Proposed: {
            const double c = threshold_c(config.alpha, config.epsilon, beta).c;
            const GainModel model(gp, sbar.points, h, c);
            auto stream = rng::stream(config.seed, rng::Purpose::Outer, t);
            const Eigen::MatrixXd shifts = sample_shifts(belief, stream, config.outer_nodes);
            parallel_for(n, [&](std::size_t i) {
                scores[i] = a_hat(model, static_cast<Eigen::Index>(i), candidates.col(static_cast<Eigen::Index>(i)),
                                  shifts)
                                .score;
            });
            break;
        }
        case Method::Mile: {
            const double c = threshold_c(config.alpha, config.epsilon, beta).c;
            const GainModel model(gp, candidates, h, c);
            parallel_for(n, [&](std::size_t i) {
                scores[i] = mile(model, candidates.col(static_cast<Eigen::Index>(i)));
            });
            break;
        }
        case Method::Straddle: {
            const Projection p = gp.project(candidates);
            for (std::size_t i = 0; i < n; ++i) {
                const auto j = static_cast<Eigen::Index>(i);
                scores[i] = straddle(p.mean[j], std::sqrt(p.variance[j]), h, config.straddle_kappa);
            }
            break;
        }
        case Method::Random: {
            auto stream = rng::stream(config.seed, rng::Purpose::Acquire, t);
            for (auto& s : scores) s = rng::uniform01(stream);
            break;
        }
    }
    return scores;
}

namespace {

struct Observation {
    Point s;
    double y;
};

Observation observe(const Problem& problem, const Eigen::Ref<const Eigen::VectorXd>& x, rng::Stream perturb,
                    rng::Stream noise) {
    Observation o;
    o.s = sample(problem.perturbation, x, perturb, 1).col(0);
    std::normal_distribution<double> eps(0.0, 1.0);
    o.y = problem.f(o.s) + problem.observation_noise_sd * eps(noise);
    return o;
}

InputDistribution updated_belief(const InputDistribution& belief, const Point& s, const Point& x) {
    if (const auto* est = std::get_if<EstimatedShift>(&belief)) {
        EstimatedShift next = *est;
        const Eigen::VectorXd shift = s - x;
        next.xi = update_xi(est->xi, std::span<const double>(shift.data(), static_cast<std::size_t>(shift.size())));
        return next;
    }
    return belief;
}

}  // namespace

RunResult run(const AlgorithmConfig& config, const Problem& problem) {
    config.validate();
    const PointSet& X = problem.candidates;
    if (X.cols() < 1) throw ParameterError("candidate set is empty");
    if (X.rows() != problem.prior.dim() || dimension(problem.perturbation) != X.rows() ||
        dimension(problem.belief) != X.rows())
        throw ParameterError("candidate, GP and distribution dimensions disagree");
    if (!problem.f) throw ParameterError("black-box function is not set");
    if (problem.oracle && problem.oracle->size() != static_cast<std::size_t>(X.cols()))
        throw ParameterError("oracle table does not cover the candidate set");

    const auto n = static_cast<std::uint64_t>(X.cols());
    const double h = problem.threshold;
    GpPosterior gp = problem.prior;
    InputDistribution belief = problem.belief;
    RunResult result;

    try {
        for (std::size_t j = 0; j < config.initial_points; ++j) {
            auto pick = rng::stream(config.seed, rng::Purpose::Initial, j);
            const auto idx = static_cast<Eigen::Index>(rng::uniform_index(pick, n));
            const Observation o = observe(problem, X.col(idx), rng::stream(config.seed, rng::Purpose::Perturb, 0, j),
                                          rng::stream(config.seed, rng::Purpose::Noise, 0, j));
            gp = gp.add_observation(o.s, o.y);
            belief = updated_belief(belief, o.s, X.col(idx));
            ++result.initial_evaluations;
        }
    } catch (const NumericalError& e) {
        result.reason = StopReason::GpFailure;
        result.diagnostic = std::string("initial design: ") + e.what();
        return result;
    }

    for (std::size_t t = 1;; ++t) {
        const auto started = std::chrono::steady_clock::now();
        const InputDistribution model = resolve_predictive(belief);
        TrialEstimates est = estimate_trial(gp, model, X, h, config, t, config.method == Method::Proposed);

        TrialRecord rec;
        rec.t = t;
        rec.n_h = est.state.n_h;
        rec.n_l = est.state.n_l;
        rec.n_u = est.state.n_u;
        if (problem.oracle) rec.metrics = compute_metrics(est.state, problem.oracle->p_star, config.alpha);
        if (config.record_intervals) rec.intervals = est.estimates;
        result.terminal = est.state;

        if (config.stop_on_empty_u && est.state.n_u == 0) {
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            result.trials.push_back(std::move(rec));
            result.reason = StopReason::EmptyUnclassified;
            break;
        }

        auto explore_stream = rng::stream(config.seed, rng::Purpose::Explore, t);
        const double p_t = config.exploration.at(t);
        rec.explore = p_t > 0.0 && rng::uniform01(explore_stream) < p_t;
        if (rec.explore) {
            rec.chosen = static_cast<Eigen::Index>(rng::uniform_index(explore_stream, n));
        } else {
            const std::vector<double> scores = acquisition_scores(gp, model, X, h, config, t, est.sbar);
            rec.chosen = select_point(scores);
            rec.acquisition_score = scores[static_cast<std::size_t>(rec.chosen)];
        }
        rec.x = X.col(rec.chosen);
        const Observation o = observe(problem, rec.x, rng::stream(config.seed, rng::Purpose::Perturb, t),
                                      rng::stream(config.seed, rng::Purpose::Noise, t));
        rec.s = o.s;
        rec.y = o.y;
        rec.evaluated = true;
        try {
            gp = gp.add_observation(o.s, o.y);
        } catch (const NumericalError& e) {
            result.trials.push_back(std::move(rec));
            result.reason = StopReason::GpFailure;
            result.diagnostic = "trial " + std::to_string(t) + ": " + e.what();
            break;
        }
        belief = updated_belief(belief, o.s, rec.x);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.trials.push_back(std::move(rec));

        if (const StopReason r = stopping(est.state, t, config); r != StopReason::None) {
            result.reason = r;
            break;
        }
    }
    return result;
}

}  // namespace iurlse

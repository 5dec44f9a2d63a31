#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "iurlse/gp.hpp"
#include "iurlse/input_models.hpp"

namespace iurlse {

/// Monte-Carlo quadrature over g(. | theta_x). Nodes for (trial, candidate)
/// come from the stream derive(run_seed, Quadrature, trial, candidate), so
/// the same spec and indices always give the same node set.
struct QuadratureSpec {
    std::size_t sample_count = 1000;
    std::uint64_t run_seed = 0;
};

PointSet quadrature_nodes(const QuadratureSpec& quad, const InputDistribution& dist,
                          const Eigen::Ref<const Eigen::VectorXd>& x, std::uint64_t trial, std::uint64_t candidate);

enum class Label : std::uint8_t { H, L, U };

char label_char(Label label);

struct ReliabilityEstimate {
    double mu_p = 0.0;
    double gamma = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Label label = Label::U;
};

/// mu_p, gamma and the interval at width beta_sqrt; label left unclassified.
ReliabilityEstimate make_estimate(double mu_p, double gamma_sq, double beta_sqrt);

struct ClassificationState {
    std::vector<Label> labels;
    std::size_t n_h = 0;
    std::size_t n_l = 0;
    std::size_t n_u = 0;

    std::size_t size() const { return labels.size(); }
};

/// Phi((h - mu_t(s)) / sigma_t(s)).
double phi_s(const GpPosterior& gp, double h, const Eigen::Ref<const Eigen::VectorXd>& s);

/// Vectorized phi_s over a projection.
Eigen::VectorXd phi_s(const Projection& proj, double h);

double mu_p(const GpPosterior& gp, const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
            double h, const QuadratureSpec& quad, std::uint64_t trial = 0, std::uint64_t candidate = 0);

double gamma_sq(const GpPosterior& gp, const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
                double h, const QuadratureSpec& quad, std::uint64_t trial = 0, std::uint64_t candidate = 0);

/// Everything one pass over a candidate's node set yields: the p-model
/// moments and the maximizer of Phi_s (1 - Phi_s) g(s | theta_x) over the
/// nodes followed by the mean point (lowest index wins ties).
struct NodeSummary {
    double mu_p = 0.0;
    double gamma_sq = 0.0;
    Point representative;
    double representative_score = 0.0;
    Eigen::Index representative_index = 0;
};

NodeSummary summarize_nodes(const GpPosterior& gp, const InputDistribution& dist,
                            const Eigen::Ref<const Eigen::VectorXd>& x, double h, const PointSet& nodes);

/// H if lower > alpha - eps, else L if upper <= alpha + eps, else U.
Label label_for(double lower, double upper, double alpha, double epsilon);

ClassificationState classify(std::span<ReliabilityEstimate> estimates, double alpha, double epsilon);

/// e_alpha(x) for every candidate; unclassified candidates contribute zero.
std::vector<double> misclassification_loss(std::span<const double> p_star, const ClassificationState& state,
                                           double alpha);

}  // namespace iurlse

#include "iurlse/reliability.hpp"

#include <algorithm>
#include <cmath>

#include "iurlse/error.hpp"
#include "iurlse/normal.hpp"
#include "iurlse/rng.hpp"

namespace iurlse {

PointSet quadrature_nodes(const QuadratureSpec& quad, const InputDistribution& dist,
                          const Eigen::Ref<const Eigen::VectorXd>& x, std::uint64_t trial, std::uint64_t candidate) {
    if (quad.sample_count < 1) throw ParameterError("quadrature needs at least one node");
    auto stream = rng::stream(quad.run_seed, rng::Purpose::Quadrature, trial, candidate);
    return sample(dist, x, stream, quad.sample_count);
}

char label_char(Label label) {
    switch (label) {
        case Label::H: return 'H';
        case Label::L: return 'L';
        case Label::U: return 'U';
    }
    return '?';
}

ReliabilityEstimate make_estimate(double mu, double gsq, double beta_sqrt) {
    ReliabilityEstimate e;
    e.mu_p = mu;
    e.gamma = std::sqrt(std::max(0.0, gsq));
    e.lower = mu - beta_sqrt * e.gamma;
    e.upper = mu + beta_sqrt * e.gamma;
    return e;
}

double phi_s(const GpPosterior& gp, double h, const Eigen::Ref<const Eigen::VectorXd>& s) {
    const Prediction p = gp.posterior(s);
    return norm_cdf((h - p.mean) / std::sqrt(p.variance));
}

Eigen::VectorXd phi_s(const Projection& proj, double h) {
    Eigen::VectorXd out(proj.size());
    for (Eigen::Index j = 0; j < proj.size(); ++j)
        out[j] = norm_cdf((h - proj.mean[j]) / std::sqrt(proj.variance[j]));
    return out;
}

NodeSummary summarize_nodes(const GpPosterior& gp, const InputDistribution& dist,
                            const Eigen::Ref<const Eigen::VectorXd>& x, double h, const PointSet& nodes) {
    const Eigen::Index m = nodes.cols();
    if (m < 1) throw ParameterError("node set is empty");
    const ProductIndependent law = to_product(dist);

    PointSet search(nodes.rows(), m + 1);
    search.leftCols(m) = nodes;
    search.col(m) = mean_point(dist, x);
    const Eigen::VectorXd phi = phi_s(gp.project(search), h);

    NodeSummary out;
    double sum_phi = 0.0;
    double sum_var = 0.0;
    out.representative_score = -1.0;
    for (Eigen::Index j = 0; j <= m; ++j) {
        const double bern_var = phi[j] * (1.0 - phi[j]);
        if (j < m) {
            sum_phi += phi[j];
            sum_var += bern_var;
        }
        const double score = bern_var * shift_density(law, search.col(j) - x);
        if (score > out.representative_score) {
            out.representative_score = score;
            out.representative_index = j;
        }
    }
    out.representative = search.col(out.representative_index);
    out.mu_p = std::clamp(sum_phi / static_cast<double>(m), 0.0, 1.0);
    out.gamma_sq = std::clamp(sum_var / static_cast<double>(m), 0.0, 0.25);
    return out;
}

double mu_p(const GpPosterior& gp, const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
            double h, const QuadratureSpec& quad, std::uint64_t trial, std::uint64_t candidate) {
    return summarize_nodes(gp, dist, x, h, quadrature_nodes(quad, dist, x, trial, candidate)).mu_p;
}

double gamma_sq(const GpPosterior& gp, const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
                double h, const QuadratureSpec& quad, std::uint64_t trial, std::uint64_t candidate) {
    return summarize_nodes(gp, dist, x, h, quadrature_nodes(quad, dist, x, trial, candidate)).gamma_sq;
}

Label label_for(double lower, double upper, double alpha, double epsilon) {
    if (lower > alpha - epsilon) return Label::H;
    if (upper <= alpha + epsilon) return Label::L;
    return Label::U;
}

ClassificationState classify(std::span<ReliabilityEstimate> estimates, double alpha, double epsilon) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha out of range (0, 1)");
    if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be non-negative");
    ClassificationState state;
    state.labels.reserve(estimates.size());
    for (auto& e : estimates) {
        e.label = label_for(e.lower, e.upper, alpha, epsilon);
        state.labels.push_back(e.label);
        switch (e.label) {
            case Label::H: ++state.n_h; break;
            case Label::L: ++state.n_l; break;
            case Label::U: ++state.n_u; break;
        }
    }
    return state;
}

std::vector<double> misclassification_loss(std::span<const double> p_star, const ClassificationState& state,
                                           double alpha) {
    if (p_star.size() != state.size()) throw ParameterError("truth table and classification differ in size");
    std::vector<double> loss(p_star.size(), 0.0);
    for (std::size_t i = 0; i < p_star.size(); ++i) {
        if (state.labels[i] == Label::L) loss[i] = std::max(0.0, p_star[i] - alpha);
        else if (state.labels[i] == Label::H) loss[i] = std::max(0.0, alpha - p_star[i]);
    }
    return loss;
}

}  // namespace iurlse

#include "iurlse/acquisition.hpp"

#include <cmath>
#include <string>

#include "iurlse/error.hpp"
#include "iurlse/normal.hpp"

namespace iurlse {

std::string_view method_name(Method method) {
    switch (method) {
        case Method::Proposed: return "proposed";
        case Method::Straddle: return "straddle";
        case Method::Mile: return "mile";
        case Method::Random: return "random";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "proposed") return Method::Proposed;
    if (name == "straddle") return Method::Straddle;
    if (name == "mile") return Method::Mile;
    if (name == "random") return Method::Random;
    throw ParameterError("unknown method '" + std::string(name) + "' (expected proposed|straddle|mile|random)");
}

ThresholdC threshold_c(double alpha, double epsilon, double beta) {
    const double a = alpha - epsilon;
    if (!(a > 0.0 && a < 1.0)) throw ParameterError("alpha - epsilon must lie in (0, 1)");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be non-negative");
    ThresholdC out{a, beta, a};
    if (beta == 0.0) return out;
    const double disc = beta * beta + 4.0 * a * beta * (1.0 - a);
    out.c = std::min(1.0, (2.0 * a + beta + std::sqrt(disc)) / (2.0 * (1.0 + beta)));
    return out;
}

SbarSet adaptive_sbar(const GpPosterior& gp, const InputDistribution& dist, const PointSet& candidates, double h,
                      const std::vector<PointSet>& search_nodes) {
    if (static_cast<Eigen::Index>(search_nodes.size()) != candidates.cols())
        throw ParameterError("need one search node set per candidate");
    SbarSet out;
    out.points.resize(candidates.rows(), candidates.cols());
    out.integrand.resize(static_cast<std::size_t>(candidates.cols()));
    for (Eigen::Index i = 0; i < candidates.cols(); ++i) {
        const NodeSummary s = summarize_nodes(gp, dist, candidates.col(i), h, search_nodes[static_cast<std::size_t>(i)]);
        out.points.col(i) = s.representative;
        out.integrand[static_cast<std::size_t>(i)] = s.representative_score;
    }
    return out;
}

double degenerate_correlation_cutoff(const KernelSpec& kernel) {
    return 1e-12 * kernel.signal_variance;
}

double gain_term(double h, double sbar_mean, double sbar_var, double cross_cov, double star_pred_var,
                 double c_quantile, double kappa_min) {
    // c = 1 cannot be exceeded by any Phi value.
    if (std::isinf(c_quantile)) return c_quantile > 0.0 ? 0.0 : 1.0;
    const double cond_var = std::max(0.0, sbar_var - cross_cov * cross_cov / star_pred_var);
    const double margin = h - sbar_mean - c_quantile * std::sqrt(cond_var);
    const double abs_k = std::abs(cross_cov);
    if (abs_k < kappa_min) return margin > 0.0 ? 1.0 : 0.0;
    return norm_cdf(std::sqrt(star_pred_var) / abs_k * margin);
}

GainModel::GainModel(const GpPosterior& gp, PointSet representatives, double h, double c)
    : gp_(&gp), reps_(gp.project(representatives)), h_(h), c_(c), c_quantile_(norm_quantile(c)),
      kappa_min_(degenerate_correlation_cutoff(gp.kernel())) {
    if (!(c > 0.0 && c <= 1.0)) throw ParameterError("threshold c must lie in (0, 1]");
    const Eigen::VectorXd phi = phi_s(reps_, h_);
    for (Eigen::Index j = 0; j < phi.size(); ++j)
        if (phi[j] > c_) baseline_ += 1.0;
}

Eigen::VectorXd GainModel::inner_sums(const PointSet& s_star) const {
    const Projection star = gp_->project(s_star);
    const Eigen::MatrixXd cov = gp_->posterior_cov(reps_, star);
    const double noise = gp_->noise_variance();
    Eigen::VectorXd out(star.size());
    for (Eigen::Index j = 0; j < star.size(); ++j) {
        const double pred_var = star.variance[j] + noise;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < reps_.size(); ++i)
            acc += gain_term(h_, reps_.mean[i], reps_.variance[i], cov(i, j), pred_var, c_quantile_, kappa_min_);
        out[j] = acc;
    }
    return out;
}

double inner_gain(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& s_star, const SbarSet& sbar,
                  double h, double c) {
    const GainModel model(gp, sbar.points, h, c);
    return model.inner_sums(s_star)[0];
}

AcquisitionEvaluation a_hat(const GainModel& model, Eigen::Index candidate, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::MatrixXd& outer_shifts) {
    if (outer_shifts.cols() < 1) throw ParameterError("need at least one outer node");
    PointSet s_star = outer_shifts;
    s_star.colwise() += x;
    const Eigen::VectorXd sums = model.inner_sums(s_star);
    AcquisitionEvaluation out;
    out.candidate = candidate;
    out.method = Method::Proposed;
    out.baseline = model.baseline();
    out.inner_sums.assign(sums.data(), sums.data() + sums.size());
    out.score = sums.mean() - out.baseline;
    return out;
}

double straddle(double mean, double sd, double h, double kappa) {
    return kappa * sd - std::abs(mean - h);
}

double straddle(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& x, double h, double kappa) {
    const Prediction p = gp.posterior(x);
    return straddle(p.mean, std::sqrt(p.variance), h, kappa);
}

double mile(const GainModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return model.inner_sums(x)[0] - model.baseline();
}

}  // namespace iurlse

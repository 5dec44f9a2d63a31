#pragma once

#include <string_view>
#include <vector>

#include "iurlse/gp.hpp"
#include "iurlse/input_models.hpp"
#include "iurlse/reliability.hpp"

namespace iurlse {

enum class Method { Proposed, Straddle, Mile, Random };

std::string_view method_name(Method method);
/// Throws ParameterError on an unknown name.
Method parse_method(std::string_view name);

/// Larger root c of (1 + beta) c^2 - (2 a + beta) c + a^2 = 0 with
/// a = alpha - epsilon. A mean-point lower bound Phi - sqrt(beta Phi (1-Phi))
/// exceeds a exactly when Phi > c.
struct ThresholdC {
    double alpha_eff = 0.0;
    double beta = 0.0;
    double c = 0.0;
};

ThresholdC threshold_c(double alpha, double epsilon, double beta);

/// One representative point per candidate.
struct SbarSet {
    PointSet points;
    std::vector<double> integrand;

    Eigen::Index size() const { return points.cols(); }
};

/// For each candidate, the maximizer of the current-posterior integrand
/// Phi_s (1 - Phi_s) g(s | theta_x) over its search nodes plus its mean point.
SbarSet adaptive_sbar(const GpPosterior& gp, const InputDistribution& dist, const PointSet& candidates, double h,
                      const std::vector<PointSet>& search_nodes);

/// Probability over y* ~ N(mu_t(s*), sigma_t^2(s*) + noise) that the
/// fantasy posterior puts Phi((h - mu(s_bar | y*)) / sigma(s_bar | s*)) above
/// c, given the current posterior mean/variance at s_bar, the posterior
/// covariance k_t(s_bar, s*), and the predictive variance at s*.
double gain_term(double h, double sbar_mean, double sbar_var, double cross_cov, double star_pred_var,
                 double c_quantile, double kappa_min);

/// Correlations below this are treated as exactly zero.
double degenerate_correlation_cutoff(const KernelSpec& kernel);

/// Analytic inner sum over a fixed representative set, reused for every s*
/// queried within a trial.
class GainModel {
public:
    GainModel(const GpPosterior& gp, PointSet representatives, double h, double c);

    /// Number of representatives whose current Phi exceeds c.
    double baseline() const { return baseline_; }
    /// Sum over representatives of gain_term, one entry per column of s_star.
    Eigen::VectorXd inner_sums(const PointSet& s_star) const;
    const GpPosterior& gp() const { return *gp_; }
    double c() const { return c_; }

private:
    const GpPosterior* gp_;
    Projection reps_;
    double h_;
    double c_;
    double c_quantile_;
    double kappa_min_;
    double baseline_ = 0.0;
};

double inner_gain(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& s_star, const SbarSet& sbar,
                  double h, double c);

struct AcquisitionEvaluation {
    Eigen::Index candidate = 0;
    double score = 0.0;
    std::vector<double> inner_sums;
    double baseline = 0.0;
    Method method = Method::Proposed;
};

/// Mean over the outer nodes x + shift_m of the inner sum, minus the
/// candidate-independent baseline. The shifts are shared by all candidates
/// of a trial.
AcquisitionEvaluation a_hat(const GainModel& model, Eigen::Index candidate, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::MatrixXd& outer_shifts);

/// kappa * sd - |mean - h|.
double straddle(double mean, double sd, double h, double kappa = 1.96);
double straddle(const GpPosterior& gp, const Eigen::Ref<const Eigen::VectorXd>& x, double h, double kappa = 1.96);

/// No-input-uncertainty specialization: a single s* = x, representatives X.
/// `model` must be built over the candidate set.
double mile(const GainModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace iurlse

#pragma once

#include <Eigen/Dense>

namespace iurlse {

using Point = Eigen::VectorXd;
/// Column-major point set: one point per column (d x n).
using PointSet = Eigen::MatrixXd;

/// Gaussian kernel k(a, b) = signal_variance * exp(-|a - b|^2 / length_scale).
struct KernelSpec {
    double signal_variance = 1.0;
    double length_scale = 1.0;

    void validate() const;
    double operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                      const Eigen::Ref<const Eigen::VectorXd>& b) const;
    /// Gram block between the columns of a (d x n) and b (d x m), n x m.
    Eigen::MatrixXd cross(const Eigen::Ref<const PointSet>& a, const Eigen::Ref<const PointSet>& b) const;
};

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   const KernelSpec& spec);

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Posterior quantities for a batch of query points. `whitened` holds
/// L^{-1} k_t(x) per column, which turns every posterior covariance into a
/// dot product: k_t(a, b) = k(a, b) - whitened_a . whitened_b.
struct Projection {
    PointSet points;
    Eigen::MatrixXd whitened;
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;

    Eigen::Index size() const { return points.cols(); }
};

/// Posterior of f at s-bar after a hypothetical observation (s*, y*).
/// The fantasy mean is base_mean + slope * (y* - star_mean); the fantasy
/// variance does not depend on y*.
struct OneStepAhead {
    double slope = 0.0;
    double conditional_sd = 0.0;
    double base_mean = 0.0;
    double star_mean = 0.0;
    double star_predictive_var = 0.0;
    double cross_cov = 0.0;

    double fantasy_mean(double y_star) const { return base_mean + slope * (y_star - star_mean); }
    double fantasy_variance() const { return conditional_sd * conditional_sd; }
};

/// Exact zero-mean GP regression with a Gaussian kernel and homoscedastic
/// noise. Immutable: add_observation returns a new posterior.
class GpPosterior {
public:
    GpPosterior(KernelSpec kernel, double noise_variance, Eigen::Index dim);

    /// Batch construction from inputs (d x t) and outputs (t).
    static GpPosterior fit(KernelSpec kernel, double noise_variance, const PointSet& inputs,
                           const Eigen::VectorXd& outputs);

    /// Rank-one extension of the Cholesky factor; falls back to a batch refit
    /// with escalated jitter when the extension loses positive definiteness.
    GpPosterior add_observation(const Eigen::Ref<const Eigen::VectorXd>& s, double y) const;

    Prediction posterior(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double posterior_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& x_prime) const;
    OneStepAhead one_step_ahead(const Eigen::Ref<const Eigen::VectorXd>& s_bar,
                                const Eigen::Ref<const Eigen::VectorXd>& s_star) const;

    Projection project(const Eigen::Ref<const PointSet>& points) const;
    /// Posterior covariance block between two projections (a.size() x b.size()).
    Eigen::MatrixXd posterior_cov(const Projection& a, const Projection& b) const;

    const KernelSpec& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }
    double jitter() const { return jitter_; }
    Eigen::Index dim() const { return dim_; }
    Eigen::Index size() const { return inputs_.cols(); }
    const PointSet& inputs() const { return inputs_; }
    const Eigen::VectorXd& outputs() const { return outputs_; }
    /// Lower-triangular factor of K_t + (noise + jitter) I.
    const Eigen::MatrixXd& cholesky() const { return chol_; }
    double variance_floor() const;

private:
    double clamp_variance(double v) const;
    void refactor(double starting_jitter);

    KernelSpec kernel_;
    double noise_variance_;
    Eigen::Index dim_;
    double jitter_ = 0.0;
    PointSet inputs_;
    Eigen::VectorXd outputs_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd white_y_;  // L^{-1} y
};

}  // namespace iurlse

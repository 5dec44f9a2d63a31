#include "iurlse/gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iurlse/error.hpp"

namespace iurlse {
namespace {

constexpr double kFirstJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;
constexpr double kVarianceFloor = 1e-12;

double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

}  // namespace

void KernelSpec::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
        throw ParameterError("kernel signal variance must be positive, got " + std::to_string(signal_variance));
    if (!(length_scale > 0.0) || !std::isfinite(length_scale))
        throw ParameterError("kernel length scale must be positive, got " + std::to_string(length_scale));
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) const {
    return signal_variance * std::exp(-squared_distance(a, b) / length_scale);
}

Eigen::MatrixXd KernelSpec::cross(const Eigen::Ref<const PointSet>& a, const Eigen::Ref<const PointSet>& b) const {
    Eigen::MatrixXd out(a.cols(), b.cols());
    const double inv_len = 1.0 / length_scale;
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.cols(); ++i) {
            out(i, j) = signal_variance * std::exp(-squared_distance(a.col(i), b.col(j)) * inv_len);
        }
    }
    return out;
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   const KernelSpec& spec) {
    return spec(a, b);
}

GpPosterior::GpPosterior(KernelSpec kernel, double noise_variance, Eigen::Index dim)
    : kernel_(kernel), noise_variance_(noise_variance), dim_(dim), inputs_(dim, 0), outputs_(0), chol_(0, 0),
      white_y_(0) {
    kernel_.validate();
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
        throw ParameterError("noise variance must be positive");
    if (dim < 1) throw ParameterError("input dimension must be at least 1");
}

GpPosterior GpPosterior::fit(KernelSpec kernel, double noise_variance, const PointSet& inputs,
                             const Eigen::VectorXd& outputs) {
    if (inputs.cols() != outputs.size()) throw ParameterError("inputs and outputs differ in length");
    GpPosterior gp(kernel, noise_variance, inputs.rows());
    if (!inputs.allFinite() || !outputs.allFinite()) throw ParameterError("training data must be finite");
    gp.inputs_ = inputs;
    gp.outputs_ = outputs;
    gp.refactor(0.0);
    return gp;
}

void GpPosterior::refactor(double starting_jitter) {
    const Eigen::Index t = inputs_.cols();
    if (t == 0) {
        chol_.resize(0, 0);
        white_y_.resize(0);
        jitter_ = starting_jitter;
        return;
    }
    const Eigen::MatrixXd gram = kernel_.cross(inputs_, inputs_);
    const double first = kFirstJitter * kernel_.signal_variance;
    const double last = kMaxJitter * kernel_.signal_variance;
    double jitter = starting_jitter;
    for (;;) {
        Eigen::MatrixXd c = gram;
        c.diagonal().array() += noise_variance_ + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
            chol_ = llt.matrixL();
            jitter_ = jitter;
            white_y_ = chol_.triangularView<Eigen::Lower>().solve(outputs_);
            return;
        }
        if (jitter >= last * (1.0 - 1e-12))
            throw NumericalError("kernel matrix is ill-conditioned: Cholesky failed with jitter " +
                                 std::to_string(jitter));
        jitter = jitter <= 0.0 ? first : std::min(last, jitter * 10.0);
    }
}

GpPosterior GpPosterior::add_observation(const Eigen::Ref<const Eigen::VectorXd>& s, double y) const {
    if (s.size() != dim_) throw ParameterError("observation has the wrong dimension");
    if (!s.allFinite() || !std::isfinite(y)) throw ParameterError("observation must be finite");
    GpPosterior next = *this;
    const Eigen::Index t = inputs_.cols();
    next.inputs_.conservativeResize(Eigen::NoChange, t + 1);
    next.inputs_.col(t) = s;
    next.outputs_.conservativeResize(t + 1);
    next.outputs_[t] = y;

    Eigen::VectorXd k_new(t);
    for (Eigen::Index i = 0; i < t; ++i) k_new[i] = kernel_(inputs_.col(i), s);
    const Eigen::VectorXd l = chol_.triangularView<Eigen::Lower>().solve(k_new);
    const double d2 = kernel_(s, s) + noise_variance_ + jitter_ - l.squaredNorm();
    if (!(d2 > 0.0) || !std::isfinite(d2)) {
        next.refactor(jitter_);
        return next;
    }
    const double d = std::sqrt(d2);
    next.chol_.conservativeResize(t + 1, t + 1);
    next.chol_.row(t).head(t) = l.transpose();
    next.chol_.col(t).head(t).setZero();
    next.chol_(t, t) = d;
    next.white_y_.conservativeResize(t + 1);
    next.white_y_[t] = (y - l.dot(white_y_)) / d;
    return next;
}

double GpPosterior::variance_floor() const {
    return kVarianceFloor * kernel_.signal_variance;
}

double GpPosterior::clamp_variance(double v) const {
    return std::clamp(v, variance_floor(), kernel_.signal_variance);
}

Projection GpPosterior::project(const Eigen::Ref<const PointSet>& points) const {
    if (points.rows() != dim_) throw ParameterError("query points have the wrong dimension");
    Projection p;
    p.points = points;
    const Eigen::Index n = points.cols();
    const Eigen::Index t = inputs_.cols();
    if (t == 0) {
        p.whitened.resize(0, n);
        p.mean = Eigen::VectorXd::Zero(n);
        p.variance = Eigen::VectorXd::Constant(n, kernel_.signal_variance);
        return p;
    }
    p.whitened = kernel_.cross(inputs_, points);
    chol_.triangularView<Eigen::Lower>().solveInPlace(p.whitened);
    p.mean = p.whitened.transpose() * white_y_;
    p.variance.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
        p.variance[j] = clamp_variance(kernel_.signal_variance - p.whitened.col(j).squaredNorm());
    return p;
}

Eigen::MatrixXd GpPosterior::posterior_cov(const Projection& a, const Projection& b) const {
    Eigen::MatrixXd out = kernel_.cross(a.points, b.points);
    if (inputs_.cols() > 0) out.noalias() -= a.whitened.transpose() * b.whitened;
    return out;
}

Prediction GpPosterior::posterior(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Projection p = project(x);
    return {p.mean[0], p.variance[0]};
}

double GpPosterior::posterior_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_prime) const {
    const Projection a = project(x);
    const Projection b = project(x_prime);
    return posterior_cov(a, b)(0, 0);
}

OneStepAhead GpPosterior::one_step_ahead(const Eigen::Ref<const Eigen::VectorXd>& s_bar,
                                         const Eigen::Ref<const Eigen::VectorXd>& s_star) const {
    const Projection bar = project(s_bar);
    const Projection star = project(s_star);
    OneStepAhead out;
    out.cross_cov = posterior_cov(bar, star)(0, 0);
    out.base_mean = bar.mean[0];
    out.star_mean = star.mean[0];
    out.star_predictive_var = star.variance[0] + noise_variance_;
    out.slope = out.cross_cov / out.star_predictive_var;
    const double cond = bar.variance[0] - out.cross_cov * out.cross_cov / out.star_predictive_var;
    out.conditional_sd = std::sqrt(std::max(0.0, cond));
    return out;
}

}  // namespace iurlse

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "iurlse/gp.hpp"
#include "iurlse/rng.hpp"

namespace iurlse {

// Every perturbation law here is a shift family: S(x) = x + Z with Z drawn
// from a law that does not depend on x. Samples are not clipped to any box.

struct NormalLaw {
    double mean = 0.0;
    double sd = 1.0;
};

/// Gamma(shape, scale): mean shape * scale, support [0, inf).
struct GammaLaw {
    double shape = 1.0;
    double scale = 1.0;
};

struct StudentTLaw {
    double location = 0.0;
    double scale = 1.0;
    double dof = 1.0;
};

using ScalarLaw = std::variant<NormalLaw, GammaLaw, StudentTLaw>;

double scalar_density(const ScalarLaw& law, double z);
double scalar_sample(const ScalarLaw& law, rng::Stream& stream);
double scalar_mean(const ScalarLaw& law);
void validate(const ScalarLaw& law, bool allow_degenerate = false);

/// Independent Gaussian shifts, one (offset, sd) per dimension.
struct GaussianShift {
    Eigen::VectorXd offset;
    Eigen::VectorXd sd;
};

/// Independent gamma shifts, one (shape, scale) per dimension.
struct GammaShift {
    Eigen::VectorXd shape;
    Eigen::VectorXd scale;
};

struct ProductIndependent {
    std::vector<ScalarLaw> marginals;
};

// ---------------------------------------------------------------------------
// Unknown shift parameters. Sufficient statistics are kept instead of running
// posterior parameters, so a batch update and the same observations applied
// one at a time produce bitwise-identical posteriors.

/// Normal shift with unknown mean (normal prior) and known variance.
struct NormalMeanKnownVar {
    double prior_mean = 0.0;
    double prior_var = 1.0;
    double known_var = 1.0;
    std::size_t count = 0;
    double sum = 0.0;

    double posterior_var() const;
    double posterior_mean() const;
};

enum class GammaParameterization { Rate, Scale };

/// Normal shift with known mean and unknown precision (gamma prior, rate form).
struct GammaPrecision {
    double prior_shape = 1.0;
    double prior_rate = 1.0;
    double known_mean = 0.0;
    std::size_t count = 0;
    double sum_sq_dev = 0.0;

    /// Builds the prior from (shape, second parameter) under either reading.
    static GammaPrecision from_prior(double shape, double second, GammaParameterization reading,
                                     double known_mean = 0.0);
    double shape() const { return prior_shape + 0.5 * static_cast<double>(count); }
    double rate() const { return prior_rate + 0.5 * sum_sq_dev; }
};

using XiPosterior = std::variant<NormalMeanKnownVar, GammaPrecision>;

XiPosterior update_xi(const XiPosterior& post, std::span<const double> observed_shifts);

/// Which base family the unknown parameter plugs into.
enum class BaseFamily { Normal, Gamma };

/// Shift law with a globally shared unknown parameter; every dimension uses
/// the same marginal.
struct EstimatedShift {
    Eigen::Index dim = 1;
    BaseFamily base = BaseFamily::Normal;
    XiPosterior xi;
};

using InputDistribution = std::variant<GaussianShift, GammaShift, ProductIndependent, EstimatedShift>;

Eigen::Index dimension(const InputDistribution& dist);

/// Per-dimension marginals of any variant (EstimatedShift via its predictive).
ProductIndependent to_product(const InputDistribution& dist);

/// Product density of shift z = s - x under independent marginals.
double shift_density(const ProductIndependent& law, const Eigen::Ref<const Eigen::VectorXd>& shift);
void validate(const InputDistribution& dist, bool allow_degenerate = false);

/// n shift vectors (d x n). Adding them to x gives draws of S(x).
Eigen::MatrixXd sample_shifts(const InputDistribution& dist, rng::Stream& stream, std::size_t n);

/// n i.i.d. draws of S(x) (d x n).
PointSet sample(const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x, rng::Stream& stream,
                std::size_t n);

/// g(s | theta_x). Throws PredictiveRequired on EstimatedShift.
double density(const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& s);

/// E[S(x)]. For EstimatedShift, the mean under the predictive law.
Point mean_point(const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Closed-form marginal of one shift coordinate under the current posterior:
/// Student-t for GammaPrecision, normal for NormalMeanKnownVar.
ScalarLaw predictive_marginal(const XiPosterior& post, BaseFamily base);

/// Integral of g(s | theta_x, xi) against the posterior of xi.
double predictive_density(const XiPosterior& post, const EstimatedShift& tmpl,
                          const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& s);

/// Replaces an EstimatedShift by its predictive product law; other variants
/// are returned unchanged.
InputDistribution resolve_predictive(const InputDistribution& dist);

}  // namespace iurlse

#include "iurlse/input_models.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "iurlse/error.hpp"

namespace iurlse {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double normal_density(double z, double mean, double sd) {
    const double u = (z - mean) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

ProductIndependent to_product(const InputDistribution& dist) {
    return std::visit(
        overloaded{
            [](const GaussianShift& g) {
                ProductIndependent p;
                for (Eigen::Index k = 0; k < g.offset.size(); ++k)
                    p.marginals.push_back(NormalLaw{g.offset[k], g.sd[k]});
                return p;
            },
            [](const GammaShift& g) {
                ProductIndependent p;
                for (Eigen::Index k = 0; k < g.shape.size(); ++k)
                    p.marginals.push_back(GammaLaw{g.shape[k], g.scale[k]});
                return p;
            },
            [](const ProductIndependent& p) { return p; },
            [](const EstimatedShift& e) {
                ProductIndependent p;
                p.marginals.assign(static_cast<std::size_t>(e.dim), predictive_marginal(e.xi, e.base));
                return p;
            },
        },
        dist);
}

namespace {

// Holds distribution objects across draws so the normal sampler's cached
// second deviate is used instead of discarded.
class MarginalSampler {
public:
    explicit MarginalSampler(const ScalarLaw& law) : law_(law) {
        if (const auto* g = std::get_if<GammaLaw>(&law_); g && g->scale > 0.0)
            gamma_ = std::gamma_distribution<double>(g->shape, g->scale);
        if (const auto* t = std::get_if<StudentTLaw>(&law_)) student_ = std::student_t_distribution<double>(t->dof);
    }

    double operator()(rng::Stream& stream) {
        if (const auto* n = std::get_if<NormalLaw>(&law_)) return n->mean + n->sd * normal_(stream);
        if (const auto* g = std::get_if<GammaLaw>(&law_)) return g->scale > 0.0 ? gamma_(stream) : 0.0;
        const auto& t = std::get<StudentTLaw>(law_);
        return t.location + t.scale * student_(stream);
    }

private:
    ScalarLaw law_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::gamma_distribution<double> gamma_;
    std::student_t_distribution<double> student_;
};

}  // namespace

double scalar_density(const ScalarLaw& law, double z) {
    return std::visit(
        overloaded{
            [z](const NormalLaw& n) { return normal_density(z, n.mean, n.sd); },
            [z](const GammaLaw& g) {
                if (z < 0.0) return 0.0;
                if (z == 0.0) return g.shape == 1.0 ? 1.0 / g.scale : (g.shape < 1.0 ? INFINITY : 0.0);
                const double log_pdf = (g.shape - 1.0) * std::log(z) - z / g.scale - std::lgamma(g.shape) -
                                       g.shape * std::log(g.scale);
                return std::exp(log_pdf);
            },
            [z](const StudentTLaw& t) {
                const double u = (z - t.location) / t.scale;
                const double log_c = std::lgamma(0.5 * (t.dof + 1.0)) - std::lgamma(0.5 * t.dof) -
                                     0.5 * std::log(t.dof * std::numbers::pi) - std::log(t.scale);
                return std::exp(log_c - 0.5 * (t.dof + 1.0) * std::log1p(u * u / t.dof));
            },
        },
        law);
}

double scalar_sample(const ScalarLaw& law, rng::Stream& stream) {
    return std::visit(
        overloaded{
            [&](const NormalLaw& n) {
                std::normal_distribution<double> d(0.0, 1.0);
                return n.mean + n.sd * d(stream);
            },
            [&](const GammaLaw& g) {
                if (g.scale == 0.0) return 0.0;
                std::gamma_distribution<double> d(g.shape, g.scale);
                return d(stream);
            },
            [&](const StudentTLaw& t) {
                std::student_t_distribution<double> d(t.dof);
                return t.location + t.scale * d(stream);
            },
        },
        law);
}

double scalar_mean(const ScalarLaw& law) {
    return std::visit(overloaded{
                          [](const NormalLaw& n) { return n.mean; },
                          [](const GammaLaw& g) { return g.shape * g.scale; },
                          [](const StudentTLaw& t) {
                              if (t.dof <= 1.0) throw ParameterError("Student-t with dof <= 1 has no mean");
                              return t.location;
                          },
                      },
                      law);
}

void validate(const ScalarLaw& law, bool allow_degenerate) {
    auto positive = [allow_degenerate](double v, const char* what) {
        if (!std::isfinite(v) || v < 0.0 || (v == 0.0 && !allow_degenerate))
            throw ParameterError(std::string(what) + " must be positive, got " + std::to_string(v));
    };
    std::visit(overloaded{
                   [&](const NormalLaw& n) {
                       if (!std::isfinite(n.mean)) throw ParameterError("normal shift mean must be finite");
                       positive(n.sd, "normal shift sd");
                   },
                   [&](const GammaLaw& g) {
                       positive(g.shape, "gamma shape");
                       positive(g.scale, "gamma scale");
                   },
                   [&](const StudentTLaw& t) {
                       positive(t.scale, "student-t scale");
                       positive(t.dof, "student-t dof");
                   },
               },
               law);
}

double NormalMeanKnownVar::posterior_var() const {
    return 1.0 / (1.0 / prior_var + static_cast<double>(count) / known_var);
}

double NormalMeanKnownVar::posterior_mean() const {
    return posterior_var() * (prior_mean / prior_var + sum / known_var);
}

GammaPrecision GammaPrecision::from_prior(double shape, double second, GammaParameterization reading,
                                          double known_mean) {
    if (!(shape > 0.0) || !(second > 0.0)) throw ParameterError("gamma prior parameters must be positive");
    GammaPrecision g;
    g.prior_shape = shape;
    g.prior_rate = reading == GammaParameterization::Rate ? second : 1.0 / second;
    g.known_mean = known_mean;
    return g;
}

XiPosterior update_xi(const XiPosterior& post, std::span<const double> observed_shifts) {
    return std::visit(overloaded{
                          [&](NormalMeanKnownVar p) -> XiPosterior {
                              for (double z : observed_shifts) {
                                  ++p.count;
                                  p.sum += z;
                              }
                              return p;
                          },
                          [&](GammaPrecision p) -> XiPosterior {
                              for (double z : observed_shifts) {
                                  ++p.count;
                                  const double d = z - p.known_mean;
                                  p.sum_sq_dev += d * d;
                              }
                              return p;
                          },
                      },
                      post);
}

ScalarLaw predictive_marginal(const XiPosterior& post, BaseFamily base) {
    if (base != BaseFamily::Normal)
        throw UnsupportedConjugatePair("no closed-form predictive for this base family; marginalize by Monte Carlo");
    return std::visit(overloaded{
                          [](const NormalMeanKnownVar& p) -> ScalarLaw {
                              return NormalLaw{p.posterior_mean(), std::sqrt(p.posterior_var() + p.known_var)};
                          },
                          [](const GammaPrecision& p) -> ScalarLaw {
                              const double a = p.shape();
                              const double b = p.rate();
                              return StudentTLaw{p.known_mean, std::sqrt(b / a), 2.0 * a};
                          },
                      },
                      post);
}

double predictive_density(const XiPosterior& post, const EstimatedShift& tmpl,
                          const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& s) {
    if (x.size() != tmpl.dim || s.size() != tmpl.dim) throw ParameterError("point dimension mismatch");
    const ScalarLaw marginal = predictive_marginal(post, tmpl.base);
    double value = 1.0;
    for (Eigen::Index k = 0; k < tmpl.dim; ++k) value *= scalar_density(marginal, s[k] - x[k]);
    return value;
}

Eigen::Index dimension(const InputDistribution& dist) {
    return std::visit(overloaded{
                          [](const GaussianShift& g) { return g.offset.size(); },
                          [](const GammaShift& g) { return g.shape.size(); },
                          [](const ProductIndependent& p) { return static_cast<Eigen::Index>(p.marginals.size()); },
                          [](const EstimatedShift& e) { return e.dim; },
                      },
                      dist);
}

void validate(const InputDistribution& dist, bool allow_degenerate) {
    std::visit(overloaded{
                   [](const GaussianShift& g) {
                       if (g.offset.size() != g.sd.size() || g.sd.size() == 0)
                           throw ParameterError("gaussian shift needs one offset and one sd per dimension");
                   },
                   [](const GammaShift& g) {
                       if (g.shape.size() != g.scale.size() || g.shape.size() == 0)
                           throw ParameterError("gamma shift needs one shape and one scale per dimension");
                   },
                   [](const ProductIndependent& p) {
                       if (p.marginals.empty()) throw ParameterError("product law needs at least one marginal");
                   },
                   [](const EstimatedShift& e) {
                       if (e.dim < 1) throw ParameterError("estimated shift dimension must be positive");
                       std::visit(overloaded{
                                      [](const NormalMeanKnownVar& p) {
                                          if (!(p.prior_var > 0.0) || !(p.known_var > 0.0))
                                              throw ParameterError("normal mean prior variances must be positive");
                                      },
                                      [](const GammaPrecision& p) {
                                          if (!(p.prior_shape > 0.0) || !(p.prior_rate > 0.0))
                                              throw ParameterError("gamma precision prior must be positive");
                                      },
                                  },
                                  e.xi);
                   },
               },
               dist);
    if (!std::holds_alternative<EstimatedShift>(dist))
        for (const auto& m : to_product(dist).marginals) validate(m, allow_degenerate);
}

Eigen::MatrixXd sample_shifts(const InputDistribution& dist, rng::Stream& stream, std::size_t n) {
    const ProductIndependent p = to_product(dist);
    const auto d = static_cast<Eigen::Index>(p.marginals.size());
    std::vector<MarginalSampler> samplers(p.marginals.begin(), p.marginals.end());
    Eigen::MatrixXd out(d, static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index k = 0; k < d; ++k) out(k, j) = samplers[static_cast<std::size_t>(k)](stream);
    return out;
}

PointSet sample(const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x, rng::Stream& stream,
                std::size_t n) {
    if (x.size() != dimension(dist)) throw ParameterError("point dimension does not match the distribution");
    Eigen::MatrixXd out = sample_shifts(dist, stream, n);
    out.colwise() += x;
    return out;
}

double density(const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& s) {
    if (std::holds_alternative<EstimatedShift>(dist))
        throw PredictiveRequired("estimated shift has unresolved parameters: use predictive_density");
    const ProductIndependent p = to_product(dist);
    if (x.size() != static_cast<Eigen::Index>(p.marginals.size()) || s.size() != x.size())
        throw ParameterError("point dimension does not match the distribution");
    double value = 1.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) value *= scalar_density(p.marginals[static_cast<std::size_t>(k)], s[k] - x[k]);
    return value;
}

Point mean_point(const InputDistribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const ProductIndependent p = to_product(dist);
    if (x.size() != static_cast<Eigen::Index>(p.marginals.size()))
        throw ParameterError("point dimension does not match the distribution");
    Point out = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) out[k] += scalar_mean(p.marginals[static_cast<std::size_t>(k)]);
    return out;
}

double shift_density(const ProductIndependent& law, const Eigen::Ref<const Eigen::VectorXd>& shift) {
    double value = 1.0;
    for (Eigen::Index k = 0; k < shift.size(); ++k)
        value *= scalar_density(law.marginals[static_cast<std::size_t>(k)], shift[k]);
    return value;
}

InputDistribution resolve_predictive(const InputDistribution& dist) {
    if (std::holds_alternative<EstimatedShift>(dist)) return to_product(dist);
    return dist;
}

}  // namespace iurlse

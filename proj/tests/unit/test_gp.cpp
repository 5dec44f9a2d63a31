#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "iurlse/error.hpp"
#include "iurlse/gp.hpp"

using namespace iurlse;

namespace {

// Dense textbook formulas with an explicit inverse, independent of the
// Cholesky code paths under test.
struct DenseOracle {
    KernelSpec k;
    double noise;
    PointSet X;
    Eigen::VectorXd y;

    double kern(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return k.signal_variance * std::exp(-(a - b).squaredNorm() / k.length_scale);
    }
    Eigen::MatrixXd c_inv() const {
        Eigen::MatrixXd C(X.cols(), X.cols());
        for (Eigen::Index i = 0; i < X.cols(); ++i)
            for (Eigen::Index j = 0; j < X.cols(); ++j) C(i, j) = kern(X.col(i), X.col(j)) + (i == j ? noise : 0.0);
        return C.fullPivLu().inverse();
    }
    Eigen::VectorXd kvec(const Eigen::VectorXd& x) const {
        Eigen::VectorXd v(X.cols());
        for (Eigen::Index i = 0; i < X.cols(); ++i) v[i] = kern(X.col(i), x);
        return v;
    }
    double mean(const Eigen::VectorXd& x) const { return kvec(x).dot(c_inv() * y); }
    double cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return kern(a, b) - kvec(a).dot(c_inv() * kvec(b));
    }
};

PointSet random_points(std::mt19937_64& g, Eigen::Index d, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    PointSet p(d, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i) p(i, j) = u(g);
    return p;
}

Eigen::VectorXd random_values(std::mt19937_64& g, Eigen::Index n, double sd) {
    std::normal_distribution<double> nd(0.0, sd);
    Eigen::VectorXd v(n);
    for (auto& e : v) e = nd(g);
    return v;
}

Eigen::VectorXd pt(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

TEST_CASE("kernel is the decaying Gaussian") {
    const KernelSpec k{100.0, 0.5};
    CHECK(k(pt(1.0), pt(1.0)) == doctest::Approx(100.0));
    CHECK(k(pt(0.0), pt(1.0)) == doctest::Approx(100.0 * std::exp(-2.0)));
    CHECK(k(pt(0.0), pt(1.0)) == k(pt(1.0), pt(0.0)));
    CHECK_THROWS_AS((KernelSpec{-1.0, 1.0}.validate()), ParameterError);
    CHECK_THROWS_AS((KernelSpec{1.0, 0.0}.validate()), ParameterError);
}

TEST_CASE("prior posterior") {
    const GpPosterior gp(KernelSpec{100.0, 0.5}, 1e-4, 1);
    const Prediction p = gp.posterior(pt(2.0));
    CHECK(p.mean == 0.0);
    CHECK(p.variance == doctest::Approx(100.0));
    CHECK(gp.posterior_cov(pt(0.0), pt(0.3)) == doctest::Approx(100.0 * std::exp(-0.09 / 0.5)).epsilon(1e-12));
}

TEST_CASE("posterior_cov agrees with posterior variance and the dense oracle") {
    std::mt19937_64 g(11);
    const KernelSpec k{2.0, 0.7};
    for (int rep = 0; rep < 20; ++rep) {
        const PointSet X = random_points(g, 2, 3, -1.0, 1.0);
        const Eigen::VectorXd y = random_values(g, 3, 1.0);
        const GpPosterior gp = GpPosterior::fit(k, 0.01, X, y);
        const DenseOracle o{k, 0.01, X, y};
        const PointSet q = random_points(g, 2, 2, -1.5, 1.5);
        CHECK(gp.posterior_cov(q.col(0), q.col(1)) == doctest::Approx(o.cov(q.col(0), q.col(1))).epsilon(1e-10));
        CHECK(gp.posterior_cov(q.col(0), q.col(1)) == doctest::Approx(gp.posterior_cov(q.col(1), q.col(0))));
        CHECK(std::abs(gp.posterior_cov(q.col(0), q.col(0)) - gp.posterior(q.col(0)).variance) < 1e-10);
        CHECK(gp.posterior(q.col(0)).mean == doctest::Approx(o.mean(q.col(0))).epsilon(1e-10));
    }
}

TEST_CASE("near-noiseless observation is interpolated") {
    const GpPosterior gp = GpPosterior(KernelSpec{1.0, 1.0}, 1e-12, 1).add_observation(pt(0.4), 3.25);
    CHECK(gp.posterior(pt(0.4)).mean == doctest::Approx(3.25).epsilon(1e-9));
    CHECK(gp.posterior(pt(0.4)).variance < 1e-9);
}

TEST_CASE("five sequential additions equal the batch fit") {
    std::mt19937_64 g(5);
    const KernelSpec k{100.0, 0.5};
    const PointSet X = random_points(g, 1, 5, -0.5, 5.5);
    const Eigen::VectorXd y = random_values(g, 5, 10.0);
    GpPosterior inc(k, 1e-4, 1);
    for (Eigen::Index i = 0; i < 5; ++i) inc = inc.add_observation(X.col(i), y[i]);
    const GpPosterior batch = GpPosterior::fit(k, 1e-4, X, y);
    for (double q = -0.5; q <= 5.5; q += 0.37) {
        CHECK(inc.posterior(pt(q)).mean == doctest::Approx(batch.posterior(pt(q)).mean).epsilon(1e-8));
        CHECK(inc.posterior(pt(q)).variance == doctest::Approx(batch.posterior(pt(q)).variance).epsilon(1e-8));
    }
}

TEST_CASE("duplicate observation gives the shrunk average") {
    const KernelSpec k{1.0, 1.0};
    const double noise = 0.25;
    const GpPosterior gp = GpPosterior(k, noise, 1).add_observation(pt(1.0), 2.0).add_observation(pt(1.0), 4.0);
    // Two copies at one point: mean = k (y1 + y2) / (2 k + noise).
    PointSet X(1, 2);
    X << 1.0, 1.0;
    const DenseOracle o{k, noise, X, Eigen::Vector2d(2.0, 4.0)};
    CHECK(gp.posterior(pt(1.0)).mean == doctest::Approx(o.mean(pt(1.0))).epsilon(1e-10));
    CHECK(gp.posterior(pt(1.0)).mean == doctest::Approx(6.0 / 2.25));
}

TEST_CASE("one-step-ahead: uncorrelated point") {
    const GpPosterior gp = GpPosterior(KernelSpec{1.0, 0.01}, 1e-4, 1).add_observation(pt(0.0), 1.0);
    const OneStepAhead o = gp.one_step_ahead(pt(100.0), pt(0.5));
    CHECK(o.fantasy_variance() == doctest::Approx(gp.posterior(pt(100.0)).variance));
    CHECK(o.fantasy_mean(-5.0) == o.fantasy_mean(5.0));
}

TEST_CASE("one-step-ahead at the query point itself") {
    std::mt19937_64 g(3);
    const KernelSpec k{4.0, 0.3};
    const double noise = 0.05;
    const GpPosterior gp = GpPosterior::fit(k, noise, random_points(g, 1, 4, 0.0, 2.0), random_values(g, 4, 2.0));
    const double v = gp.posterior(pt(0.9)).variance;
    const OneStepAhead o = gp.one_step_ahead(pt(0.9), pt(0.9));
    CHECK(o.fantasy_variance() == doctest::Approx(v * noise / (v + noise)).epsilon(1e-10));
}

TEST_CASE("one-step-ahead matches a true refit") {
    std::mt19937_64 g(17);
    std::normal_distribution<double> nd(0.0, 3.0);
    const KernelSpec k{9.0, 0.4};
    for (int rep = 0; rep < 50; ++rep) {
        const GpPosterior gp =
            GpPosterior::fit(k, 1e-3, random_points(g, 2, 6, 0.0, 1.0), random_values(g, 6, 3.0));
        const PointSet q = random_points(g, 2, 2, -0.2, 1.2);
        const double y_star = nd(g);
        const OneStepAhead o = gp.one_step_ahead(q.col(0), q.col(1));
        const GpPosterior refit = gp.add_observation(q.col(1), y_star);
        const Prediction p = refit.posterior(q.col(0));
        CHECK(std::abs(o.fantasy_mean(y_star) - p.mean) < 1e-8 * std::max(1.0, std::abs(p.mean)));
        CHECK(std::abs(o.fantasy_variance() - p.variance) < 1e-8 * k.signal_variance);

        // Slope equals the refit mean difference for a unit change of y*.
        const double base = o.star_mean;
        const double diff = gp.add_observation(q.col(1), base + 1.0).posterior(q.col(0)).mean -
                            gp.add_observation(q.col(1), base).posterior(q.col(0)).mean;
        CHECK(std::abs(o.slope - diff) < 1e-8);
    }
}

TEST_CASE("property: variance never increases when data is added") {
    std::mt19937_64 g(23);
    const KernelSpec k{100.0, 0.5};
    const PointSet X = random_points(g, 1, 30, -0.5, 5.5);
    const Eigen::VectorXd y = random_values(g, 30, 10.0);
    const PointSet q = random_points(g, 1, 40, -1.0, 6.0);
    GpPosterior gp(k, 1e-4, 1);
    Eigen::VectorXd prev = gp.project(q).variance;
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
        gp = gp.add_observation(X.col(i), y[i]);
        const Eigen::VectorXd cur = gp.project(q).variance;
        for (Eigen::Index j = 0; j < q.cols(); ++j) CHECK(cur[j] <= prev[j] + 1e-8);
        prev = cur;
    }
}

TEST_CASE("property: posterior covariance is positive semidefinite") {
    std::mt19937_64 g(29);
    const KernelSpec k{100.0, 0.5};
    for (int rep = 0; rep < 10; ++rep) {
        const GpPosterior gp =
            GpPosterior::fit(k, 1e-4, random_points(g, 1, 15, -0.5, 5.5), random_values(g, 15, 10.0));
        const Projection p = gp.project(random_points(g, 1, 25, -0.5, 5.5));
        const Eigen::MatrixXd cov = gp.posterior_cov(p, p);
        CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues();
        CHECK(eig.minCoeff() >= -1e-8 * k.signal_variance);
    }
}

TEST_CASE("property: incremental equals batch up to fifty points") {
    std::mt19937_64 g(31);
    for (const KernelSpec k : {KernelSpec{100.0, 0.5}, KernelSpec{std::exp(2.0), 2.0 * std::exp(-3.0)}}) {
        const Eigen::Index d = k.signal_variance == 100.0 ? 1 : 2;
        const PointSet X = random_points(g, d, 50, 0.0, 2.0);
        const Eigen::VectorXd y = random_values(g, 50, std::sqrt(k.signal_variance));
        const PointSet q = random_points(g, d, 30, 0.0, 2.0);
        GpPosterior inc(k, 1e-4, d);
        for (Eigen::Index i = 0; i < 50; ++i) {
            inc = inc.add_observation(X.col(i), y[i]);
            const GpPosterior batch = GpPosterior::fit(k, 1e-4, X.leftCols(i + 1), y.head(i + 1));
            const Projection a = inc.project(q), b = batch.project(q);
            const double mscale = std::max(1.0, b.mean.cwiseAbs().maxCoeff());
            CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() / mscale < 1e-8);
            CHECK((a.variance - b.variance).cwiseAbs().maxCoeff() / k.signal_variance < 1e-8);
        }
    }
}

TEST_CASE("ill-conditioned data escalates jitter") {
    // Many near-duplicate points with large signal variance and tiny noise.
    const KernelSpec k{std::exp(8.0), 2.0};
    GpPosterior gp(k, 1e-4, 2);
    for (int i = 0; i < 30; ++i) gp = gp.add_observation(Eigen::Vector2d(1e-9 * i, 0.0), 1.0);
    const Prediction p = gp.posterior(Eigen::Vector2d(0.0, 0.0));
    CHECK(std::isfinite(p.mean));
    CHECK(p.variance >= gp.variance_floor());
    CHECK(gp.jitter() <= 1e-4 * k.signal_variance);
}

TEST_CASE("variance floor keeps predictions finite") {
    const KernelSpec k{1.0, 1.0};
    const GpPosterior gp = GpPosterior(k, 1e-12, 1).add_observation(pt(0.0), 0.0);
    CHECK(gp.posterior(pt(0.0)).variance >= 1e-12 * k.signal_variance);
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(GpPosterior(KernelSpec{1.0, 1.0}, 0.0, 1), ParameterError);
    const GpPosterior gp(KernelSpec{1.0, 1.0}, 1e-4, 1);
    CHECK_THROWS_AS(gp.add_observation(pt(NAN), 1.0), ParameterError);
    CHECK_THROWS_AS(gp.add_observation(Eigen::Vector2d(0.0, 0.0), 1.0), ParameterError);
}

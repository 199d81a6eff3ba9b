#include "arcbandit/arc.hpp"
#include "arcbandit/belief.hpp"
#include "arcbandit/market.hpp"
#include "arcbandit/rng.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>

using namespace arcbandit;

namespace {

const GlmSpec<double> kSpec = logistic_spec<double>();

ArmSet<double> grid_arms()
{
    VectorXd prices(10);
    prices << 19, 39, 59, 79, 99, 159, 199, 249, 299, 399;
    return pricing_arms<double>(prices, 270.0);
}

/// Small instance with unit-scale features and prices, suited to finite differences.
struct SmallInstance {
    ArmSet<double> arms;
    GaussianBelief<double> belief;
    VectorXd a;
    double lambda;
};

SmallInstance random_small_instance(Rng& rng)
{
    SmallInstance inst;
    const Index k_arms = 1 + static_cast<Index>(rng() % 5);
    inst.arms.features.resize(k_arms, 2);
    for (Index k = 0; k < k_arms; ++k)
        inst.arms.features.row(k) = standard_normal(2, rng).transpose();
    inst.arms.prices = VectorXd::Constant(k_arms, 1.0) + 3.0 * VectorXd::NullaryExpr(k_arms, [&] { return uniform01(rng); });
    inst.arms.arrivals = VectorXd::Constant(k_arms, 1.0) + 20.0 * VectorXd::NullaryExpr(k_arms, [&] { return uniform01(rng); });
    inst.belief.mean = 0.7 * standard_normal(2, rng);
    MatrixXd g(2, 2);
    g << standard_normal(2, rng).transpose(), standard_normal(2, rng).transpose();
    inst.belief.cov = 0.3 * (g * g.transpose() + 0.2 * MatrixXd::Identity(2, 2));
    inst.a = 3.0 * standard_normal(k_arms, rng);
    inst.lambda = 0.2 + 2.0 * uniform01(rng);
    return inst;
}

} // namespace

TEST_CASE("softmax values and limits")
{
    VectorXd a(2);
    a << 1.0, 2.0;
    const VectorXd nu = softmax_nu<double>(a, 1.0);
    CHECK(nu(0) == doctest::Approx(0.268941421369995).epsilon(1e-12));
    CHECK(nu(1) == doctest::Approx(0.731058578630005).epsilon(1e-12));

    const VectorXd flat = softmax_nu<double>(VectorXd::Zero(3), 0.37);
    CHECK((flat.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);

    VectorXd b(3);
    b << 1.0, 4.0, 2.0;
    const VectorXd cold = softmax_nu<double>(b, 1e-3);
    CHECK(cold(1) == 1.0);
    CHECK(cold(0) < 1e-300);
    const VectorXd hot = softmax_nu<double>(b, 1e9);
    CHECK((hot.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-8);

    VectorXd huge(2);
    huge << 1e6, 1e6 + 1.0;
    CHECK(softmax_nu<double>(huge, 1.0).allFinite());
}

TEST_CASE("softmax sensitivity matrix")
{
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const VectorXd a = standard_normal(6, rng);
        const MatrixXd eta = softmax_eta<double>(a, 0.7);
        CHECK(eta.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
        CHECK((eta - eta.transpose()).cwiseAbs().maxCoeff() == 0.0);

        // eta is the Jacobian of nu with respect to a/lambda
        const double h = 1e-6;
        const VectorXd base = softmax_nu<double>(a, 0.7);
        VectorXd shifted = a;
        shifted(2) += h * 0.7;
        const VectorXd fd = (softmax_nu<double>(shifted, 0.7) - base) / h;
        CHECK((fd - eta.col(2)).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("expected reward estimate and temperature")
{
    const auto arms = grid_arms();
    GaussianBelief<double> b{VectorXd::Zero(2), MatrixXd::Identity(2, 2)};
    const VectorXd f = f_tilde(b, arms, kSpec);
    for (Index k = 0; k < arms.size(); ++k)
        CHECK(f(k) == doctest::Approx(270.0 * arms.prices(k) * 0.5));
    CHECK(arc_temperature(b, 1.0) == doctest::Approx(std::sqrt(2.0)));

    b.mean = default_market_prior().mean;
    VectorXd one(1);
    one << 100.0;
    CHECK(f_tilde(b, pricing_arms<double>(one, 270.0), kSpec)(0) == doctest::Approx(7025.0326199184265));

    GaussianBelief<double> up = b;
    up.mean(0) += 0.1;
    CHECK((f_tilde(up, arms, kSpec).array() > f_tilde(b, arms, kSpec).array()).all());
}

TEST_CASE("temperature scales linearly with the covariance")
{
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        MatrixXd g = MatrixXd::NullaryExpr(3, 3, [&] { return standard_normal(1, rng)(0); });
        GaussianBelief<double> b{VectorXd::Zero(3), g * g.transpose()};
        GaussianBelief<double> doubled{b.mean, 2.0 * b.cov};
        CHECK(arc_temperature(doubled, 0.3) == 2.0 * arc_temperature(b, 0.3));
    }
}

TEST_CASE("learning term vanishes without uncertainty")
{
    const auto arms = grid_arms();
    GaussianBelief<double> b{default_market_prior().mean, MatrixXd::Zero(2, 2)};
    const VectorXd a = f_tilde(b, arms, kSpec);
    CHECK(learning_term<double>(a, b, arms, kSpec, 1.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("learning term for a single arm")
{
    VectorXd price(1);
    price << 2.0;
    const auto arms = pricing_arms<double>(price, 30.0);
    GaussianBelief<double> b{VectorXd::Constant(2, 0.1), MatrixXd::Identity(2, 2) * 0.4};
    const VectorXd x = arms.features.row(0).transpose();
    const double y = x.dot(b.mean);
    const double r = x.dot(b.cov * x);
    const double s = 30.0 * oracle::sigmoid(y) * (1.0 - oracle::sigmoid(y));
    const double w = s / (s * r + 1.0);
    const double sg = oracle::sigmoid(y);
    const double curvature = 30.0 * 2.0 * sg * (1 - sg) * (1 - 2 * sg);
    const double expected = 0.5 * w * curvature * r * r;
    for (double lambda : {0.01, 1.0, 100.0})
        CHECK(learning_term<double>(VectorXd::Zero(1), b, arms, kSpec, lambda)(0) == doctest::Approx(expected));
}

TEST_CASE("variance bracket of the learning term is nonnegative")
{
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const auto inst = random_small_instance(rng);
        const detail::LearningModel<double> model(inst.belief, inst.arms, kSpec);
        const VectorXd nu = softmax_nu(inst.a, inst.lambda);
        for (Index k = 0; k < inst.arms.size(); ++k) {
            const VectorXd b = model.slope.cwiseProduct(model.cross.row(k).transpose());
            const double bracket = nu.dot(b.cwiseAbs2()) - std::pow(nu.dot(b), 2);
            REQUIRE(bracket >= -1e-12 * std::max(1.0, nu.dot(b.cwiseAbs2())));
        }
        // The spread part alone: lambda -> infinity removes it, so L(lambda) >= L(inf) componentwise.
        const VectorXd with = model(nu, inst.lambda);
        const VectorXd without = model(nu, 1e300);
        REQUIRE(((with - without).array() >= -1e-12 * (1.0 + with.cwiseAbs().maxCoeff())).all());
    }
}

TEST_CASE("learning term agrees with the tensor-form definition")
{
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto inst = random_small_instance(rng);
        const VectorXd fast = learning_term<double>(inst.a, inst.belief, inst.arms, kSpec, inst.lambda);
        const VectorXd slow = oracle::ldef_learning_term(inst.a, inst.belief, inst.arms, inst.lambda);
        const double scale = std::max(fast.cwiseAbs().maxCoeff(), 1e-12);
        REQUIRE((fast - slow).cwiseAbs().maxCoeff() / scale < 1e-4);
    }
}

TEST_CASE("fixed point with vanishing lookahead is the reward estimate")
{
    const auto arms = grid_arms();
    GaussianBelief<double> b{VectorXd::Zero(2), MatrixXd::Identity(2, 2) * 1e-4};
    ArcConfig<double> cfg;
    cfg.beta = 1e-15;
    const auto sol = solve_fixed_point(b, arms, kSpec, cfg);
    CHECK(sol.converged);
    CHECK((sol.a - f_tilde(b, arms, kSpec)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("symmetric arms give a symmetric solution")
{
    ArmSet<double> arms;
    arms.features = MatrixXd::Ones(4, 2);
    arms.features.col(1).setConstant(50.0);
    arms.prices = VectorXd::Constant(4, 50.0);
    arms.arrivals = VectorXd::Constant(4, 270.0);
    GaussianBelief<double> b{default_market_prior().mean, default_market_prior().cov * 10.0};
    const auto sol = solve_fixed_point(b, arms, kSpec, ArcConfig<double>{});
    CHECK(sol.converged);
    CHECK((sol.a.array() - sol.a(0)).abs().maxCoeff() == 0.0);
    CHECK((sol.nu.array() - 0.25).abs().maxCoeff() < 1e-15);
}

TEST_CASE("solved fixed point satisfies the equation")
{
    const auto arms = grid_arms();
    Rng rng(10);
    ArcConfig<double> cfg;
    cfg.beta = 1.0 - 1.0 / 365.0;
    int converged = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        GaussianBelief<double> b{default_market_prior().mean, default_market_prior().cov};
        b.mean += 0.2 * standard_normal(2, rng).cwiseProduct(VectorXd::Constant(2, 1.0));
        b.mean(1) = -0.004 + 0.002 * standard_normal(1, rng)(0);
        b.cov *= std::pow(10.0, 3.0 * uniform01(rng) - 2.0);
        const auto sol = solve_fixed_point(b, arms, kSpec, cfg);
        const double factor = cfg.beta / (1.0 - cfg.beta);
        const VectorXd rhs = f_tilde(b, arms, kSpec) + factor * learning_term(sol.a, b, arms, kSpec, sol.lambda);
        const double res = (sol.a - rhs).cwiseAbs().maxCoeff();
        CHECK(res == doctest::Approx(sol.residual).epsilon(1e-6));
        CHECK(sol.converged == (sol.residual <= cfg.fp_tol));
        CHECK(in_simplex(sol.nu));
        if (sol.converged)
            ++converged;
    }
    CHECK(converged >= trials * 99 / 100);
}

TEST_CASE("solver argument checks")
{
    const auto arms = grid_arms();
    GaussianBelief<double> b{VectorXd::Zero(2), MatrixXd::Zero(2, 2)};
    CHECK_THROWS_AS(solve_fixed_point(b, arms, kSpec, ArcConfig<double>{}), std::invalid_argument);
    b.cov.setIdentity();
    ArcConfig<double> bad;
    bad.beta = 1.0;
    CHECK_THROWS_AS(solve_fixed_point(b, arms, kSpec, bad), std::invalid_argument);
    bad = ArcConfig<double>{};
    bad.rho = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ArcConfig<double>{};
    bad.damping = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("ARC decision limits")
{
    const auto arms = grid_arms();
    GaussianBelief<double> exact{default_market_prior().mean, MatrixXd::Zero(2, 2)};
    ArcSolution<double> sol;
    const auto greedy = arc_select(exact, arms, kSpec, ArcConfig<double>{}, 0.5, &sol);
    CHECK(greedy.arm == argmax_lowest(f_tilde(exact, arms, kSpec)));
    CHECK(greedy.probs(greedy.arm) == 1.0);
    CHECK(sol.converged);

    GaussianBelief<double> b{default_market_prior().mean, default_market_prior().cov};
    ArcConfig<double> hot;
    hot.rho = 1e12;
    const auto spread = arc_select(b, arms, kSpec, hot, 0.5);
    CHECK((spread.probs.array() - 0.1).abs().maxCoeff() < 1e-3);

    // rho -> 0: the modal arm of nu settles on argmax a
    Index last_mode = -1;
    for (double rho : {1e-2, 1e-3, 1e-4, 1e-5}) {
        ArcConfig<double> cold;
        cold.rho = rho;
        const auto d = arc_select(b, arms, kSpec, cold, 0.5, &sol);
        Index mode = 0;
        sol.nu.maxCoeff(&mode);
        CHECK(mode == argmax_lowest(sol.a));
        if (last_mode >= 0)
            CHECK(mode == last_mode);
        last_mode = mode;
        CHECK(d.arm == mode);
    }
}

TEST_CASE("ARC probabilities concentrate as the belief sharpens")
{
    const auto arms = grid_arms();
    const auto market = default_market_prior();
    const VectorXd theta = market.mean;
    GaussianBelief<double> b{VectorXd::Zero(2), MatrixXd::Identity(2, 2)};
    ArcConfig<double> cfg;
    cfg.rho = 1000.0;
    cfg.beta = 1.0 - 1.0 / 365.0;
    Rng rng(14);
    double first_max = 0.0;
    double last_max = 0.0;
    for (int t = 1; t <= 200; ++t) {
        const auto d = arc_select(b, arms, kSpec, cfg, uniform01(rng));
        if (t == 1)
            first_max = d.probs.maxCoeff();
        last_max = d.probs.maxCoeff();
        const auto day = simulate_day(theta, d.arm, arms, kSpec, 270.0, rng);
        if (day.arrivals > 0)
            b = update_woodbury(b, BatchObservation{day.arrivals, day.purchases, d.arm}, arms, kSpec);
    }
    CHECK(first_max < 1.0);
    CHECK(last_max > first_max);
    CHECK(last_max > 0.99);
}

TEST_CASE("ARC in extended precision")
{
    const auto spec = logistic_spec<long double>();
    Vector<long double> prices(3);
    prices << 19, 99, 399;
    const auto arms = pricing_arms<long double>(prices, 270.0L);
    GaussianBelief<long double> b{Vector<long double>::Zero(2), Matrix<long double>::Identity(2, 2) * 1e-3L};
    b.mean << -0.6L, -0.004L;
    const auto sol = solve_fixed_point(b, arms, spec, ArcConfig<long double>{});
    CHECK(sol.converged);
    CHECK(in_simplex(sol.nu, 1e-15L));
}

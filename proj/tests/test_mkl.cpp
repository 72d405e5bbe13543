#include "akt/mkl.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace akt;
using testing_support::worst_increase;

TEST_CASE("mkl_adversarial_loss") {
    std::mt19937_64 rng(1);
    const MatrixXd X = oracle::random_matrix(rng, 7, 2);
    const VectorXd a = oracle::random_vector(rng, 7);
    const KernelSpec k = KernelSpec::gaussian(0.9);
    const VectorXd x = oracle::random_vector(rng, 2);

    const MklModel one = make_mkl_model(X, {k}, {a});
    CHECK(mkl_adversarial_loss(one, x, 0.4, 0.3) == doctest::Approx(adversarial_loss(make_model(X, k, a), x, 0.4, 0.3)).epsilon(1e-13));

    const MklModel zero = make_mkl_model(X, {k, KernelSpec::linear()}, {VectorXd::Zero(7), VectorXd::Zero(7)});
    CHECK(mkl_adversarial_loss(zero, x, -1.2, 0.5) == doctest::Approx(1.44).epsilon(1e-15));

    for (int t = 0; t < 10; ++t) {
        const MklModel m = make_mkl_model(X, {k, KernelSpec::linear()}, {oracle::random_vector(rng, 7), oracle::random_vector(rng, 7)});
        const double y = oracle::uniform(rng, -2, 2);
        CHECK(mkl_adversarial_loss(m, x, y, oracle::uniform(rng, 0, 1)) >= mkl_adversarial_loss(m, x, y, 0.0));
    }
}

TEST_CASE("mkl_weighted_solve") {
    std::mt19937_64 rng(2);
    const Index n = 12;
    const MatrixXd X = oracle::random_matrix(rng, n, 2);
    const MatrixXd K1 = oracle::gram(KernelSpec::gaussian(1.0), X);
    const MatrixXd K2 = oracle::gram(KernelSpec::linear(), X);
    const VectorXd y = oracle::random_vector(rng, n);
    const VectorXd w = (oracle::random_vector(rng, n).array().abs() + 0.3).matrix();

    SUBCASE("one kernel is the weighted ridge solve") {
        const auto a = mkl_weighted_solve(std::vector<MatrixXd>{K1}, y, w, {0.05});
        const VectorXd ref = weighted_krr_solve(K1, y, w, 0.05);
        CHECK((a[0] - ref).norm() <= 1e-10 * ref.norm());
    }
    SUBCASE("two copies of one kernel split the fit evenly") {
        const auto a = mkl_weighted_solve(std::vector<MatrixXd>{K1, K1}, y, w, {0.1, 0.1});
        CHECK((a[0] - a[1]).norm() <= 1e-10 * a[0].norm());
        // Two identical blocks at lambda behave like one block at lambda / 2.
        const VectorXd single = weighted_krr_solve(K1, y, w, 0.05);
        CHECK((K1 * (a[0] + a[1]) - K1 * single).norm() <= 1e-9 * (K1 * single).norm());
    }
    SUBCASE("matches gradient descent on the joint quadratic") {
        const std::vector<MatrixXd> Ks{K1, K2};
        const std::vector<double> lam{0.05, 0.2};
        const auto a = mkl_weighted_solve(Ks, y, w, lam);
        const double got = oracle::mkl_weighted_objective(Ks, y, w, lam, a);
        const double ref = oracle::mkl_weighted_gd(Ks, y, w, lam, 200000);
        CHECK(got == doctest::Approx(ref).epsilon(1e-5));
        CHECK(got <= ref * (1.0 + 1e-9));
    }
    SUBCASE("first-order conditions hold for every block") {
        const std::vector<MatrixXd> Ks{K1, K2};
        const std::vector<double> lam{0.02, 0.3};
        const auto a = mkl_weighted_solve(Ks, y, w, lam);
        const VectorXd r = y - K1 * a[0] - K2 * a[1];
        for (std::size_t j = 0; j < 2; ++j) {
            const VectorXd g = -(2.0 / n) * Ks[j] * (w.array() * r.array()).matrix() + 2.0 * lam[j] * Ks[j] * a[j];
            CHECK(g.norm() < 1e-6 * (1.0 + y.norm()));
        }
    }
}

TEST_CASE("mkl_update_weights reduces to the single-kernel rule") {
    VectorXd r(4);
    r << 0.3, -1.0, 2.0, 0.0;
    const WeightState s = update_weights(r, 1.7, 0.4, 1e-8);
    const MklWeightState m = mkl_update_weights(r, {1.7}, 0.4, 1e-8);
    CHECK(m.w == s.w);
    CHECK(m.lambdas.size() == 1);
    CHECK(m.lambdas[0] == s.lambda);
}

TEST_CASE("fit_adversarial_mkl") {
    std::mt19937_64 rng(3);
    const Index n = 14;
    const MatrixXd X = oracle::random_matrix(rng, n, 2);
    const VectorXd y = (X.col(0).array().sin() + 0.1 * oracle::random_vector(rng, n).array()).matrix();
    SolverConfig c;
    c.delta = 0.15;

    SUBCASE("one kernel reproduces the single-kernel fit") {
        const KernelSpec k = KernelSpec::gaussian(1.0);
        const MklModel m = fit_adversarial_mkl(X, y, {k}, c);
        const FittedModel s = fit_adversarial(X, y, k, c);
        CHECK(m.summary.iterations == s.summary.iterations);
        CHECK(std::abs(m.summary.objective - s.summary.objective) <= 1e-10 * s.summary.objective);
        CHECK((m.train_predictions() - s.train_predictions()).cwiseAbs().maxCoeff() <= 1e-6);
    }
    SUBCASE("two kernels reach the subgradient optimum") {
        const std::vector<KernelSpec> ks{KernelSpec::gaussian(1.0), KernelSpec::linear()};
        SolverConfig cc = c;
        cc.max_iter = 1000;
        cc.tol = 1e-12;
        const MklModel m = fit_adversarial_mkl(X, y, ks, cc);
        const std::vector<MatrixXd> Ks{oracle::gram(ks[0], X), oracle::gram(ks[1], X)};
        const double ref = oracle::subgradient_mkl(Ks, y, cc.delta, 1000000);
        CHECK(m.summary.objective == doctest::Approx(ref).epsilon(1e-4));
        CHECK(mkl_adversarial_objective(Ks, y, m.alphas, cc.delta) == doctest::Approx(m.summary.objective).epsilon(1e-12));
        CHECK(worst_increase(m.summary) <= 10 * cc.epsilon);
    }
    SUBCASE("a linear target loads on the linear kernel") {
        const MatrixXd Z = oracle::random_matrix(rng, 40, 2);
        const VectorXd t = 2.0 * Z.col(0);
        const MklModel m = fit_adversarial_mkl(Z, t, {KernelSpec::gaussian(1.0), KernelSpec::linear()}, c);
        CHECK(m.per_kernel_norms[1] / (m.per_kernel_norms[0] + m.per_kernel_norms[1]) > 0.5);
        CHECK(worst_increase(m.summary) <= 10 * c.epsilon);
    }
    SUBCASE("JSON round trip") {
        const MklModel m = fit_adversarial_mkl(X, y, {KernelSpec::gaussian(1.0), KernelSpec::linear()}, c);
        const nlohmann::json j = m;
        CHECK(j.contains("kernels"));
        CHECK(j.contains("alphas"));
        CHECK(j.contains("norms"));
        const MklModel back = mkl_model_from_json(nlohmann::json::parse(j.dump()));
        CHECK((predict(back, X) - m.train_predictions()).norm() <= 1e-12);
    }
}

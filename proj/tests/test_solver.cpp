#include "akt/data.hpp"
#include "akt/solver.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace akt;
using testing_support::worst_increase;

namespace {

struct Problem {
    MatrixXd X;
    VectorXd y;
};

Problem sine_problem(std::mt19937_64& rng, Index n, double noise = 0.2) {
    Problem p;
    p.X = (oracle::random_matrix(rng, n, 1).array() * 0.5).matrix();
    p.y = (2.0 * M_PI * p.X.col(0).array()).sin().matrix() + oracle::random_vector(rng, n, noise);
    return p;
}

}  // namespace

TEST_CASE("adversarial_loss special cases") {
    std::mt19937_64 rng(1);
    const MatrixXd X = oracle::random_matrix(rng, 6, 2);
    const VectorXd a = oracle::random_vector(rng, 6);
    const FittedModel m = make_model(X, KernelSpec::gaussian(1.0), a);
    const VectorXd x = oracle::random_vector(rng, 2);
    const double fx = predict(m, x.transpose())[0];
    CHECK(adversarial_loss(m, x, 0.7, 0.0) == doctest::Approx((0.7 - fx) * (0.7 - fx)).epsilon(1e-13));
    const FittedModel zero = make_model(X, KernelSpec::gaussian(1.0), VectorXd::Zero(6));
    CHECK(adversarial_loss(zero, x, 1.5, 0.3) == doctest::Approx(2.25).epsilon(1e-15));
    const double clean = adversarial_loss(m, x, 0.7, 0.0);
    for (double d : {0.01, 0.3, 2.0}) CHECK(adversarial_loss(m, x, 0.7, d) >= clean);
}

TEST_CASE("adversarial_loss equals the line-search worst case") {
    std::mt19937_64 rng(2);
    for (const auto& k : {KernelSpec::gaussian(0.8), KernelSpec::matern(1.0, MaternNu::ThreeHalves), KernelSpec::linear()}) {
        for (int t = 0; t < 10; ++t) {
            const MatrixXd X = oracle::random_matrix(rng, 8, 3);
            const VectorXd a = oracle::random_vector(rng, 8);
            const VectorXd x = oracle::random_vector(rng, 3);
            const double y = oracle::uniform(rng, -2, 2), delta = oracle::uniform(rng, 0.01, 1.0);
            const double ref = oracle::line_search_adversarial_loss(k, X, a, x, y, delta, rng);
            CHECK(adversarial_loss(make_model(X, k, a), x, y, delta) == doctest::Approx(ref).epsilon(1e-8));
        }
    }
}

TEST_CASE("weighted_krr_solve") {
    SUBCASE("scalar instance") {
        MatrixXd K(1, 1);
        K << 1;
        VectorXd y(1), w(1);
        y << 2;
        w << 1;
        CHECK(weighted_krr_solve(K, y, w, 1.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("unit weights give plain ridge") {
        std::mt19937_64 rng(3);
        const MatrixXd X = oracle::random_matrix(rng, 30, 2);
        const MatrixXd K = oracle::gram(KernelSpec::gaussian(1.0), X);
        const VectorXd y = oracle::random_vector(rng, 30);
        const VectorXd ref = (K + 30 * 0.01 * MatrixXd::Identity(30, 30)).lu().solve(y);
        CHECK((weighted_krr_solve(K, y, VectorXd::Ones(30), 0.01) - ref).norm() <= 1e-10 * ref.norm());
        CHECK((solve_krr(K, y, 0.01) - ref).norm() <= 1e-10 * ref.norm());
    }
    SUBCASE("direct normal equations") {
        std::mt19937_64 rng(4);
        for (Index n : {5, 40, 150}) {
            const MatrixXd A = oracle::random_matrix(rng, n, n);
            const MatrixXd K = A * A.transpose() / static_cast<double>(n) + 1e-3 * MatrixXd::Identity(n, n);
            const VectorXd y = oracle::random_vector(rng, n);
            const VectorXd w = (oracle::random_vector(rng, n).array().abs() + 0.2).matrix();
            const double lam = oracle::uniform(rng, 1e-3, 1.0);
            const VectorXd ref = oracle::weighted_krr_direct(K, y, w, lam);
            CHECK((weighted_krr_solve(K, y, w, lam) - ref).norm() <= 1e-10 * ref.norm());
        }
    }
    SUBCASE("conjugate-gradient path agrees with the factorization") {
        std::mt19937_64 rng(5);
        const MatrixXd X = oracle::random_matrix(rng, 120, 2);
        const GramMatrix G = gram_matrix(KernelSpec::gaussian(0.5), X);
        const VectorXd y = oracle::random_vector(rng, 120);
        const VectorXd w = (oracle::random_vector(rng, 120).array().abs() + 0.5).matrix();
        LinearSolveOptions cg;
        cg.cg_threshold = 10;
        const VectorXd a = weighted_krr_solve(G, y, w, 0.01);
        const VectorXd b = weighted_krr_solve(G, y, w, 0.01, cg);
        CHECK((a - b).norm() <= 1e-8 * a.norm());
    }
    SUBCASE("shrinkage as lambda grows") {
        std::mt19937_64 rng(6);
        const MatrixXd X = oracle::random_matrix(rng, 20, 2);
        const MatrixXd K = oracle::gram(KernelSpec::gaussian(1.0), X);
        const VectorXd y = oracle::random_vector(rng, 20);
        double prev = std::numeric_limits<double>::infinity();
        for (double lam : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
            const double nrm = weighted_krr_solve(K, y, VectorXd::Ones(20), lam).norm();
            CHECK(nrm < prev);
            prev = nrm;
        }
    }
    SUBCASE("invalid inputs") {
        const MatrixXd K = MatrixXd::Identity(2, 2);
        VectorXd y(2), w(2);
        y << 1, 2;
        w << 1, 0;
        CHECK_THROWS_AS((void)weighted_krr_solve(K, y, w, 0.1), std::invalid_argument);
        CHECK_THROWS_AS((void)weighted_krr_solve(K, y, VectorXd::Ones(2), 0.0), std::invalid_argument);
    }
}

TEST_CASE("update_weights closed forms") {
    VectorXd r(3);
    r << 1.0, -1.0, 1.0;
    const double delta = 0.5, fnorm = 2.0;  // delta |f| = 1
    const WeightState s = update_weights(r, fnorm, delta, 1e-14);
    for (Index i = 0; i < 3; ++i) CHECK(s.w[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.lambda == doctest::Approx(2.0 * delta * delta).epsilon(1e-12));

    VectorXd z = VectorXd::Zero(2);
    const double eps = 1e-6;
    const WeightState t = update_weights(z, fnorm, delta, eps);
    CHECK(std::isfinite(t.w[0]));
    CHECK(t.w[0] == doctest::Approx(1.0 + std::sqrt(1.0 + eps) / std::sqrt(eps)).epsilon(1e-10));

    VectorXd tiny = VectorXd::Constant(4, 1e-6);
    const WeightState u = update_weights(tiny, 100.0, 1.0, 1e-16);
    CHECK(u.w[0] > 1e7);
    CHECK(u.lambda == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fit_krr small closed form") {
    MatrixXd X(2, 2);
    X << 1, 0, 0, 1;
    VectorXd y(2);
    y << 2, 4;
    const FittedModel m = fit_krr(X, y, KernelSpec::linear(), 0.5);
    CHECK(m.alpha[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.alpha[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("fit_krr interpolates as lambda vanishes") {
    // Evenly spaced points and a narrow Gaussian keep the Gram matrix well conditioned.
    Problem p;
    p.X = VectorXd::LinSpaced(15, 0.0, 1.0);
    p.y = (2.0 * M_PI * p.X.col(0).array()).sin().matrix() + 0.1 * VectorXd::LinSpaced(15, -1.0, 1.0);
    const KernelSpec k = KernelSpec::gaussian(100.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-2, 1e-4, 1e-6, 1e-9}) {
        const double res = (fit_krr(p.X, p.y, k, lambda).train_predictions() - p.y).norm();
        CHECK(res < prev);
        prev = res;
    }
    CHECK(prev <= 1e-5 * p.y.norm());
}

TEST_CASE("fit_adversarial reaches the subgradient optimum") {
    std::mt19937_64 rng(8);
    const Problem p = sine_problem(rng, 10);
    SolverConfig c;
    c.delta = 0.1;
    c.max_iter = 500;
    c.tol = 1e-12;
    const FittedModel m = fit_adversarial(p.X, p.y, KernelSpec::gaussian(1.0), c);
    const MatrixXd K = oracle::gram(KernelSpec::gaussian(1.0), p.X);
    const double ref = oracle::subgradient_adversarial(K, p.y, 0.1, 1000000).objective;
    CHECK(m.summary.objective == doctest::Approx(ref).epsilon(1e-6));
    CHECK(oracle::adversarial_objective(K, p.y, m.alpha, 0.1) == doctest::Approx(m.summary.objective).epsilon(1e-12));
    CHECK(worst_increase(m.summary) <= 10 * c.epsilon);
}

TEST_CASE("fit_adversarial structural properties") {
    std::mt19937_64 rng(9);
    const Problem p = sine_problem(rng, 40);
    const KernelSpec k = KernelSpec::matern(2.0, MaternNu::FiveHalves);

    SUBCASE("monotone shrinkage in delta") {
        double prev = std::numeric_limits<double>::infinity();
        for (double d : {0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
            SolverConfig c;
            c.delta = d;
            const FittedModel m = fit_adversarial(p.X, p.y, k, c);
            CHECK(m.rkhs_norm <= prev + 1e-6);
            CHECK(worst_increase(m.summary) <= 10 * c.epsilon);
            prev = m.rkhs_norm;
        }
    }
    SUBCASE("tiny delta approaches ridge with lambda = epsilon") {
        SolverConfig c;
        c.delta = 1e-12;
        const FittedModel a = fit_adversarial(p.X, p.y, k, c);
        const FittedModel r = fit_krr(p.X, p.y, k, c.epsilon);
        CHECK((a.train_predictions() - r.train_predictions()).cwiseAbs().maxCoeff() <= 1e-4);
    }
    SUBCASE("delta zero dispatches to ridge") {
        SolverConfig c;
        c.delta = 0.0;
        const FittedModel a = fit_adversarial(p.X, p.y, k, c);
        const FittedModel r = fit_krr(p.X, p.y, k, c.epsilon);
        CHECK(a.summary.method == "krr");
        CHECK((a.alpha - r.alpha).norm() <= 1e-12 * (1.0 + r.alpha.norm()));
    }
    SUBCASE("inner solve at unit weights is ridge") {
        const MatrixXd K = gram_matrix(k, p.X).entries;
        const VectorXd a = weighted_krr_solve(K, p.y, VectorXd::Ones(40), 0.05);
        CHECK((a - fit_krr(p.X, p.y, k, 0.05).alpha).norm() <= 1e-12 * a.norm());
    }
    SUBCASE("negative delta is rejected") {
        SolverConfig c;
        c.delta = -0.1;
        CHECK_THROWS_AS((void)fit_adversarial(p.X, p.y, k, c), std::invalid_argument);
    }
}

TEST_CASE("fit_adversarial rate: error falls as n doubles") {
    double prev = std::numeric_limits<double>::infinity();
    const KernelSpec k = KernelSpec::matern(10.0, MaternNu::FiveHalves);
    for (Index n : {32, 64, 128, 256, 512}) {
        std::vector<double> errs;
        for (int rep = 0; rep < 5; ++rep) {
            const Dataset tr = synthesize({SyntheticTarget::Sine, n, 0.1, static_cast<std::uint64_t>(1000 * n + rep)});
            const Dataset te = synthesize({SyntheticTarget::Sine, 300, 0.0, static_cast<std::uint64_t>(7 + rep)});
            SolverConfig c;
            c.delta = 1.0 / std::sqrt(static_cast<double>(n));
            const double ym = tr.y.mean();
            const FittedModel m = fit_adversarial(tr.X, (tr.y.array() - ym).matrix(), k, c);
            errs.push_back(((predict(m, te.X).array() + ym).matrix() - te.f_star).squaredNorm() / 300.0);
        }
        const double med = quantile(errs, 0.5);
        CHECK(med < prev);
        prev = med;
    }
}

TEST_CASE("predict") {
    std::mt19937_64 rng(10);
    const MatrixXd X = oracle::random_matrix(rng, 9, 2);
    const VectorXd a = oracle::random_vector(rng, 9);
    const KernelSpec k = KernelSpec::laplacian(0.6);
    const FittedModel m = make_model(X, k, a);
    CHECK((predict(m, X) - oracle::gram(k, X) * a).norm() <= 1e-12);
    CHECK(predict(make_model(X, k, VectorXd::Zero(9)), X).isZero());
    const VectorXd z = oracle::random_vector(rng, 2);
    double ref = 0.0;
    for (Index i = 0; i < 9; ++i) ref += a[i] * kernel_eval(k, X.row(i), z);
    CHECK(predict(m, z.transpose())[0] == doctest::Approx(ref).epsilon(1e-13));
    CHECK_THROWS_AS((void)predict(m, MatrixXd::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("model JSON round trip") {
    std::mt19937_64 rng(11);
    const Problem p = sine_problem(rng, 12);
    SolverConfig c;
    c.delta = 0.2;
    const FittedModel m = fit_adversarial(p.X, p.y, KernelSpec::gaussian(2.0), c);
    const nlohmann::json j = m;
    CHECK(j.contains("kernel"));
    CHECK(j.contains("alpha"));
    CHECK(j.contains("x_train"));
    CHECK(j.contains("rkhs_norm"));
    const FittedModel back = model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.alpha == m.alpha);
    CHECK(back.X_train == m.X_train);
    CHECK((predict(back, p.X) - m.train_predictions()).norm() <= 1e-12);
}

TEST_CASE("cross-validation") {
    CHECK(default_gamma_grid() == std::vector<double>{10, 1, 0.1, 1e-2, 1e-3});
    CHECK(default_lambda_grid() == std::vector<double>{1, 0.1, 1e-2, 1e-3});

    std::mt19937_64 rng(12);
    const Problem p = sine_problem(rng, 80);
    const KernelSpec base = KernelSpec::gaussian(1.0);

    const CvResult single = cross_validate_krr(p.X, p.y, base, {3.0}, {0.05}, 4);
    CHECK(single.kernel.gamma == 3.0);
    CHECK(single.lambda == 0.05);
    CHECK(single.solver_lambda(80) == 0.05);

    const CvResult pick = cross_validate_krr(p.X, p.y, base, {5.0}, {1e-3, 1e3}, 5);
    CHECK(pick.lambda == 1e-3);

    const CvResult diag = cross_validate_krr(p.X, p.y, base, {5.0}, {0.1}, 5, 0, RidgeGridScale::Diagonal);
    CHECK(diag.solver_lambda(80) == doctest::Approx(0.1 / 80.0));

    const CvResult adv1 = cross_validate_adversarial(p.X, p.y, base, {2.0}, 3);
    CHECK(adv1.kernel.gamma == 2.0);

    // The selected bandwidth should predict held-out data about as well as the best one.
    const Problem held = sine_problem(rng, 400, 0.0);
    const std::vector<double> grid = {100.0, 10.0, 1.0, 0.1, 0.01};
    const CvResult adv = cross_validate_adversarial(p.X, p.y, base, grid, 5);
    auto held_mse = [&](double g) {
        SolverConfig c;
        c.delta = 1.0 / std::sqrt(80.0);
        const FittedModel m = fit_adversarial(p.X, p.y, base.with_gamma(g), c);
        return (predict(m, held.X) - held.y).squaredNorm() / 400.0;
    };
    double best = std::numeric_limits<double>::infinity();
    for (double g : grid) best = std::min(best, held_mse(g));
    CHECK(held_mse(adv.kernel.gamma) <= 2.0 * best);

    CHECK_THROWS_AS((void)cross_validate_krr(p.X, p.y, base, {}, {0.1}, 5), std::invalid_argument);
    CHECK_THROWS_AS((void)cross_validate_krr(p.X, p.y, base, {1.0}, {0.1}, 1), std::invalid_argument);
}

TEST_CASE("folds partition the sample") {
    const auto f = make_folds(23, 5, 4);
    std::vector<int> seen(23, 0);
    for (const auto& fold : f) {
        for (Index i : fold) ++seen[static_cast<std::size_t>(i)];
    }
    for (int s : seen) CHECK(s == 1);
    CHECK(make_folds(23, 5, 4) == f);
}

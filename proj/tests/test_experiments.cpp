#include "akt/experiments.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace akt;
using testing_support::worst_increase;

TEST_CASE("delta policy") {
    CHECK(DeltaChoice::parse("auto").automatic);
    CHECK(DeltaChoice::parse("auto").resolve(400) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(DeltaChoice::parse("0.3").resolve(400) == 0.3);
    CHECK_THROWS_AS((void)DeltaChoice::parse("0.3x"), std::invalid_argument);
    CHECK_THROWS_AS((void)DeltaChoice::parse("-1"), std::invalid_argument);
    const nlohmann::json j = DeltaChoice{};
    CHECK(j == "auto");
}

TEST_CASE("config plumbing") {
    CHECK(config_hash({{"a", 1}}) == config_hash({{"a", 1}}));
    CHECK(config_hash({{"a", 1}}) != config_hash({{"a", 2}}));
    CHECK(config_hash({{"a", 1}}).size() == 16);
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(require_known_keys({{"x", 1}}, {"y"}, "test"), std::invalid_argument);

    const TargetScaler t = TargetScaler::fit(Eigen::Vector3d(1, 2, 3), true);
    CHECK(t.inverse(t.forward(Eigen::Vector3d(4, 5, 6))).isApprox(Eigen::Vector3d(4, 5, 6)));
    CHECK(TargetScaler::fit(Eigen::Vector3d(1, 2, 3), false).scale == 1.0);
}

TEST_CASE("rate sweep configuration") {
    CHECK_THROWS_AS((void)nlohmann::json({{"n_grid", {64, 32}}}).get<RateSweepConfig>(), std::invalid_argument);
    CHECK_THROWS_AS((void)nlohmann::json({{"reps", 0}}).get<RateSweepConfig>(), std::invalid_argument);
    CHECK_THROWS_AS((void)nlohmann::json({{"grid", {32}}}).get<RateSweepConfig>(), std::invalid_argument);
    const RateSweepConfig c = nlohmann::json({{"target", "square"}, {"reps", 3}}).get<RateSweepConfig>();
    CHECK(c.target == SyntheticTarget::Square);
    CHECK(c.n_grid == std::vector<Index>{32, 64, 128, 256, 512, 1024});
}

TEST_CASE("log-log fit") {
    const LogLogFit f = fit_loglog({10, 100, 1000}, {1.0, 0.1, 0.01});
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_FALSE(f.degenerate);
    CHECK(fit_loglog({10, 100}, {1e-30, 1e-31}).degenerate);
}

TEST_CASE("noiseless linear sweep hits the numerical floor") {
    RateSweepConfig c;
    c.target = SyntheticTarget::Linear;
    c.kernel = KernelSpec::linear();
    c.noise_sigma = 0.0;
    c.reps = 2;
    c.n_grid = {32, 64, 128};
    c.n_test = 100;
    // The residual floor scales with the smoothing constant; shrink it to reach roundoff.
    c.solver.epsilon = 1e-24;
    c.solver.max_iter = 500;
    c.solver.tol = 1e-14;
    const RateSweepResult r = run_rate_sweep(c);
    for (double m : r.median_mse) CHECK(m < 1e-20);
    CHECK(r.fit.degenerate);
}

TEST_CASE("rate sweep is reproducible and reports resolved deltas") {
    RateSweepConfig c;
    c.reps = 2;
    c.n_grid = {32, 64};
    c.n_test = 50;
    std::vector<RatePoint> streamed;
    const RateSweepResult a = run_rate_sweep(c, [&](const RatePoint& p) { streamed.push_back(p); });
    const RateSweepResult b = run_rate_sweep(c);
    REQUIRE(a.points.size() == 4);
    CHECK(streamed.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.points[i].mse == b.points[i].mse);
        CHECK(a.points[i].delta == doctest::Approx(1.0 / std::sqrt(static_cast<double>(a.points[i].n))));
    }
}

TEST_CASE("benchmark configuration") {
    CHECK_THROWS_AS((void)nlohmann::json({{"bootstrap_reps", 0}}).get<BenchmarkConfig>(), std::invalid_argument);
    CHECK_THROWS_AS((void)nlohmann::json({{"methods", {"magic"}}}).get<BenchmarkConfig>(), std::invalid_argument);
    CHECK_THROWS_AS((void)nlohmann::json({{"test_fraction", 1.5}}).get<BenchmarkConfig>(), std::invalid_argument);
    CHECK(default_benchmark_attacks().size() == 4);
}

TEST_CASE("benchmark on a small synthetic problem") {
    BenchmarkConfig c;
    c.data.synthetic = {SyntheticTarget::Sine, 120, 0.1, 3};
    c.bootstrap_reps = 50;
    c.gamma_grid = {10.0, 1.0};
    c.lambda_grid = {0.1, 0.01};
    c.folds = 3;
    c.adv_input.epochs = 20;
    const BenchmarkResult r = run_benchmark(c);
    CHECK(r.n_train == 96);
    CHECK(r.n_test == 24);
    // adv_kern_auto, ridge_cv, two fixed deltas, two input-space norms; each clean plus four attacks.
    CHECK(r.trained.size() == 6);
    CHECK(r.rows.size() == 30);
    for (const auto& t : r.trained) {
        if (t.model.summary.method == "adversarial") CHECK(worst_increase(t.model.summary) <= 1e-7);
    }
    for (const auto& row : r.rows) {
        CHECK(row.bootstrap.q1 <= row.bootstrap.median);
        CHECK(row.bootstrap.median <= row.bootstrap.q3);
    }
    const std::string table = format_benchmark_table(r);
    CHECK(table.find("adv_kern_auto") != std::string::npos);
    CHECK(table.find("linf<=0.1") != std::string::npos);
}

TEST_CASE("bounds report") {
    BoundsConfig c;
    c.data.synthetic = {SyntheticTarget::Sine, 64, 0.1, 1};
    c.mc_samples = 200;
    c.lambda_grid = {0.1};
    const nlohmann::json j = run_bounds(c);
    CHECK(j.at("complexity").at("gamma_bar_analytic").get<double>() == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
    CHECK(j.at("bounds").size() == 2 * 1 * 2);
    const ComplexityReport rep = j.at("complexity").get<ComplexityReport>();
    CHECK(rep.n == 64);
}

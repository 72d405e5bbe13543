#include "akt/data.hpp"
#include "akt/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace akt;
using testing_support::data_path;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("akt_test_" + name);
    std::ofstream(path) << content;
    return path.string();
}

}  // namespace

TEST_CASE("load_csv basics") {
    const std::string p = write_temp("three.csv", "a,b,y\n1.5,2,3\n-4,5e-1,6\n7,8,0.25\n");
    const Dataset ds = load_csv(p, "y");
    CHECK(ds.n() == 3);
    CHECK(ds.p() == 2);
    CHECK(ds.X(0, 0) == 1.5);
    CHECK(ds.X(1, 1) == 0.5);
    CHECK(ds.y[2] == 0.25);
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(load_csv(p, "0").target_name == "a");

    const Dataset nt = load_csv(p, "");
    CHECK(nt.p() == 3);
    CHECK(nt.y.size() == 0);

    CHECK_THROWS_AS((void)load_csv(p, "zz"), std::invalid_argument);
    CHECK_THROWS_AS((void)load_csv("/nonexistent/file.csv", "y"), IoError);
    CHECK_THROWS_AS((void)load_csv(write_temp("ragged.csv", "a,y\n1,2\n3\n"), "y"), IoError);
}

TEST_CASE("load_csv categorical and missing values") {
    const std::string p = write_temp("cat.csv", "# comment\nkind,v,y\nb,1,2\na,2,3\n,3,4\nb,NA,5\nc,4,6\n");
    const Dataset ds = load_csv(p, "y");
    CHECK(ds.n() == 3);
    CHECK(ds.dropped_rows == 2);
    CHECK(ds.feature_names == std::vector<std::string>{"kind=a", "kind=b", "kind=c", "v"});
    CHECK(ds.X.row(0).sum() == 2.0);  // b one-hot plus v = 1
}

TEST_CASE("bundled datasets") {
    const Dataset d = load_csv(data_path("diabetes.csv"), "target");
    CHECK(d.n() == 442);
    CHECK(d.p() == 10);
    const Dataset a = load_csv(data_path("abalone.csv"), "Rings");
    CHECK(a.p() == 10);
    CHECK(a.n() + a.dropped_rows == 4177);
    CHECK(a.X.allFinite());
}

TEST_CASE("standardize") {
    Dataset tr, te;
    tr.X.resize(4, 3);
    tr.X << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 8;
    tr.y = VectorXd::Zero(4);
    tr.feature_names = {"a", "const", "b"};
    te.X.resize(2, 3);
    te.X << 10, 1, 0, 0, 2, 1;
    te.y = VectorXd::Zero(2);
    te.feature_names = tr.feature_names;
    const auto st = standardize(tr, {te});
    CHECK(st.train.p() == 2);
    CHECK(st.stats.dropped_names == std::vector<std::string>{"const"});
    for (Index c = 0; c < 2; ++c) {
        CHECK(std::abs(st.train.X.col(c).mean()) < 1e-10);
        const double sd = std::sqrt((st.train.X.col(c).array() - st.train.X.col(c).mean()).square().mean());
        CHECK(std::abs(sd - 1.0) < 1e-10);
    }
    // Test rows use the training statistics: mean 2.5, population std sqrt(1.25).
    CHECK(st.others[0].X(0, 0) == doctest::Approx((10 - 2.5) / std::sqrt(1.25)).epsilon(1e-14));
    // A second pass reuses the stored statistics and leaves the training set unchanged.
    const auto again = standardize(st.train);
    CHECK(again.train.X == st.train.X);
    const Dataset applied = apply_standardization(te, st.stats);
    CHECK(applied.X == st.others[0].X);
}

TEST_CASE("synthesize") {
    const Dataset s = synthesize({SyntheticTarget::Sine, 50, 0.0, 4});
    for (Index i = 0; i < 50; ++i) {
        CHECK(s.y[i] == std::sin(2.0 * M_PI * s.X(i, 0)));
        CHECK(s.X(i, 0) >= 0.0);
        CHECK(s.X(i, 0) <= 1.0);
    }
    const Dataset a = synthesize({SyntheticTarget::Square, 80, 0.1, 9});
    const Dataset b = synthesize({SyntheticTarget::Square, 80, 0.1, 9});
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    for (Index i = 0; i < 80; ++i) {
        const double v = a.f_star[i];
        CHECK((v == -1.0 || v == 0.0 || v == 1.0));
    }
}

TEST_CASE("split and bootstrap") {
    for (double f : {0.2, 0.33, 0.5}) {
        const SplitManifest m = split_indices(101, f, 3);
        CHECK(m.train.size() + m.test.size() == 101);
        CHECK(static_cast<long>(m.test.size()) == std::lround(f * 101));
    }
    CHECK_THROWS_AS((void)split_indices(10, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)split_indices(10, 1.0, 1), std::invalid_argument);
    const nlohmann::json j = split_indices(10, 0.2, 1);
    CHECK(j.at("test").size() == 2);

    const auto b = bootstrap_indices(25, 1, 7);
    REQUIRE(b.size() == 1);
    CHECK(b[0].size() == 25);
    CHECK_THROWS_AS((void)bootstrap_indices(25, 0, 7), std::invalid_argument);

    VectorXd y(6);
    y << 1, 2, 3, 4, 5, 6;
    const Summary3 q = quartiles(bootstrap_r2(y, y, bootstrap_indices(6, 200, 2)));
    CHECK(q.q1 == 1.0);
    CHECK(q.q3 == 1.0);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
}

TEST_CASE("bootstrap interquartile range narrows with more test points") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    auto iqr = [&](Index n) {
        VectorXd y(n), p(n);
        for (Index i = 0; i < n; ++i) {
            y[i] = nd(rng);
            p[i] = 0.8 * y[i] + 0.5 * nd(rng);
        }
        const Summary3 q = quartiles(bootstrap_r2(y, p, bootstrap_indices(n, 2000, 5)));
        return q.q3 - q.q1;
    };
    CHECK(iqr(400) < iqr(100));
}

#pragma once

#include "akt/attacks.hpp"
#include "akt/bounds.hpp"
#include "akt/data.hpp"
#include "akt/mkl.hpp"
#include "akt/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace akt {

/// Adversarial radius policy: a fixed value or 1/sqrt(n_train).
struct DeltaChoice {
    bool automatic = true;
    double value = 0.0;

    [[nodiscard]] double resolve(Index n_train) const;
    [[nodiscard]] static DeltaChoice parse(const std::string& text);
};

void to_json(nlohmann::json& j, const DeltaChoice& d);
void from_json(const nlohmann::json& j, DeltaChoice& d);

/// Rejects keys outside `allowed` with std::invalid_argument naming `where`.
void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

/// Data either read from a CSV file or generated.
struct DataSource {
    std::string path;  // empty selects the synthetic generator
    std::string target_column;
    bool has_header = true;
    SyntheticSpec synthetic;

    [[nodiscard]] Dataset load() const;
};

void to_json(nlohmann::json& j, const DataSource& d);
void from_json(const nlohmann::json& j, DataSource& d);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
[[nodiscard]] std::string config_hash(const nlohmann::json& config);

/// Shortest round-trip decimal form of a double (deterministic CSV output).
[[nodiscard]] std::string format_number(double v);

/// Affine target map fitted on training targets; predictions are mapped back.
struct TargetScaler {
    double mean = 0.0;
    double scale = 1.0;

    [[nodiscard]] static TargetScaler fit(const VecRef& y, bool enabled);
    [[nodiscard]] VectorXd forward(const VecRef& y) const;
    [[nodiscard]] VectorXd inverse(const VecRef& f) const;
};

// ---------------------------------------------------------------- rate sweep

struct RateSweepConfig {
    SyntheticTarget target = SyntheticTarget::Sine;
    KernelSpec kernel = KernelSpec::matern(10.0, MaternNu::FiveHalves);
    std::string method = "adversarial";  // or "krr"
    double lambda = 1e-3;                // used by "krr"
    std::vector<Index> n_grid = {32, 64, 128, 256, 512, 1024};
    int reps = 10;
    double noise_sigma = 0.1;
    DeltaChoice delta;
    Index n_test = 500;
    std::uint64_t seed = 0;
    SolverConfig solver = {0.0, 1e-8, 100, 1e-8};

    void validate() const;
};

void to_json(nlohmann::json& j, const RateSweepConfig& c);
void from_json(const nlohmann::json& j, RateSweepConfig& c);

struct RatePoint {
    Index n = 0;
    int rep = 0;
    double delta = 0.0;
    double mse = 0.0;  // test error against the noiseless target
    int iterations = 0;
    double max_increase = 0.0;  // largest objective increase between outer iterations
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool degenerate = false;  // every error sits at the numerical floor
};

/// Ordinary least squares of log(err) on log(n).
[[nodiscard]] LogLogFit fit_loglog(const std::vector<double>& n, const std::vector<double>& err);

struct RateSweepResult {
    std::vector<RatePoint> points;
    std::vector<Index> n;
    std::vector<double> median_mse;
    LogLogFit fit;
};

/// Points are emitted as they finish through `on_point` (in deterministic order per n).
[[nodiscard]] RateSweepResult run_rate_sweep(const RateSweepConfig& config,
                                             const std::function<void(const RatePoint&)>& on_point = {});

// ----------------------------------------------------------------- benchmark

struct BenchmarkConfig {
    DataSource data;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    std::vector<std::string> methods = {"adv_kern_auto", "ridge_cv", "adv_kern_fixed", "adv_input"};
    std::vector<double> fixed_deltas = {0.01, 0.1};
    std::vector<AttackSpec> attacks;  // defaults to l2 and linf at radii 0.01 and 0.1
    int bootstrap_reps = 1000;
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    std::vector<double> gamma_grid = default_gamma_grid();
    std::vector<double> lambda_grid = default_lambda_grid();
    RidgeGridScale lambda_scale = RidgeGridScale::Diagonal;
    int folds = 5;
    bool standardize_target = true;
    std::vector<AttackNorm> adv_input_norms = {AttackNorm::L2, AttackNorm::Linf};
    InputTrainingOptions adv_input;
    SolverConfig solver = {0.0, 1e-8, 100, 1e-8};

    void validate() const;
};

[[nodiscard]] std::vector<AttackSpec> default_benchmark_attacks();

void to_json(nlohmann::json& j, const BenchmarkConfig& c);
void from_json(const nlohmann::json& j, BenchmarkConfig& c);

struct BenchmarkRow {
    std::string method;
    std::string setting;  // "clean" or the attack label
    double r2 = 0.0;      // on the full test set
    Summary3 bootstrap;
};

struct TrainedMethod {
    std::string method;
    FittedModel model;
    nlohmann::json info;  // selected hyperparameters and fit diagnostics
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    std::vector<TrainedMethod> trained;
    Index n_train = 0;
    Index n_test = 0;
    Index dropped_rows = 0;
};

[[nodiscard]] std::string attack_label(const AttackSpec& a);

/// Progress messages go to `log` when set.
[[nodiscard]] BenchmarkResult run_benchmark(const BenchmarkConfig& config,
                                            const std::function<void(const std::string&)>& log = {});

/// Fixed-width text rendering of median (Q1-Q3) per method and setting.
[[nodiscard]] std::string format_benchmark_table(const BenchmarkResult& result);

// -------------------------------------------------------------------- bounds

struct BoundsConfig {
    DataSource data;
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    bool standardize = true;
    int mc_samples = 2000;
    std::uint64_t seed = 0;
    std::vector<double> sigma_grid = {0.1, 1.0};
    std::vector<double> R_grid = {1.0};
    std::vector<DeltaChoice> delta_grid = {DeltaChoice{}};
    std::vector<double> lambda_grid = {};  // ridge bounds; empty skips them

    void validate() const;
};

void to_json(nlohmann::json& j, const BoundsConfig& c);
void from_json(const nlohmann::json& j, BoundsConfig& c);

/// Complexity report plus theorem bounds over the configured grid, with
/// gamma = gamma_bar (analytic) and beta = beta_bar.
[[nodiscard]] nlohmann::json run_bounds(const BoundsConfig& config);

}  // namespace akt

#pragma once

#include "akt/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace akt {

struct SolverConfig {
    double delta = 0.0;     // adversarial radius in feature space
    double epsilon = 1e-8;  // smoothing added under the square roots of the reweighting
    int max_iter = 100;
    double tol = 1e-8;      // stop once the relative objective decrease drops below this

    void validate() const;
};

void to_json(nlohmann::json& j, const SolverConfig& c);
void from_json(const nlohmann::json& j, SolverConfig& c);

/// Controls for the linear solves. Systems larger than `cg_threshold` are
/// solved by conjugate gradients instead of a dense factorization.
struct LinearSolveOptions {
    Index cg_threshold = 6000;
    double cg_tol = 1e-13;
    int cg_max_iter = 10000;
};

/// Sample weights and ridge level of one reweighting step.
struct WeightState {
    VectorXd w;
    double lambda = 0.0;
};

struct FitSummary {
    std::string method;
    int iterations = 0;
    double objective = 0.0;  // exact, unsmoothed objective at the returned iterate
    bool converged = true;
    double delta = 0.0;
    double lambda = 0.0;     // ridge level of the last solve
    std::vector<double> objective_history;
    double wall_seconds = 0.0;
};

void to_json(nlohmann::json& j, const FitSummary& s);

struct FittedModel {
    VectorXd alpha;
    MatrixXd X_train;
    KernelSpec kernel;
    double rkhs_norm = 0.0;
    GramMatrix K_train;
    FitSummary summary;

    /// Predictions on the training inputs, K_train * alpha.
    [[nodiscard]] VectorXd train_predictions() const { return K_train.entries * alpha; }
};

/// Builds a model around given coefficients, computing the cached Gram matrix
/// and RKHS norm.
[[nodiscard]] FittedModel make_model(const MatRef& X, const KernelSpec& kernel, VectorXd alpha);

/// sqrt(alpha' K alpha), clamped at zero.
[[nodiscard]] double rkhs_norm(const MatrixXd& K, const VectorXd& alpha);

/// Worst-case squared loss over the feature ball of radius delta:
/// (|y - f(x)| + delta * ||f||)^2.
[[nodiscard]] double adversarial_loss(const FittedModel& model, const VecRef& x, double y, double delta);

/// Mean of (|y_i - f(x_i)| + delta ||f||)^2 over the training design, with f = K alpha.
[[nodiscard]] double adversarial_objective(const MatrixXd& K, const VectorXd& y, const VectorXd& alpha, double delta);

/// Solves (W K + n lambda I) alpha = W y, W = diag(w), in the symmetric form
/// (S K S + n lambda I) z = S y, alpha = S z with S = W^(1/2).
/// `warm_start` seeds the iterative path.
[[nodiscard]] VectorXd weighted_krr_solve(const GramMatrix& K, const VecRef& y, const VecRef& w, double lambda,
                                          const LinearSolveOptions& opts = {},
                                          const VectorXd* warm_start = nullptr);
[[nodiscard]] VectorXd weighted_krr_solve(const MatrixXd& K, const VecRef& y, const VecRef& w, double lambda,
                                          const LinearSolveOptions& opts = {},
                                          const VectorXd* warm_start = nullptr);

/// One reweighting step: rho_i = sqrt(r_i^2 + eps), s = sqrt(delta^2 ||f||^2 + eps),
/// eta0 = rho / (rho + s), eta1 = s / (rho + s), w = 1 / eta0, lambda = mean(delta^2 / eta1).
[[nodiscard]] WeightState update_weights(const VecRef& residuals, double rkhs_norm, double delta, double epsilon);

/// Dual coefficients plus diagnostics from the reweighted iteration on a fixed Gram matrix.
struct AdversarialSolution {
    VectorXd alpha;
    FitSummary summary;
};

[[nodiscard]] AdversarialSolution solve_adversarial(const MatrixXd& K, const VecRef& y, const SolverConfig& config,
                                                    const LinearSolveOptions& opts = {});
[[nodiscard]] VectorXd solve_krr(const MatrixXd& K, const VecRef& y, double lambda, const LinearSolveOptions& opts = {});

[[nodiscard]] FittedModel fit_adversarial(const MatRef& X, const VecRef& y, const KernelSpec& kernel,
                                          const SolverConfig& config, const LinearSolveOptions& opts = {});
[[nodiscard]] FittedModel fit_krr(const MatRef& X, const VecRef& y, const KernelSpec& kernel, double lambda,
                                  const LinearSolveOptions& opts = {});

[[nodiscard]] VectorXd predict(const FittedModel& model, const MatRef& X_new);

/// Grid defaults used by the cross-validation routines.
[[nodiscard]] std::vector<double> default_gamma_grid();
[[nodiscard]] std::vector<double> default_lambda_grid();

/// Fold membership for k-fold CV: a seeded shuffle cut into nearly equal parts.
[[nodiscard]] std::vector<std::vector<Index>> make_folds(Index n, int folds, std::uint64_t seed);

struct CvCell {
    double gamma = 0.0;
    double lambda = 0.0;  // 0 for the adversarial search
    double mse = 0.0;
};

/// How lambda-grid values enter the ridge system during cross-validation.
/// PerSample uses them as the lambda of (1/n) sum (y - f)^2 + lambda ||f||^2;
/// Diagonal adds them to the Gram diagonal, (K + lambda I) alpha = y, which is
/// PerSample with lambda / n on each training set.
enum class RidgeGridScale { PerSample, Diagonal };

[[nodiscard]] std::string_view to_string(RidgeGridScale s);
[[nodiscard]] RidgeGridScale ridge_grid_scale_from_string(std::string_view name);

struct CvResult {
    KernelSpec kernel;
    double lambda = 0.0;       // selected grid value (0 for the adversarial search)
    double mse = 0.0;
    RidgeGridScale scale = RidgeGridScale::PerSample;

    /// Ridge level in the solver's per-sample convention for a training set of size n.
    [[nodiscard]] double solver_lambda(Index n) const {
        return scale == RidgeGridScale::Diagonal ? lambda / static_cast<double>(n) : lambda;
    }
    std::vector<CvCell> cells;
};

/// Grid search over (gamma, lambda) minimizing mean validation MSE. Ties go to
/// the larger lambda, then the larger gamma. `base` fixes family, degree and nu.
[[nodiscard]] CvResult cross_validate_krr(const MatRef& X, const VecRef& y, const KernelSpec& base,
                                          const std::vector<double>& gamma_grid,
                                          const std::vector<double>& lambda_grid, int folds, std::uint64_t seed = 0,
                                          RidgeGridScale scale = RidgeGridScale::PerSample);

/// Searches gamma only, with delta = 1/sqrt(fold training size) unless `delta` is given.
[[nodiscard]] CvResult cross_validate_adversarial(const MatRef& X, const VecRef& y, const KernelSpec& base,
                                                  const std::vector<double>& gamma_grid, int folds,
                                                  std::uint64_t seed = 0, std::optional<double> delta = std::nullopt,
                                                  const SolverConfig& config = {});

void to_json(nlohmann::json& j, const FittedModel& m);
[[nodiscard]] FittedModel model_from_json(const nlohmann::json& j);

}  // namespace akt

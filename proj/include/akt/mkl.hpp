#pragma once

#include "akt/solver.hpp"

#include <vector>

namespace akt {

/// Additive model f = sum_j f_j with f_j in the RKHS of kernels[j].
struct MklModel {
    std::vector<KernelSpec> kernels;
    std::vector<VectorXd> alphas;
    MatrixXd X_train;
    std::vector<double> per_kernel_norms;
    std::vector<GramMatrix> K_train;
    FitSummary summary;

    [[nodiscard]] std::size_t size() const { return kernels.size(); }
    [[nodiscard]] double total_norm() const;
    [[nodiscard]] VectorXd train_predictions() const;
};

[[nodiscard]] MklModel make_mkl_model(const MatRef& X, const std::vector<KernelSpec>& kernels,
                                      std::vector<VectorXd> alphas);

[[nodiscard]] VectorXd predict(const MklModel& model, const MatRef& X_new);

/// (|y - f(x)| + delta * sum_j ||f_j||)^2.
[[nodiscard]] double mkl_adversarial_loss(const MklModel& model, const VecRef& x, double y, double delta);

/// Mean of the loss above over a training design with precomputed Gram matrices.
[[nodiscard]] double mkl_adversarial_objective(const std::vector<MatrixXd>& Ks, const VectorXd& y,
                                               const std::vector<VectorXd>& alphas, double delta);

/// Minimizes (1/n) sum_i w_i (y_i - sum_j (K_j a_j)_i)^2 + sum_j lambda_j a_j' K_j a_j.
/// All kernels share one n x n solve: with Kt = sum_j K_j / (n lambda_j) and
/// S = W^(1/2), (I + S Kt S) u = S y and a_j = S u / (n lambda_j).
[[nodiscard]] std::vector<VectorXd> mkl_weighted_solve(const std::vector<MatrixXd>& Ks, const VecRef& y,
                                                       const VecRef& w, const std::vector<double>& lambdas,
                                                       const LinearSolveOptions& opts = {});
[[nodiscard]] std::vector<VectorXd> mkl_weighted_solve(const std::vector<GramMatrix>& Ks, const VecRef& y,
                                                       const VecRef& w, const std::vector<double>& lambdas,
                                                       const LinearSolveOptions& opts = {});

/// Reweighting for the multi-kernel objective: per-sample shares
/// eta0_i = rho_i / (rho_i + sum s), eta^j_i = s_j / (rho_i + sum s), with
/// rho_i = sqrt(r_i^2 + eps) and s_j = sqrt(delta^2 ||f_j||^2 + eps).
struct MklWeightState {
    VectorXd w;
    std::vector<double> lambdas;
};

[[nodiscard]] MklWeightState mkl_update_weights(const VecRef& residuals, const std::vector<double>& norms,
                                                double delta, double epsilon);

struct MklSolution {
    std::vector<VectorXd> alphas;
    FitSummary summary;
};

[[nodiscard]] MklSolution solve_adversarial_mkl(const std::vector<MatrixXd>& Ks, const VecRef& y,
                                                const SolverConfig& config, const LinearSolveOptions& opts = {});

[[nodiscard]] MklModel fit_adversarial_mkl(const MatRef& X, const VecRef& y, const std::vector<KernelSpec>& kernels,
                                           const SolverConfig& config, const LinearSolveOptions& opts = {});

void to_json(nlohmann::json& j, const MklModel& m);
[[nodiscard]] MklModel mkl_model_from_json(const nlohmann::json& j);

}  // namespace akt

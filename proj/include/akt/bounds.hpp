#pragma once

#include "akt/solver.hpp"

#include <cstdint>

namespace akt {

struct ComplexityReport {
    Index n = 0;
    double gamma_bar_mc = 0.0;        // Monte Carlo estimate of E (1/n) sqrt(w' K w)
    double gamma_bar_analytic = 0.0;  // sqrt(tr K) / n
    double beta_bar = 0.0;            // critical radius of the spectrum
    VectorXd spectrum;                // eigenvalues of K / n, nonincreasing
    int mc_samples = 0;
    double mc_stderr = 0.0;
};

void to_json(nlohmann::json& j, const ComplexityReport& r);
void from_json(const nlohmann::json& j, ComplexityReport& r);

/// Eigenvalues of K / n in nonincreasing order; values below 1e-10 * mu_1 are set to zero.
[[nodiscard]] VectorXd normalized_spectrum(const MatrixXd& K);

/// Gaussian complexity of the unit RKHS ball on the design of K. The Monte
/// Carlo draws w ~ N(0, I) are taken in the eigenbasis of K, where
/// w' K w = sum_i lambda_i z_i^2 with z ~ N(0, I).
[[nodiscard]] ComplexityReport gaussian_complexity(const GramMatrix& K, int mc_samples = 2000, std::uint64_t seed = 0);
[[nodiscard]] ComplexityReport gaussian_complexity(const MatrixXd& K, int mc_samples = 2000, std::uint64_t seed = 0);

/// Smallest b > 0 with b^2 >= sqrt(2/n) * sqrt(sum_i min(b^2, mu_i)); 0 for an all-zero spectrum.
[[nodiscard]] double critical_radius(const VecRef& spectrum, Index n);

/// Right-hand side of the critical-radius inequality at b.
[[nodiscard]] double critical_radius_rhs(const VecRef& spectrum, Index n, double b);

struct GammaBeta {
    double gamma_w = 0.0;
    double beta_w = 0.0;
};

/// gamma_w = (1/n) sqrt(w' K w); beta_w = ((1/n) sum w_i h_i) / sqrt(mean h^2) on the direction h.
[[nodiscard]] GammaBeta empirical_gamma_beta(const MatrixXd& K, const VecRef& h, const VecRef& w);

/// Mean squared gap between the model and f* on the design X.
[[nodiscard]] double excess_risk(const FittedModel& f_hat, const VecRef& f_star_values, const MatRef& X);

enum class Estimator { Adversarial, Ridge };

[[nodiscard]] std::string_view to_string(Estimator e);

struct BoundInputs {
    double sigma = 0.0;
    double R = 0.0;
    double delta_or_lambda = 0.0;
    double gamma = 0.0;
    double beta = 0.0;

    void validate() const;
};

struct BoundValues {
    double B_gamma = 0.0;
    double B_beta = 0.0;
    double min = 0.0;
};

/// Adversarial: B_gamma = 4 (2 sigma R / delta + R^2)(delta + gamma)^2,
///              B_beta  = 4 sigma delta R + 10 delta^2 R^2 + 16 sigma^2 beta^2.
/// Ridge:       B_gamma = 2 (R lambda + sigma gamma)^2 / lambda,
///              B_beta  = 2 (R^2 lambda + sigma^2 beta^2).
[[nodiscard]] BoundValues theorem_bounds(const BoundInputs& in, Estimator estimator);

/// Stated probability bound exp(-n^2 eps / (2 lambda_1)) for gamma_w exceeding
/// its mean by eps, with lambda_1 the top eigenvalue of K (n * mu_1).
[[nodiscard]] double gamma_tail_bound(Index n, double lambda1, double eps);

/// Gaussian-Lipschitz concentration bound exp(-n^2 eps^2 / (2 lambda_1)) for the same event.
[[nodiscard]] double gamma_lipschitz_tail_bound(Index n, double lambda1, double eps);

}  // namespace akt

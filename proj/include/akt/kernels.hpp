#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <string_view>

namespace akt {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;
using MatRef = Eigen::Ref<const Eigen::MatrixXd>;

enum class KernelFamily { Linear, Polynomial, Exponential, Gaussian, Laplacian, Matern };

/// Smoothness of the Matern family; only the half-integer closed forms are supported.
enum class MaternNu { Half, ThreeHalves, FiveHalves };

[[nodiscard]] std::string_view to_string(KernelFamily family);
[[nodiscard]] KernelFamily kernel_family_from_string(std::string_view name);
[[nodiscard]] double nu_value(MaternNu nu);
[[nodiscard]] MaternNu matern_nu_from_value(double nu);

/// Kernel family plus hyperparameters. `gamma` is an inverse length-scale
/// (the kernels below use it as exp(-gamma * r), exp(-gamma * r^2), ...).
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double gamma = 1.0;
    int degree = 2;
    MaternNu nu = MaternNu::FiveHalves;

    static KernelSpec linear() { return {KernelFamily::Linear, 1.0, 1, MaternNu::FiveHalves}; }
    static KernelSpec polynomial(int degree) { return {KernelFamily::Polynomial, 1.0, degree, MaternNu::FiveHalves}; }
    static KernelSpec exponential(double gamma) { return {KernelFamily::Exponential, gamma, 1, MaternNu::FiveHalves}; }
    static KernelSpec gaussian(double gamma) { return {KernelFamily::Gaussian, gamma, 1, MaternNu::FiveHalves}; }
    static KernelSpec laplacian(double gamma) { return {KernelFamily::Laplacian, gamma, 1, MaternNu::FiveHalves}; }
    static KernelSpec matern(double gamma, MaternNu nu) { return {KernelFamily::Matern, gamma, 1, nu}; }

    /// Throws std::invalid_argument when a hyperparameter is out of range.
    void validate() const;

    /// k(x, x) = 1 for every x.
    [[nodiscard]] bool normalized() const;
    /// k(x, x') depends on x - x' only.
    [[nodiscard]] bool translation_invariant() const;

    /// Same family with another bandwidth.
    [[nodiscard]] KernelSpec with_gamma(double g) const {
        KernelSpec out = *this;
        out.gamma = g;
        return out;
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

void to_json(nlohmann::json& j, const KernelSpec& spec);
void from_json(const nlohmann::json& j, KernelSpec& spec);

/// Kernel matrix K_ij = k(X_i, X'_j) over the rows of two point sets.
struct GramMatrix {
    MatrixXd entries;
    bool symmetric = false;

    [[nodiscard]] Index rows() const { return entries.rows(); }
    [[nodiscard]] Index cols() const { return entries.cols(); }
};

[[nodiscard]] double kernel_eval(const KernelSpec& spec, const VecRef& x, const VecRef& x2);

/// Gram matrix between the rows of X and X2. The symmetric flag is set when
/// both arguments hold the same point set.
[[nodiscard]] GramMatrix gram_matrix(const KernelSpec& spec, const MatRef& X, const MatRef& X2);
[[nodiscard]] GramMatrix gram_matrix(const KernelSpec& spec, const MatRef& X);

/// Gradient of x -> k(x_train, x). At the kinks of the non-smooth kernels the
/// zero subgradient component is returned.
[[nodiscard]] VectorXd kernel_gradient(const KernelSpec& spec, const VecRef& x_train, const VecRef& x);

/// f(z) = sum_i c_i k(X_i, z) and, when `grad` is non-null, its gradient in z.
[[nodiscard]] double kernel_expansion(const KernelSpec& spec, const MatRef& X, const VecRef& coeffs, const VecRef& z,
                                      VectorXd* grad = nullptr);

/// RKHS distance ||phi(x) - phi(x')||.
[[nodiscard]] double kernel_distance(const KernelSpec& spec, const VecRef& x, const VecRef& x2);

enum class InputNorm { L1, L2, Linf };

[[nodiscard]] std::string_view to_string(InputNorm norm);
[[nodiscard]] InputNorm input_norm_from_string(std::string_view name);

/// How the feature radius enters the translation-invariant radius formulas.
/// TrueDistance inverts 2 - 2 f(r) <= delta^2. PublishedTable reproduces the
/// printed forms, where delta takes the place of delta^2.
enum class RadiusConvention { TrueDistance, PublishedTable };

/// Input-space ball {dx : ||dx||_norm <= radius}. `bounded` is false when every
/// perturbation stays inside the feature ball (radius is then +inf).
struct InputBall {
    InputNorm norm = InputNorm::L2;
    double radius = 0.0;
    bool bounded = true;
};

/// Input ball covered by the feature ball of radius delta.
/// Polynomial kernels need the point norms; use polynomial_input_radius.
[[nodiscard]] InputBall input_radius_for_feature_radius(const KernelSpec& spec, double delta,
                                                        RadiusConvention convention = RadiusConvention::TrueDistance);

/// C * delta^(1/d) with C = 2^(-1/(2d)) * sqrt(2 + ||x||^2 + ||x'||^2).
[[nodiscard]] InputBall polynomial_input_radius(const KernelSpec& spec, double delta, double norm_x, double norm_x2);

/// Smallest feature radius whose true-distance input ball contains the input ball
/// of the given norm and radius in `dim` dimensions.
[[nodiscard]] double feature_radius_for_input_ball(const KernelSpec& spec, InputNorm norm, double radius, Index dim);

}  // namespace akt

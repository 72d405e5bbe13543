#include "akt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace akt {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt5 = 2.2360679774997896964091736687313;

void require_same_dim(Index a, Index b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    }
}

void require_finite(const VecRef& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

// Profile f(r) of a translation-invariant kernel, k(x, x') = f(r).
double profile(const KernelSpec& spec, double r) {
    switch (spec.family) {
        case KernelFamily::Exponential:
        case KernelFamily::Laplacian:
            return std::exp(-spec.gamma * r);
        case KernelFamily::Gaussian:
            return std::exp(-spec.gamma * r * r);
        case KernelFamily::Matern:
            switch (spec.nu) {
                case MaternNu::Half:
                    return std::exp(-spec.gamma * r);
                case MaternNu::ThreeHalves: {
                    const double a = kSqrt3 * spec.gamma * r;
                    return (1.0 + a) * std::exp(-a);
                }
                case MaternNu::FiveHalves: {
                    const double a = kSqrt5 * spec.gamma * r;
                    return (1.0 + a + a * a / 3.0) * std::exp(-a);
                }
            }
            break;
        default:
            break;
    }
    throw std::logic_error("profile: kernel is not translation invariant");
}

// Distance the profile is applied to (L1 for Laplacian, Euclidean otherwise).
InputNorm profile_norm(const KernelSpec& spec) {
    return spec.family == KernelFamily::Laplacian ? InputNorm::L1 : InputNorm::L2;
}

// Largest r with f(r) >= level, for a strictly decreasing profile with f(0) = 1.
double invert_profile(const KernelSpec& spec, double level) {
    const double g = spec.gamma;
    switch (spec.family) {
        case KernelFamily::Exponential:
        case KernelFamily::Laplacian:
            return -std::log(level) / g;
        case KernelFamily::Gaussian:
            return std::sqrt(-std::log(level) / g);
        case KernelFamily::Matern:
            if (spec.nu == MaternNu::Half) return -std::log(level) / g;
            break;
        default:
            throw std::logic_error("invert_profile: kernel is not translation invariant");
    }
    // Matern 3/2 and 5/2 have no elementary inverse; bracket and bisect.
    double lo = 0.0;
    double hi = 1.0 / g;
    while (profile(spec, hi) >= level) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (profile(spec, mid) >= level ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Polynomial: return "polynomial";
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Laplacian: return "laplacian";
        case KernelFamily::Matern: return "matern";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    for (auto f : {KernelFamily::Linear, KernelFamily::Polynomial, KernelFamily::Exponential, KernelFamily::Gaussian,
                   KernelFamily::Laplacian, KernelFamily::Matern}) {
        if (to_string(f) == name) return f;
    }
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

double nu_value(MaternNu nu) {
    switch (nu) {
        case MaternNu::Half: return 0.5;
        case MaternNu::ThreeHalves: return 1.5;
        case MaternNu::FiveHalves: return 2.5;
    }
    return 0.0;
}

MaternNu matern_nu_from_value(double nu) {
    if (nu == 0.5) return MaternNu::Half;
    if (nu == 1.5) return MaternNu::ThreeHalves;
    if (nu == 2.5) return MaternNu::FiveHalves;
    throw std::invalid_argument("Matern nu must be one of 0.5, 1.5, 2.5 (got " + std::to_string(nu) + ")");
}

void KernelSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("kernel gamma must be positive and finite");
    if (degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
}

bool KernelSpec::normalized() const { return translation_invariant(); }

bool KernelSpec::translation_invariant() const {
    return family != KernelFamily::Linear && family != KernelFamily::Polynomial;
}

void to_json(nlohmann::json& j, const KernelSpec& spec) {
    j = nlohmann::json{{"family", std::string(to_string(spec.family))},
                       {"gamma", spec.gamma},
                       {"degree", spec.degree},
                       {"nu", nu_value(spec.nu)}};
}

void from_json(const nlohmann::json& j, KernelSpec& spec) {
    if (!j.is_object()) throw std::invalid_argument("kernel spec must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "family" && key != "gamma" && key != "degree" && key != "nu") {
            throw std::invalid_argument("unknown kernel spec key '" + key + "'");
        }
    }
    KernelSpec out;
    out.family = kernel_family_from_string(j.at("family").get<std::string>());
    out.gamma = j.value("gamma", 1.0);
    out.degree = j.value("degree", out.family == KernelFamily::Polynomial ? 2 : 1);
    out.nu = matern_nu_from_value(j.value("nu", 2.5));
    out.validate();
    spec = out;
}

double kernel_eval(const KernelSpec& spec, const VecRef& x, const VecRef& x2) {
    require_same_dim(x.size(), x2.size(), "kernel_eval");
    require_finite(x, "kernel_eval");
    require_finite(x2, "kernel_eval");
    switch (spec.family) {
        case KernelFamily::Linear:
            return x.dot(x2);
        case KernelFamily::Polynomial:
            return std::pow(1.0 + x.dot(x2), spec.degree);
        case KernelFamily::Laplacian:
            return profile(spec, (x - x2).lpNorm<1>());
        case KernelFamily::Gaussian:
            return std::exp(-spec.gamma * (x - x2).squaredNorm());
        case KernelFamily::Exponential:
        case KernelFamily::Matern:
            return profile(spec, (x - x2).norm());
    }
    throw std::logic_error("kernel_eval: unhandled family");
}

GramMatrix gram_matrix(const KernelSpec& spec, const MatRef& X, const MatRef& X2) {
    require_same_dim(X.cols(), X2.cols(), "gram_matrix");
    if (!X.allFinite() || !X2.allFinite()) throw std::invalid_argument("gram_matrix: non-finite input");
    const bool same = X.rows() == X2.rows() && (X.data() == X2.data() || X == X2);
    const Index n = X.rows();
    const Index m = X2.rows();
    GramMatrix out;
    out.symmetric = same;
    out.entries.resize(n, m);

    switch (spec.family) {
        case KernelFamily::Linear:
        case KernelFamily::Polynomial: {
            out.entries.noalias() = X * X2.transpose();
            if (spec.family == KernelFamily::Polynomial) {
                out.entries = (out.entries.array() + 1.0).pow(static_cast<double>(spec.degree)).matrix();
            }
            break;
        }
        case KernelFamily::Laplacian: {
            for (Index j = 0; j < m; ++j) {
                for (Index i = 0; i < n; ++i) {
                    out.entries(i, j) = std::exp(-spec.gamma * (X.row(i) - X2.row(j)).lpNorm<1>());
                }
            }
            break;
        }
        default: {
            // Squared distances via the expansion, clamped against round-off.
            const VectorXd sq1 = X.rowwise().squaredNorm();
            const VectorXd sq2 = X2.rowwise().squaredNorm();
            MatrixXd d2 = -2.0 * X * X2.transpose();
            d2.colwise() += sq1;
            d2.rowwise() += sq2.transpose();
            d2 = d2.cwiseMax(0.0);
            if (spec.family == KernelFamily::Gaussian) {
                out.entries = (-spec.gamma * d2.array()).exp().matrix();
            } else {
                out.entries = d2.unaryExpr([&](double v) { return profile(spec, std::sqrt(v)); });
            }
            if (same) out.entries.diagonal().setOnes();
            break;
        }
    }
    if (same) {
        // Exact symmetry; the expansion above is only symmetric to round-off.
        MatrixXd sym = 0.5 * (out.entries + out.entries.transpose());
        out.entries = std::move(sym);
    }
    return out;
}

GramMatrix gram_matrix(const KernelSpec& spec, const MatRef& X) { return gram_matrix(spec, X, X); }

VectorXd kernel_gradient(const KernelSpec& spec, const VecRef& x_train, const VecRef& x) {
    require_same_dim(x_train.size(), x.size(), "kernel_gradient");
    require_finite(x, "kernel_gradient");
    const VectorXd diff = x - x_train;
    const double g = spec.gamma;
    switch (spec.family) {
        case KernelFamily::Linear:
            return x_train;
        case KernelFamily::Polynomial: {
            const double base = 1.0 + x_train.dot(x);
            const double scale = spec.degree * std::pow(base, spec.degree - 1);
            if (!std::isfinite(scale)) throw std::domain_error("kernel_gradient: polynomial overflow");
            return scale * x_train;
        }
        case KernelFamily::Gaussian:
            return -2.0 * g * std::exp(-g * diff.squaredNorm()) * diff;
        case KernelFamily::Laplacian: {
            const double k = std::exp(-g * diff.lpNorm<1>());
            return (-g * k) * diff.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
        }
        case KernelFamily::Exponential:
        case KernelFamily::Matern: {
            const double r = diff.norm();
            if (spec.family == KernelFamily::Exponential || spec.nu == MaternNu::Half) {
                if (r == 0.0) return VectorXd::Zero(x.size());
                return (-g * std::exp(-g * r) / r) * diff;
            }
            if (spec.nu == MaternNu::ThreeHalves) {
                const double a = kSqrt3 * g;
                return (-a * a * std::exp(-a * r)) * diff;
            }
            const double a = kSqrt5 * g;
            return (-(a * a / 3.0) * (1.0 + a * r) * std::exp(-a * r)) * diff;
        }
    }
    throw std::logic_error("kernel_gradient: unhandled family");
}

double kernel_expansion(const KernelSpec& spec, const MatRef& X, const VecRef& coeffs, const VecRef& z,
                        VectorXd* grad) {
    require_same_dim(X.cols(), z.size(), "kernel_expansion");
    require_same_dim(X.rows(), coeffs.size(), "kernel_expansion");
    require_finite(z, "kernel_expansion");
    const double g = spec.gamma;
    const Index n = X.rows();

    if (spec.family == KernelFamily::Linear || spec.family == KernelFamily::Polynomial) {
        const VectorXd dots = X * z;
        if (spec.family == KernelFamily::Linear) {
            if (grad) *grad = X.transpose() * coeffs;
            return coeffs.dot(dots);
        }
        const Eigen::ArrayXd base = dots.array() + 1.0;
        const double d = spec.degree;
        const Eigen::ArrayXd dk = d * base.pow(d - 1.0) * coeffs.array();
        if (grad) {
            if (!dk.allFinite()) throw std::domain_error("kernel_expansion: polynomial overflow");
            *grad = X.transpose() * dk.matrix();
        }
        return (base.pow(d) * coeffs.array()).sum();
    }

    const MatrixXd diff = (-X).rowwise() + z.transpose();  // row i: z - X_i
    if (spec.family == KernelFamily::Laplacian) {
        const Eigen::ArrayXd k = (-g * diff.array().abs().rowwise().sum()).exp();
        if (grad) {
            const MatrixXd sgn = diff.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
            *grad = sgn.transpose() * (-g * k * coeffs.array()).matrix();
        }
        return (k * coeffs.array()).sum();
    }

    const Eigen::ArrayXd r2 = diff.rowwise().squaredNorm().array();
    Eigen::ArrayXd k(n);
    Eigen::ArrayXd c(n);  // gradient of k_i is c_i * (z - X_i)
    if (spec.family == KernelFamily::Gaussian) {
        k = (-g * r2).exp();
        c = -2.0 * g * k;
    } else {
        const Eigen::ArrayXd r = r2.sqrt();
        const bool half = spec.family == KernelFamily::Exponential || spec.nu == MaternNu::Half;
        if (half) {
            k = (-g * r).exp();
            c = (r > 0.0).select(-g * k / r, 0.0);
        } else if (spec.nu == MaternNu::ThreeHalves) {
            const double a = kSqrt3 * g;
            const Eigen::ArrayXd e = (-a * r).exp();
            k = (1.0 + a * r) * e;
            c = -a * a * e;
        } else {
            const double a = kSqrt5 * g;
            const Eigen::ArrayXd e = (-a * r).exp();
            k = (1.0 + a * r + a * a * r2 / 3.0) * e;
            c = -(a * a / 3.0) * (1.0 + a * r) * e;
        }
    }
    if (grad) *grad = diff.transpose() * (c * coeffs.array()).matrix();
    return (k * coeffs.array()).sum();
}

double kernel_distance(const KernelSpec& spec, const VecRef& x, const VecRef& x2) {
    const double kxx = kernel_eval(spec, x, x);
    const double kyy = kernel_eval(spec, x2, x2);
    const double kxy = kernel_eval(spec, x, x2);
    const double sq = kxx - 2.0 * kxy + kyy;
    if (sq < 0.0) {
        const double scale = std::max(1.0, std::abs(kxx) + std::abs(kyy));
        if (sq < -1e-12 * scale) throw std::domain_error("kernel_distance: kernel is not positive semidefinite here");
        return 0.0;
    }
    return std::sqrt(sq);
}

std::string_view to_string(InputNorm norm) {
    switch (norm) {
        case InputNorm::L1: return "l1";
        case InputNorm::L2: return "l2";
        case InputNorm::Linf: return "linf";
    }
    return "unknown";
}

InputNorm input_norm_from_string(std::string_view name) {
    if (name == "l1") return InputNorm::L1;
    if (name == "l2") return InputNorm::L2;
    if (name == "linf") return InputNorm::Linf;
    throw std::invalid_argument("unknown norm '" + std::string(name) + "' (expected l1, l2 or linf)");
}

InputBall input_radius_for_feature_radius(const KernelSpec& spec, double delta, RadiusConvention convention) {
    spec.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("feature radius must be positive");
    if (spec.family == KernelFamily::Linear) return {InputNorm::L2, delta, true};
    if (spec.family == KernelFamily::Polynomial) {
        throw std::invalid_argument("polynomial input radius depends on the point norms; use polynomial_input_radius");
    }
    // 2 - 2 f(r) <= t, with t = delta^2 (true distance) or t = delta (published form).
    const double t = convention == RadiusConvention::TrueDistance ? delta * delta : delta;
    const InputNorm norm = profile_norm(spec);
    if (t >= 2.0) return {norm, std::numeric_limits<double>::infinity(), false};
    return {norm, invert_profile(spec, 1.0 - t / 2.0), true};
}

InputBall polynomial_input_radius(const KernelSpec& spec, double delta, double norm_x, double norm_x2) {
    spec.validate();
    if (spec.family != KernelFamily::Polynomial) throw std::invalid_argument("polynomial_input_radius: not a polynomial kernel");
    if (!(delta > 0.0)) throw std::invalid_argument("feature radius must be positive");
    const double d = spec.degree;
    const double c = std::pow(2.0, -1.0 / (2.0 * d)) * std::sqrt(2.0 + norm_x * norm_x + norm_x2 * norm_x2);
    return {InputNorm::L2, c * std::pow(delta, 1.0 / d), true};
}

double feature_radius_for_input_ball(const KernelSpec& spec, InputNorm norm, double radius, Index dim) {
    spec.validate();
    if (radius < 0.0) throw std::invalid_argument("input radius must be nonnegative");
    const double sd = std::sqrt(static_cast<double>(dim));
    // Largest length, measured in the profile's norm, of a vector in the ball.
    auto reach = [&](InputNorm target) {
        if (target == InputNorm::L2) {
            return norm == InputNorm::Linf ? radius * sd : radius;
        }
        // target L1
        if (norm == InputNorm::L1) return radius;
        if (norm == InputNorm::L2) return radius * sd;
        return radius * static_cast<double>(dim);
    };
    if (spec.family == KernelFamily::Linear) return reach(InputNorm::L2);
    if (spec.family == KernelFamily::Polynomial) {
        throw std::invalid_argument("feature_radius_for_input_ball: polynomial kernels are input dependent");
    }
    const double r = reach(profile_norm(spec));
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * profile(spec, r)));
}

}  // namespace akt

#include "akt/bounds.hpp"

#include "akt/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

namespace akt {

void to_json(nlohmann::json& j, const ComplexityReport& r) {
    j = {{"n", r.n},
         {"gamma_bar_mc", r.gamma_bar_mc},
         {"gamma_bar_analytic", r.gamma_bar_analytic},
         {"beta_bar", r.beta_bar},
         {"spectrum", std::vector<double>(r.spectrum.data(), r.spectrum.data() + r.spectrum.size())},
         {"mc_samples", r.mc_samples},
         {"mc_stderr", r.mc_stderr}};
}

void from_json(const nlohmann::json& j, ComplexityReport& r) {
    r.n = j.at("n").get<Index>();
    r.gamma_bar_mc = j.at("gamma_bar_mc").get<double>();
    r.gamma_bar_analytic = j.at("gamma_bar_analytic").get<double>();
    r.beta_bar = j.at("beta_bar").get<double>();
    const auto s = j.at("spectrum").get<std::vector<double>>();
    r.spectrum = Eigen::Map<const VectorXd>(s.data(), static_cast<Index>(s.size()));
    r.mc_samples = j.at("mc_samples").get<int>();
    r.mc_stderr = j.at("mc_stderr").get<double>();
}

namespace {

VectorXd kernel_eigenvalues(const MatrixXd& K) {
    if (K.rows() != K.cols() || K.rows() == 0) throw std::invalid_argument("complexity: Gram matrix must be square");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(K, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("eigendecomposition of the Gram matrix failed");
    VectorXd ev = es.eigenvalues().reverse();  // nonincreasing
    const double top = std::max(ev[0], 0.0);
    for (Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < 1e-10 * top) ev[i] = 0.0;
    }
    return ev;
}

}  // namespace

VectorXd normalized_spectrum(const MatrixXd& K) { return kernel_eigenvalues(K) / static_cast<double>(K.rows()); }

ComplexityReport gaussian_complexity(const MatrixXd& K, int mc_samples, std::uint64_t seed) {
    if (mc_samples < 2) throw std::invalid_argument("gaussian_complexity needs at least two Monte Carlo samples");
    const Index n = K.rows();
    const VectorXd lam = kernel_eigenvalues(K);
    const double nd = static_cast<double>(n);

    ComplexityReport rep;
    rep.n = n;
    rep.spectrum = lam / nd;
    rep.gamma_bar_analytic = std::sqrt(std::max(0.0, K.trace())) / nd;
    rep.mc_samples = mc_samples;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double mean = 0.0;
    double m2 = 0.0;
    for (int s = 0; s < mc_samples; ++s) {
        double q = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double z = normal(rng);
            q += lam[i] * z * z;
        }
        const double v = std::sqrt(q) / nd;
        const double d = v - mean;
        mean += d / (s + 1);
        m2 += d * (v - mean);
    }
    rep.gamma_bar_mc = mean;
    rep.mc_stderr = std::sqrt(m2 / (mc_samples - 1) / mc_samples);
    rep.beta_bar = critical_radius(rep.spectrum, n);
    return rep;
}

ComplexityReport gaussian_complexity(const GramMatrix& K, int mc_samples, std::uint64_t seed) {
    if (!K.symmetric) throw std::invalid_argument("gaussian_complexity: Gram matrix must be symmetric");
    return gaussian_complexity(K.entries, mc_samples, seed);
}

double critical_radius_rhs(const VecRef& spectrum, Index n, double b) {
    const double b2 = b * b;
    double s = 0.0;
    for (Index i = 0; i < spectrum.size(); ++i) s += std::min(b2, std::max(0.0, spectrum[i]));
    return std::sqrt(2.0 / static_cast<double>(n)) * std::sqrt(s);
}

double critical_radius(const VecRef& spectrum_in, Index n) {
    if (n < 1) throw std::invalid_argument("critical_radius: n must be positive");
    if ((spectrum_in.array() < 0.0).any()) throw std::invalid_argument("critical_radius: negative eigenvalue");
    if (spectrum_in.size() == 0) return 0.0;
    VectorXd spectrum = spectrum_in;
    const double mu1 = spectrum.maxCoeff();
    if (mu1 <= 0.0) return 0.0;
    for (Index i = 0; i < spectrum.size(); ++i) {
        if (spectrum[i] < 1e-10 * mu1) spectrum[i] = 0.0;
    }
    // g(b) = b^2 - rhs(b) has a single sign change on (0, inf).
    auto g = [&](double b) { return b * b - critical_radius_rhs(spectrum, n, b); };
    double hi = std::sqrt(mu1);
    if (g(hi) < 0.0) {
        // Beyond sqrt(mu_1) every term is saturated: b^2 = sqrt(2/n) sqrt(sum mu).
        return std::sqrt(std::sqrt(2.0 / static_cast<double>(n)) * std::sqrt(spectrum.sum()));
    }
    double lo = 0.0;
    while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) >= 0.0 ? hi : lo) = mid;
    }
    return hi;
}

GammaBeta empirical_gamma_beta(const MatrixXd& K, const VecRef& h, const VecRef& w) {
    const Index n = K.rows();
    if (K.cols() != n || h.size() != n || w.size() != n) {
        throw std::invalid_argument("empirical_gamma_beta: dimension mismatch");
    }
    const double nd = static_cast<double>(n);
    GammaBeta out;
    out.gamma_w = std::sqrt(std::max(0.0, w.dot(K * w))) / nd;
    const double risk = h.squaredNorm() / nd;
    out.beta_w = risk > 0.0 ? (w.dot(h) / nd) / std::sqrt(risk) : 0.0;
    return out;
}

double excess_risk(const FittedModel& f_hat, const VecRef& f_star_values, const MatRef& X) {
    if (X.rows() != f_star_values.size()) throw std::invalid_argument("excess_risk: length mismatch");
    const VectorXd pred = predict(f_hat, X);
    return (pred - f_star_values).squaredNorm() / static_cast<double>(X.rows());
}

std::string_view to_string(Estimator e) { return e == Estimator::Adversarial ? "adversarial" : "ridge"; }

void BoundInputs::validate() const {
    if (sigma < 0.0 || R < 0.0 || delta_or_lambda < 0.0 || gamma < 0.0 || beta < 0.0) {
        throw std::invalid_argument("bound inputs must be nonnegative");
    }
}

BoundValues theorem_bounds(const BoundInputs& in, Estimator estimator) {
    in.validate();
    const double s = in.sigma;
    const double R = in.R;
    const double g = in.gamma;
    const double b = in.beta;
    BoundValues out;
    if (estimator == Estimator::Adversarial) {
        const double d = in.delta_or_lambda;
        out.B_gamma = d > 0.0 ? 4.0 * (2.0 * s * R / d + R * R) * (d + g) * (d + g)
                              : std::numeric_limits<double>::infinity();
        out.B_beta = 4.0 * s * d * R + 10.0 * d * d * R * R + 16.0 * s * s * b * b;
    } else {
        const double l = in.delta_or_lambda;
        out.B_gamma = l > 0.0 ? 2.0 * (R * l + s * g) * (R * l + s * g) / l : std::numeric_limits<double>::infinity();
        out.B_beta = 2.0 * (R * R * l + s * s * b * b);
    }
    out.min = std::min(out.B_gamma, out.B_beta);
    return out;
}

double gamma_tail_bound(Index n, double lambda1, double eps) {
    if (!(lambda1 > 0.0)) return 0.0;
    const double nd = static_cast<double>(n);
    return std::exp(-nd * nd * eps / (2.0 * lambda1));
}

double gamma_lipschitz_tail_bound(Index n, double lambda1, double eps) {
    if (!(lambda1 > 0.0)) return 0.0;
    const double nd = static_cast<double>(n);
    return std::exp(-nd * nd * eps * eps / (2.0 * lambda1));
}

}  // namespace akt

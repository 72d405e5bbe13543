#include "akt/mkl.hpp"

#include "akt/errors.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <limits>

namespace akt {

double MklModel::total_norm() const {
    double s = 0.0;
    for (double v : per_kernel_norms) s += v;
    return s;
}

VectorXd MklModel::train_predictions() const {
    VectorXd f = VectorXd::Zero(X_train.rows());
    for (std::size_t j = 0; j < kernels.size(); ++j) f += K_train[j].entries * alphas[j];
    return f;
}

MklModel make_mkl_model(const MatRef& X, const std::vector<KernelSpec>& kernels, std::vector<VectorXd> alphas) {
    if (kernels.empty()) throw std::invalid_argument("MKL model needs at least one kernel");
    if (alphas.size() != kernels.size()) throw std::invalid_argument("MKL model: one coefficient vector per kernel");
    MklModel m;
    m.kernels = kernels;
    m.X_train = X;
    for (std::size_t j = 0; j < kernels.size(); ++j) {
        if (alphas[j].size() != X.rows()) throw std::invalid_argument("MKL model: coefficient length mismatch");
        m.K_train.push_back(gram_matrix(kernels[j], m.X_train));
        m.per_kernel_norms.push_back(rkhs_norm(m.K_train.back().entries, alphas[j]));
    }
    m.alphas = std::move(alphas);
    return m;
}

VectorXd predict(const MklModel& model, const MatRef& X_new) {
    if (X_new.cols() != model.X_train.cols()) throw std::invalid_argument("predict: feature dimension mismatch");
    VectorXd f = VectorXd::Zero(X_new.rows());
    for (std::size_t j = 0; j < model.kernels.size(); ++j) {
        f += gram_matrix(model.kernels[j], X_new, model.X_train).entries * model.alphas[j];
    }
    return f;
}

double mkl_adversarial_loss(const MklModel& model, const VecRef& x, double y, double delta) {
    if (delta < 0.0) throw std::invalid_argument("mkl_adversarial_loss: delta must be nonnegative");
    double fx = 0.0;
    for (std::size_t j = 0; j < model.kernels.size(); ++j) {
        for (Index i = 0; i < model.X_train.rows(); ++i) {
            fx += model.alphas[j][i] * kernel_eval(model.kernels[j], model.X_train.row(i).transpose(), x);
        }
    }
    const double a = std::abs(y - fx) + delta * model.total_norm();
    return a * a;
}

double mkl_adversarial_objective(const std::vector<MatrixXd>& Ks, const VectorXd& y,
                                 const std::vector<VectorXd>& alphas, double delta) {
    VectorXd f = VectorXd::Zero(y.size());
    double norms = 0.0;
    for (std::size_t j = 0; j < Ks.size(); ++j) {
        const VectorXd fj = Ks[j] * alphas[j];
        norms += std::sqrt(std::max(0.0, alphas[j].dot(fj)));
        f += fj;
    }
    return ((y - f).array().abs() + delta * norms).square().mean();
}

std::vector<VectorXd> mkl_weighted_solve(const std::vector<MatrixXd>& Ks, const VecRef& y, const VecRef& w,
                                         const std::vector<double>& lambdas, const LinearSolveOptions& opts) {
    if (Ks.empty()) throw std::invalid_argument("mkl_weighted_solve: no kernels");
    if (lambdas.size() != Ks.size()) throw std::invalid_argument("mkl_weighted_solve: one lambda per kernel");
    const Index n = y.size();
    for (const auto& K : Ks) {
        if (K.rows() != n || K.cols() != n) throw std::invalid_argument("mkl_weighted_solve: dimension mismatch");
    }
    if (w.size() != n) throw std::invalid_argument("mkl_weighted_solve: weight length mismatch");
    for (double l : lambdas) {
        if (!(l > 0.0)) throw std::invalid_argument("mkl_weighted_solve: lambdas must be positive");
    }
    // A single kernel is exactly the weighted ridge problem.
    if (Ks.size() == 1) return {weighted_krr_solve(Ks[0], y, w, lambdas[0], opts)};

    if ((w.array() <= 0.0).any()) throw std::invalid_argument("mkl_weighted_solve: weights must be positive");
    const double nd = static_cast<double>(n);
    MatrixXd Kt = Ks[0] / (nd * lambdas[0]);
    for (std::size_t j = 1; j < Ks.size(); ++j) Kt += Ks[j] / (nd * lambdas[j]);
    const VectorXd s = w.cwiseSqrt();
    MatrixXd A = s.asDiagonal() * Kt * s.asDiagonal();
    A.diagonal().array() += 1.0;
    const VectorXd b = s.cwiseProduct(y);
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw SolverError("multi-kernel reduced system is not positive definite");
    const VectorXd u = llt.solve(b);
    const double resid = (A * u - b).norm() / std::max(b.norm(), 1e-300);
    if (!u.allFinite() || resid > 1e-6) {
        throw SolverError("multi-kernel reduced system is singular (relative residual " + std::to_string(resid) + ")");
    }
    const VectorXd su = s.cwiseProduct(u);
    std::vector<VectorXd> out;
    out.reserve(Ks.size());
    for (double l : lambdas) out.push_back(su / (nd * l));
    return out;
}

std::vector<VectorXd> mkl_weighted_solve(const std::vector<GramMatrix>& Ks, const VecRef& y, const VecRef& w,
                                         const std::vector<double>& lambdas, const LinearSolveOptions& opts) {
    std::vector<MatrixXd> mats;
    mats.reserve(Ks.size());
    for (const auto& K : Ks) {
        if (!K.symmetric) throw std::invalid_argument("mkl_weighted_solve: Gram matrices must be symmetric");
        mats.push_back(K.entries);
    }
    return mkl_weighted_solve(mats, y, w, lambdas, opts);
}

MklWeightState mkl_update_weights(const VecRef& residuals, const std::vector<double>& norms, double delta,
                                  double epsilon) {
    if (!(delta > 0.0)) throw std::invalid_argument("mkl_update_weights: delta must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("mkl_update_weights: epsilon must be positive");
    if (norms.size() == 1) {
        auto st = update_weights(residuals, norms[0], delta, epsilon);
        return {std::move(st.w), {st.lambda}};
    }
    const Eigen::ArrayXd rho = (residuals.array().square() + epsilon).sqrt();
    std::vector<double> s(norms.size());
    double total = 0.0;
    for (std::size_t j = 0; j < norms.size(); ++j) {
        s[j] = std::sqrt(delta * delta * norms[j] * norms[j] + epsilon);
        total += s[j];
    }
    const Eigen::ArrayXd denom = rho + total;
    MklWeightState st;
    st.w = (denom / rho).matrix();
    for (double sj : s) st.lambdas.push_back(std::max((delta * delta * denom / sj).mean(), epsilon));
    return st;
}

MklSolution solve_adversarial_mkl(const std::vector<MatrixXd>& Ks, const VecRef& y_in, const SolverConfig& config,
                                  const LinearSolveOptions& opts) {
    config.validate();
    if (Ks.empty()) throw std::invalid_argument("adversarial MKL needs at least one kernel");
    if (!(config.delta > 0.0)) throw std::invalid_argument("adversarial MKL needs delta > 0");
    const auto t0 = std::chrono::steady_clock::now();
    const Index n = y_in.size();
    if (n < 2) throw std::invalid_argument("adversarial MKL needs at least two samples");
    const VectorXd y = y_in;
    const std::size_t D = Ks.size();
    const double delta = config.delta;

    MklSolution out;
    FitSummary& sum = out.summary;
    sum.method = "adversarial_mkl";
    sum.delta = delta;
    sum.converged = false;
    MklWeightState state{VectorXd::Ones(n), std::vector<double>(D, delta)};
    double best_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < config.max_iter; ++it) {
        auto alphas = mkl_weighted_solve(Ks, y, state.w, state.lambdas, opts);
        VectorXd f = VectorXd::Zero(n);
        std::vector<double> norms(D);
        double norm_sum = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            const VectorXd fj = Ks[j] * alphas[j];
            norms[j] = std::sqrt(std::max(0.0, alphas[j].dot(fj)));
            norm_sum += norms[j];
            f += fj;
        }
        const VectorXd r = y - f;
        const double obj = (r.array().abs() + delta * norm_sum).square().mean();
        if (!std::isfinite(obj)) throw SolverError("adversarial MKL objective became non-finite");
        sum.objective_history.push_back(obj);
        sum.iterations = it + 1;
        sum.lambda = state.lambdas[0];
        if (obj < best_obj) {
            best_obj = obj;
            out.alphas = alphas;
        }
        if (it > 0) {
            const double prev = sum.objective_history[sum.objective_history.size() - 2];
            if (prev - obj < config.tol * prev) {
                sum.converged = true;
                break;
            }
        }
        state = mkl_update_weights(r, norms, delta, config.epsilon);
    }
    sum.objective = best_obj;
    sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

MklModel fit_adversarial_mkl(const MatRef& X, const VecRef& y, const std::vector<KernelSpec>& kernels,
                             const SolverConfig& config, const LinearSolveOptions& opts) {
    if (kernels.empty()) throw std::invalid_argument("adversarial MKL needs at least one kernel");
    if (X.rows() != y.size()) throw std::invalid_argument("fit_adversarial_mkl: X rows and y length differ");
    std::vector<MatrixXd> Ks;
    for (const auto& k : kernels) {
        k.validate();
        Ks.push_back(gram_matrix(k, X).entries);
    }
    auto sol = solve_adversarial_mkl(Ks, y, config, opts);
    MklModel m;
    m.kernels = kernels;
    m.X_train = X;
    m.alphas = std::move(sol.alphas);
    for (std::size_t j = 0; j < kernels.size(); ++j) {
        m.per_kernel_norms.push_back(rkhs_norm(Ks[j], m.alphas[j]));
        m.K_train.push_back(GramMatrix{std::move(Ks[j]), true});
    }
    m.summary = std::move(sol.summary);
    return m;
}

void to_json(nlohmann::json& j, const MklModel& m) {
    nlohmann::json alphas = nlohmann::json::array();
    for (const auto& a : m.alphas) alphas.push_back(std::vector<double>(a.data(), a.data() + a.size()));
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.X_train.rows()));
    for (Index i = 0; i < m.X_train.rows(); ++i) {
        for (Index c = 0; c < m.X_train.cols(); ++c) rows[i].push_back(m.X_train(i, c));
    }
    j = {{"kernels", m.kernels}, {"alphas", alphas}, {"norms", m.per_kernel_norms}, {"x_train", rows}};
}

MklModel mkl_model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kernels") || !j.contains("alphas") || !j.contains("x_train")) {
        throw std::invalid_argument("MKL model JSON needs kernels, alphas and x_train");
    }
    const auto kernels = j.at("kernels").get<std::vector<KernelSpec>>();
    const auto rows = j.at("x_train").get<std::vector<std::vector<double>>>();
    const Index p = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
    MatrixXd X(static_cast<Index>(rows.size()), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Index>(rows[i].size()) != p) throw std::invalid_argument("MKL model JSON: ragged x_train");
        for (Index c = 0; c < p; ++c) X(static_cast<Index>(i), c) = rows[i][c];
    }
    std::vector<VectorXd> alphas;
    for (const auto& a : j.at("alphas")) {
        const auto v = a.get<std::vector<double>>();
        alphas.push_back(Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size())));
    }
    return make_mkl_model(X, kernels, std::move(alphas));
}

}  // namespace akt

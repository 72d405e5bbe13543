#include "akt/solver.hpp"

#include "akt/errors.hpp"
#include "akt/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace akt {

void SolverConfig::validate() const {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be nonnegative and finite");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

void to_json(nlohmann::json& j, const SolverConfig& c) {
    j = {{"delta", c.delta}, {"epsilon", c.epsilon}, {"max_iter", c.max_iter}, {"tol", c.tol}};
}

void from_json(const nlohmann::json& j, SolverConfig& c) {
    for (const auto& [key, _] : j.items()) {
        if (key != "delta" && key != "epsilon" && key != "max_iter" && key != "tol") {
            throw std::invalid_argument("unknown solver key '" + key + "'");
        }
    }
    SolverConfig out;
    out.delta = j.value("delta", out.delta);
    out.epsilon = j.value("epsilon", out.epsilon);
    out.max_iter = j.value("max_iter", out.max_iter);
    out.tol = j.value("tol", out.tol);
    out.validate();
    c = out;
}

void to_json(nlohmann::json& j, const FitSummary& s) {
    j = {{"method", s.method},
         {"iterations", s.iterations},
         {"objective", s.objective},
         {"converged", s.converged},
         {"delta", s.delta},
         {"lambda", s.lambda},
         {"objective_history", s.objective_history},
         {"wall_seconds", s.wall_seconds}};
}

double rkhs_norm(const MatrixXd& K, const VectorXd& alpha) {
    const double sq = alpha.dot(K * alpha);
    return std::sqrt(std::max(0.0, sq));
}

FittedModel make_model(const MatRef& X, const KernelSpec& kernel, VectorXd alpha) {
    if (alpha.size() != X.rows()) throw std::invalid_argument("make_model: alpha length does not match X rows");
    FittedModel m;
    m.X_train = X;
    m.kernel = kernel;
    m.K_train = gram_matrix(kernel, m.X_train);
    m.alpha = std::move(alpha);
    m.rkhs_norm = rkhs_norm(m.K_train.entries, m.alpha);
    return m;
}

double adversarial_loss(const FittedModel& model, const VecRef& x, double y, double delta) {
    if (delta < 0.0) throw std::invalid_argument("adversarial_loss: delta must be nonnegative");
    double fx = 0.0;
    for (Index i = 0; i < model.alpha.size(); ++i) {
        fx += model.alpha[i] * kernel_eval(model.kernel, model.X_train.row(i).transpose(), x);
    }
    const double a = std::abs(y - fx) + delta * model.rkhs_norm;
    return a * a;
}

double adversarial_objective(const MatrixXd& K, const VectorXd& y, const VectorXd& alpha, double delta) {
    const VectorXd f = K * alpha;
    const double norm = std::sqrt(std::max(0.0, alpha.dot(f)));
    return ((y - f).array().abs() + delta * norm).square().mean();
}

namespace {

VectorXd solve_symmetric(MatrixXd A, const VectorXd& b, const LinearSolveOptions& opts, const VectorXd* guess) {
    const Index n = A.rows();
    if (n > opts.cg_threshold) {
        Eigen::ConjugateGradient<MatrixXd, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(opts.cg_tol);
        cg.setMaxIterations(opts.cg_max_iter);
        cg.compute(A);
        VectorXd z = guess ? VectorXd(cg.solveWithGuess(b, *guess)) : VectorXd(cg.solve(b));
        if (cg.info() != Eigen::Success && cg.error() > 1e-8) {
            std::ostringstream msg;
            msg << "conjugate gradients stalled after " << cg.iterations() << " iterations (relative residual "
                << cg.error() << ")";
            throw SolverError(msg.str());
        }
        return z;
    }

    Eigen::LLT<MatrixXd> llt(A);
    VectorXd z;
    if (llt.info() == Eigen::Success) {
        z = llt.solve(b);
    } else {
        Eigen::LDLT<MatrixXd> ldlt(A);
        if (ldlt.info() != Eigen::Success) throw SolverError("factorization of the ridge system failed");
        z = ldlt.solve(b);
    }
    const double bnorm = std::max(b.norm(), 1e-300);
    const double resid = (A * z - b).norm() / bnorm;
    if (!z.allFinite() || resid > 1e-6) {
        const VectorXd d = A.diagonal();
        std::ostringstream msg;
        msg << "ridge system is singular to working precision (relative residual " << resid << ", diagonal range ["
            << d.minCoeff() << ", " << d.maxCoeff() << "])";
        throw SolverError(msg.str());
    }
    return z;
}

}  // namespace

VectorXd weighted_krr_solve(const MatrixXd& K, const VecRef& y, const VecRef& w, double lambda,
                            const LinearSolveOptions& opts, const VectorXd* warm_start) {
    const Index n = K.rows();
    if (K.cols() != n || y.size() != n || w.size() != n) {
        throw std::invalid_argument("weighted_krr_solve: dimension mismatch");
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("weighted_krr_solve: lambda must be positive");
    if ((w.array() <= 0.0).any() || !w.allFinite()) {
        throw std::invalid_argument("weighted_krr_solve: weights must be positive and finite");
    }
    const VectorXd s = w.cwiseSqrt();
    MatrixXd A = s.asDiagonal() * K * s.asDiagonal();
    A.diagonal().array() += static_cast<double>(n) * lambda;
    const VectorXd b = s.cwiseProduct(y);
    std::optional<VectorXd> guess;
    if (warm_start && warm_start->size() == n) guess = warm_start->cwiseQuotient(s);
    const VectorXd z = solve_symmetric(std::move(A), b, opts, guess ? &*guess : nullptr);
    return s.cwiseProduct(z);
}

VectorXd weighted_krr_solve(const GramMatrix& K, const VecRef& y, const VecRef& w, double lambda,
                            const LinearSolveOptions& opts, const VectorXd* warm_start) {
    if (!K.symmetric) throw std::invalid_argument("weighted_krr_solve: Gram matrix must be symmetric");
    return weighted_krr_solve(K.entries, y, w, lambda, opts, warm_start);
}

WeightState update_weights(const VecRef& residuals, double rkhs_norm, double delta, double epsilon) {
    if (!(delta > 0.0)) throw std::invalid_argument("update_weights: delta must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("update_weights: epsilon must be positive");
    const Eigen::ArrayXd rho = (residuals.array().square() + epsilon).sqrt();
    const double s = std::sqrt(delta * delta * rkhs_norm * rkhs_norm + epsilon);
    WeightState st;
    // eta0 = rho / (rho + s) and eta1 = s / (rho + s), inverted directly.
    st.w = ((rho + s) / rho).matrix();
    // Floor at epsilon so the reweighted ridge stays well posed as delta -> 0 and
    // joins continuously onto the delta = 0 fallback (plain ridge with lambda = epsilon).
    st.lambda = std::max((delta * delta * (rho + s) / s).mean(), epsilon);
    return st;
}

VectorXd solve_krr(const MatrixXd& K, const VecRef& y, double lambda, const LinearSolveOptions& opts) {
    return weighted_krr_solve(K, y, VectorXd::Ones(K.rows()), lambda, opts);
}

AdversarialSolution solve_adversarial(const MatrixXd& K, const VecRef& y_in, const SolverConfig& config,
                                      const LinearSolveOptions& opts) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Index n = K.rows();
    if (n < 2) throw std::invalid_argument("adversarial fit needs at least two samples");
    if (y_in.size() != n) throw std::invalid_argument("adversarial fit: y length does not match Gram matrix");
    const VectorXd y = y_in;

    AdversarialSolution out;
    FitSummary& sum = out.summary;
    sum.delta = config.delta;

    if (config.delta == 0.0) {
        // The unregularized problem is ill-posed on singular K; fall back to a tiny ridge.
        out.alpha = solve_krr(K, y, config.epsilon, opts);
        sum.method = "krr";
        sum.lambda = config.epsilon;
        sum.iterations = 1;
        sum.objective = adversarial_objective(K, y, out.alpha, 0.0);
        sum.objective_history = {sum.objective};
    } else {
        sum.method = "adversarial";
        const double delta = config.delta;
        WeightState state{VectorXd::Ones(n), std::max(delta, config.epsilon)};
        VectorXd alpha;
        VectorXd best_alpha;
        double best_obj = std::numeric_limits<double>::infinity();
        sum.converged = false;
        for (int it = 0; it < config.max_iter; ++it) {
            alpha = weighted_krr_solve(K, y, state.w, state.lambda, opts, alpha.size() ? &alpha : nullptr);
            const VectorXd f = K * alpha;
            const double norm = std::sqrt(std::max(0.0, alpha.dot(f)));
            const VectorXd r = y - f;
            const double obj = (r.array().abs() + delta * norm).square().mean();
            if (!std::isfinite(obj)) throw SolverError("adversarial objective became non-finite");
            sum.objective_history.push_back(obj);
            sum.iterations = it + 1;
            sum.lambda = state.lambda;
            if (obj < best_obj) {
                best_obj = obj;
                best_alpha = alpha;
            }
            if (it > 0) {
                const double prev = sum.objective_history[sum.objective_history.size() - 2];
                if (prev - obj < config.tol * prev) {
                    sum.converged = true;
                    break;
                }
            }
            state = update_weights(r, norm, delta, config.epsilon);
        }
        out.alpha = std::move(best_alpha);
        sum.objective = best_obj;
    }
    sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

FittedModel fit_adversarial(const MatRef& X, const VecRef& y, const KernelSpec& kernel, const SolverConfig& config,
                            const LinearSolveOptions& opts) {
    kernel.validate();
    if (X.rows() != y.size()) throw std::invalid_argument("fit_adversarial: X rows and y length differ");
    FittedModel m;
    m.X_train = X;
    m.kernel = kernel;
    m.K_train = gram_matrix(kernel, m.X_train);
    auto sol = solve_adversarial(m.K_train.entries, y, config, opts);
    m.alpha = std::move(sol.alpha);
    m.summary = std::move(sol.summary);
    m.rkhs_norm = rkhs_norm(m.K_train.entries, m.alpha);
    return m;
}

FittedModel fit_krr(const MatRef& X, const VecRef& y, const KernelSpec& kernel, double lambda,
                    const LinearSolveOptions& opts) {
    kernel.validate();
    if (X.rows() != y.size()) throw std::invalid_argument("fit_krr: X rows and y length differ");
    if (!(lambda > 0.0)) throw std::invalid_argument("fit_krr: lambda must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    FittedModel m;
    m.X_train = X;
    m.kernel = kernel;
    m.K_train = gram_matrix(kernel, m.X_train);
    m.alpha = solve_krr(m.K_train.entries, y, lambda, opts);
    m.rkhs_norm = rkhs_norm(m.K_train.entries, m.alpha);
    m.summary.method = "krr";
    m.summary.iterations = 1;
    m.summary.lambda = lambda;
    const VectorXd r = y - m.train_predictions();
    m.summary.objective = r.squaredNorm() / static_cast<double>(r.size()) + lambda * m.rkhs_norm * m.rkhs_norm;
    m.summary.objective_history = {m.summary.objective};
    m.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

VectorXd predict(const FittedModel& model, const MatRef& X_new) {
    if (X_new.cols() != model.X_train.cols()) {
        throw std::invalid_argument("predict: expected " + std::to_string(model.X_train.cols()) + " features, got " +
                                    std::to_string(X_new.cols()));
    }
    return gram_matrix(model.kernel, X_new, model.X_train).entries * model.alpha;
}

std::string_view to_string(RidgeGridScale s) { return s == RidgeGridScale::Diagonal ? "diagonal" : "per_sample"; }

RidgeGridScale ridge_grid_scale_from_string(std::string_view name) {
    if (name == "diagonal") return RidgeGridScale::Diagonal;
    if (name == "per_sample") return RidgeGridScale::PerSample;
    throw std::invalid_argument("unknown ridge grid scale '" + std::string(name) + "' (expected diagonal or per_sample)");
}

std::vector<double> default_gamma_grid() { return {10.0, 1.0, 0.1, 1e-2, 1e-3}; }
std::vector<double> default_lambda_grid() { return {1.0, 0.1, 1e-2, 1e-3}; }

std::vector<std::vector<Index>> make_folds(Index n, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least two folds");
    if (n < folds) throw std::invalid_argument("cross-validation: fewer samples than folds");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
    const Index base = n / folds;
    const Index extra = n % folds;
    Index pos = 0;
    for (int f = 0; f < folds; ++f) {
        const Index len = base + (f < extra ? 1 : 0);
        out[f].assign(perm.begin() + pos, perm.begin() + pos + len);
        std::sort(out[f].begin(), out[f].end());
        pos += len;
    }
    return out;
}

namespace {

std::vector<Index> complement(Index n, const std::vector<Index>& held) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n) - held.size());
    std::size_t j = 0;
    for (Index i = 0; i < n; ++i) {
        if (j < held.size() && held[j] == i) {
            ++j;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

void check_grid(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
    for (double v : grid) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " grid values must be positive");
    }
}

// Mean held-out MSE of `fit` across folds for one Gram matrix on all samples.
template <class Fit>
double fold_mse(const MatrixXd& K, const VectorXd& y, const std::vector<std::vector<Index>>& folds, Fit&& fit) {
    const Index n = K.rows();
    std::vector<double> mse(folds.size());
    parallel_for(folds.size(), [&](std::size_t f) {
        const auto& held = folds[f];
        if (held.empty()) throw std::invalid_argument("cross-validation fold is empty");
        const auto train = complement(n, held);
        const MatrixXd Ktr = K(train, train);
        const VectorXd ytr = y(train);
        const VectorXd alpha = fit(Ktr, ytr);
        const VectorXd pred = K(held, train) * alpha;
        mse[f] = (y(held) - pred).squaredNorm() / static_cast<double>(held.size());
    });
    return std::accumulate(mse.begin(), mse.end(), 0.0) / static_cast<double>(mse.size());
}

bool better(const CvCell& a, const CvCell& b) {
    const double scale = std::max(std::abs(a.mse), std::abs(b.mse));
    if (std::abs(a.mse - b.mse) > 1e-12 * scale) return a.mse < b.mse;
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return a.gamma > b.gamma;
}

}  // namespace

CvResult cross_validate_krr(const MatRef& X, const VecRef& y_in, const KernelSpec& base,
                            const std::vector<double>& gamma_grid, const std::vector<double>& lambda_grid, int folds,
                            std::uint64_t seed, RidgeGridScale scale) {
    check_grid(gamma_grid, "gamma");
    check_grid(lambda_grid, "lambda");
    if (X.rows() != y_in.size()) throw std::invalid_argument("cross_validate_krr: X rows and y length differ");
    const VectorXd y = y_in;
    const auto fold_sets = make_folds(X.rows(), folds, seed);
    CvResult res;
    for (double g : gamma_grid) {
        const KernelSpec spec = base.with_gamma(g);
        spec.validate();
        const MatrixXd K = gram_matrix(spec, X).entries;
        for (double lam : lambda_grid) {
            CvCell cell{g, lam, fold_mse(K, y, fold_sets, [&](const MatrixXd& Kt, const VectorXd& yt) {
                            const double l =
                                scale == RidgeGridScale::Diagonal ? lam / static_cast<double>(Kt.rows()) : lam;
                            return solve_krr(Kt, yt, l);
                        })};
            res.cells.push_back(cell);
        }
    }
    const CvCell best = *std::min_element(res.cells.begin(), res.cells.end(), better);
    res.kernel = base.with_gamma(best.gamma);
    res.lambda = best.lambda;
    res.mse = best.mse;
    res.scale = scale;
    return res;
}

CvResult cross_validate_adversarial(const MatRef& X, const VecRef& y_in, const KernelSpec& base,
                                    const std::vector<double>& gamma_grid, int folds, std::uint64_t seed,
                                    std::optional<double> delta, const SolverConfig& config) {
    check_grid(gamma_grid, "gamma");
    if (X.rows() != y_in.size()) throw std::invalid_argument("cross_validate_adversarial: X rows and y length differ");
    const VectorXd y = y_in;
    const auto fold_sets = make_folds(X.rows(), folds, seed);
    CvResult res;
    for (double g : gamma_grid) {
        const KernelSpec spec = base.with_gamma(g);
        spec.validate();
        const MatrixXd K = gram_matrix(spec, X).entries;
        CvCell cell{g, 0.0, fold_mse(K, y, fold_sets, [&](const MatrixXd& Kt, const VectorXd& yt) {
                        SolverConfig c = config;
                        c.delta = delta ? *delta : 1.0 / std::sqrt(static_cast<double>(Kt.rows()));
                        return solve_adversarial(Kt, yt, c).alpha;
                    })};
        res.cells.push_back(cell);
    }
    const CvCell best = *std::min_element(res.cells.begin(), res.cells.end(), better);
    res.kernel = base.with_gamma(best.gamma);
    res.mse = best.mse;
    return res;
}

void to_json(nlohmann::json& j, const FittedModel& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.X_train.rows()));
    for (Index i = 0; i < m.X_train.rows(); ++i) {
        rows[i].resize(static_cast<std::size_t>(m.X_train.cols()));
        for (Index c = 0; c < m.X_train.cols(); ++c) rows[i][c] = m.X_train(i, c);
    }
    j = {{"kernel", m.kernel},
         {"alpha", std::vector<double>(m.alpha.data(), m.alpha.data() + m.alpha.size())},
         {"x_train", rows},
         {"rkhs_norm", m.rkhs_norm}};
}

FittedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kernel") || !j.contains("alpha") || !j.contains("x_train")) {
        throw std::invalid_argument("model JSON needs kernel, alpha and x_train");
    }
    const auto kernel = j.at("kernel").get<KernelSpec>();
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    const auto rows = j.at("x_train").get<std::vector<std::vector<double>>>();
    if (rows.size() != alpha.size()) throw std::invalid_argument("model JSON: alpha and x_train lengths differ");
    const Index p = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
    MatrixXd X(static_cast<Index>(rows.size()), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Index>(rows[i].size()) != p) throw std::invalid_argument("model JSON: ragged x_train");
        for (Index c = 0; c < p; ++c) X(static_cast<Index>(i), c) = rows[i][c];
    }
    return make_model(X, kernel, Eigen::Map<const VectorXd>(alpha.data(), static_cast<Index>(alpha.size())));
}

}  // namespace akt

#include "akt/attacks.hpp"

#include "akt/errors.hpp"
#include "akt/parallel.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

namespace akt {

std::string_view to_string(AttackNorm norm) { return norm == AttackNorm::L2 ? "l2" : "linf"; }

AttackNorm attack_norm_from_string(std::string_view name) {
    if (name == "l2") return AttackNorm::L2;
    if (name == "linf") return AttackNorm::Linf;
    throw std::invalid_argument("unknown attack norm '" + std::string(name) + "' (expected l2 or linf)");
}

void AttackSpec::validate() const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("attack radius must be nonnegative");
    if (steps < 1) throw std::invalid_argument("attack steps must be at least 1");
    if (restarts < 1) throw std::invalid_argument("attack restarts must be at least 1");
    if (step_size < 0.0) throw std::invalid_argument("attack step size must be nonnegative");
}

void to_json(nlohmann::json& j, const AttackSpec& a) {
    j = {{"norm", std::string(to_string(a.norm))},
         {"radius", a.radius},
         {"steps", a.steps},
         {"step_size", a.effective_step()},
         {"restarts", a.restarts}};
}

void from_json(const nlohmann::json& j, AttackSpec& a) {
    if (!j.is_object()) throw std::invalid_argument("attack spec must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "norm" && key != "radius" && key != "steps" && key != "step_size" && key != "restarts" &&
            key != "seed") {
            throw std::invalid_argument("unknown attack key '" + key + "'");
        }
    }
    AttackSpec out;
    out.norm = attack_norm_from_string(j.at("norm").get<std::string>());
    out.radius = j.at("radius").get<double>();
    out.steps = j.value("steps", out.steps);
    out.step_size = j.value("step_size", out.step_size);
    out.restarts = j.value("restarts", out.restarts);
    out.seed = j.value("seed", out.seed);
    out.validate();
    a = out;
}

void project_to_ball(VectorXd& d, AttackNorm norm, double radius) {
    if (norm == AttackNorm::Linf) {
        d = d.cwiseMax(-radius).cwiseMin(radius);
        return;
    }
    const double len = d.norm();
    if (len > radius) d *= radius / len;
}

namespace {

using Evaluator = std::function<double(const VecRef&, VectorXd*)>;

VectorXd random_start(AttackNorm norm, double radius, Index p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    VectorXd d(p);
    if (norm == AttackNorm::Linf) {
        for (Index i = 0; i < p; ++i) d[i] = radius * unif(rng);
        return d;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index i = 0; i < p; ++i) d[i] = gauss(rng);
    const double len = d.norm();
    if (len == 0.0) return VectorXd::Zero(p);
    const double u = 0.5 * (unif(rng) + 1.0);
    return d * (radius * std::pow(u, 1.0 / static_cast<double>(p)) / len);
}

AttackResult run_pgd(const Evaluator& f, const VecRef& x, double y, const AttackSpec& spec, std::uint64_t stream) {
    spec.validate();
    AttackResult best;
    const double fx = f(x, nullptr);
    best.clean_loss = (y - fx) * (y - fx);
    best.loss = best.clean_loss;
    best.x_adv = x;
    if (spec.radius == 0.0) return best;

    const Index p = x.size();
    const double step = spec.effective_step();
    std::mt19937_64 rng(task_seed(spec.seed, stream));
    VectorXd grad(p);
    for (int restart = 0; restart < spec.restarts; ++restart) {
        VectorXd d = restart == 0 ? VectorXd::Zero(p) : random_start(spec.norm, spec.radius, p, rng);
        for (int it = 0; it <= spec.steps; ++it) {
            const VectorXd z = x + d;
            const double fz = f(z, &grad);
            const double loss = (y - fz) * (y - fz);
            if (!std::isfinite(loss)) break;
            if (loss > best.loss) {
                best.loss = loss;
                best.x_adv = z;
            }
            if (it == spec.steps) break;
            if (!grad.allFinite()) break;
            // Ascent direction of (y - f)^2. At zero residual either sign of grad f ascends.
            const double res = y - fz;
            VectorXd g = res != 0.0 ? VectorXd(-2.0 * res * grad) : grad;
            if (spec.norm == AttackNorm::Linf) {
                d += step * g.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
            } else {
                const double len = g.norm();
                if (len == 0.0) break;
                d += (step / len) * g;
            }
            project_to_ball(d, spec.norm, spec.radius);
        }
    }
    return best;
}

Evaluator evaluator(const FittedModel& m) {
    return [&m](const VecRef& z, VectorXd* g) { return kernel_expansion(m.kernel, m.X_train, m.alpha, z, g); };
}

Evaluator evaluator(const MklModel& m) {
    return [&m](const VecRef& z, VectorXd* g) {
        double v = 0.0;
        VectorXd gj;
        if (g) g->setZero(z.size());
        for (std::size_t j = 0; j < m.kernels.size(); ++j) {
            v += kernel_expansion(m.kernels[j], m.X_train, m.alphas[j], z, g ? &gj : nullptr);
            if (g) *g += gj;
        }
        return v;
    };
}

template <class Model>
MatrixXd attack_rows(const Model& model, const MatRef& X, const VecRef& y, const AttackSpec& spec) {
    if (X.rows() != y.size()) throw std::invalid_argument("attack: X rows and y length differ");
    if (X.cols() != model.X_train.cols()) throw std::invalid_argument("attack: feature dimension mismatch");
    spec.validate();
    MatrixXd out(X.rows(), X.cols());
    const auto f = evaluator(model);
    parallel_for(static_cast<std::size_t>(X.rows()), [&](std::size_t i) {
        const Index r = static_cast<Index>(i);
        out.row(r) = run_pgd(f, X.row(r).transpose(), y[r], spec, i).x_adv.transpose();
    });
    return out;
}

}  // namespace

AttackResult pgd_attack(const FittedModel& model, const VecRef& x, double y, const AttackSpec& spec,
                        std::uint64_t stream) {
    if (x.size() != model.X_train.cols()) throw std::invalid_argument("pgd_attack: feature dimension mismatch");
    return run_pgd(evaluator(model), x, y, spec, stream);
}

AttackResult pgd_attack(const MklModel& model, const VecRef& x, double y, const AttackSpec& spec,
                        std::uint64_t stream) {
    if (x.size() != model.X_train.cols()) throw std::invalid_argument("pgd_attack: feature dimension mismatch");
    return run_pgd(evaluator(model), x, y, spec, stream);
}

MatrixXd attack_all(const FittedModel& model, const MatRef& X, const VecRef& y, const AttackSpec& spec) {
    return attack_rows(model, X, y, spec);
}

MatrixXd attack_all(const MklModel& model, const MatRef& X, const VecRef& y, const AttackSpec& spec) {
    return attack_rows(model, X, y, spec);
}

double r2_score(const VecRef& y, const VecRef& pred) {
    if (y.size() != pred.size() || y.size() == 0) throw std::invalid_argument("r2_score: size mismatch or empty");
    const double ss_tot = (y.array() - y.mean()).square().sum();
    if (!(ss_tot > 0.0)) throw std::invalid_argument("r2_score: targets have zero variance");
    return 1.0 - (y - pred).squaredNorm() / ss_tot;
}

double robust_score(const FittedModel& model, const MatRef& X_test, const VecRef& y_test, const AttackSpec& spec) {
    if (X_test.rows() == 0) throw std::invalid_argument("robust_score: empty test set");
    const MatrixXd Xa = attack_all(model, X_test, y_test, spec);
    return r2_score(y_test, predict(model, Xa));
}

double robust_score(const MklModel& model, const MatRef& X_test, const VecRef& y_test, const AttackSpec& spec) {
    if (X_test.rows() == 0) throw std::invalid_argument("robust_score: empty test set");
    const MatrixXd Xa = attack_all(model, X_test, y_test, spec);
    return r2_score(y_test, predict(model, Xa));
}

void to_json(nlohmann::json& j, const InputTrainingOptions& o) {
    j = {{"train_radius", o.train_radius}, {"norm", std::string(to_string(o.norm))},
         {"epochs", o.epochs},             {"lr", o.lr},
         {"beta1", o.beta1},               {"beta2", o.beta2},
         {"attack_steps", o.attack_steps}};
}

void from_json(const nlohmann::json& j, InputTrainingOptions& o) {
    if (!j.is_object()) throw std::invalid_argument("input-training options must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "train_radius" && key != "norm" && key != "epochs" && key != "lr" && key != "beta1" &&
            key != "beta2" && key != "attack_steps") {
            throw std::invalid_argument("unknown input-training key '" + key + "'");
        }
    }
    InputTrainingOptions out;
    out.train_radius = j.value("train_radius", out.train_radius);
    if (j.contains("norm")) out.norm = attack_norm_from_string(j.at("norm").get<std::string>());
    out.epochs = j.value("epochs", out.epochs);
    out.lr = j.value("lr", out.lr);
    out.beta1 = j.value("beta1", out.beta1);
    out.beta2 = j.value("beta2", out.beta2);
    out.attack_steps = j.value("attack_steps", out.attack_steps);
    o = out;
}

FittedModel fit_adversarial_input(const MatRef& X, const VecRef& y_in, const KernelSpec& kernel,
                                  const InputTrainingOptions& opts) {
    kernel.validate();
    if (opts.epochs < 1) throw std::invalid_argument("input adversarial training needs at least one epoch");
    if (!(opts.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(opts.train_radius >= 0.0)) throw std::invalid_argument("training radius must be nonnegative");
    if (X.rows() != y_in.size()) throw std::invalid_argument("fit_adversarial_input: X rows and y length differ");
    const auto t0 = std::chrono::steady_clock::now();
    const Index n = X.rows();
    const VectorXd y = y_in;

    AttackSpec attack;
    attack.norm = opts.norm;
    attack.radius = opts.train_radius;
    attack.steps = opts.attack_steps;
    attack.seed = opts.seed;

    FittedModel m = make_model(X, kernel, VectorXd::Zero(n));
    m.summary.method = "adversarial_input";
    VectorXd mom = VectorXd::Zero(n);
    VectorXd vel = VectorXd::Zero(n);
    double initial = -1.0;
    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        attack.seed = task_seed(opts.seed, static_cast<std::uint64_t>(epoch));
        const MatrixXd Xa = opts.train_radius > 0.0 ? attack_all(m, X, y, attack) : MatrixXd(X);
        const MatrixXd Ka = gram_matrix(kernel, Xa, X).entries;
        const VectorXd r = y - Ka * m.alpha;
        const double obj = r.squaredNorm() / static_cast<double>(n);
        if (!std::isfinite(obj)) throw SolverError("input adversarial training diverged (non-finite loss)");
        if (initial < 0.0) initial = std::max(obj, 1e-300);
        if (obj > 1e6 * initial) throw SolverError("input adversarial training diverged");
        m.summary.objective_history.push_back(obj);

        const VectorXd grad = (-2.0 / static_cast<double>(n)) * (Ka.transpose() * r);
        mom = opts.beta1 * mom + (1.0 - opts.beta1) * grad;
        vel = opts.beta2 * vel + (1.0 - opts.beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(opts.beta1, epoch);
        const double c2 = 1.0 - std::pow(opts.beta2, epoch);
        m.alpha.array() -= opts.lr * (mom.array() / c1) / ((vel.array() / c2).sqrt() + opts.adam_eps);
        m.rkhs_norm = rkhs_norm(m.K_train.entries, m.alpha);
    }
    m.summary.iterations = opts.epochs;
    m.summary.delta = opts.train_radius;
    // Loss at the attacked points for the final coefficients.
    {
        attack.seed = task_seed(opts.seed, 0);
        const MatrixXd Xa = opts.train_radius > 0.0 ? attack_all(m, X, y, attack) : MatrixXd(X);
        const VectorXd r = y - gram_matrix(kernel, Xa, X).entries * m.alpha;
        m.summary.objective = r.squaredNorm() / static_cast<double>(n);
    }
    m.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

}  // namespace akt

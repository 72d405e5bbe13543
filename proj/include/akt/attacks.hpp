#pragma once

#include "akt/mkl.hpp"
#include "akt/solver.hpp"

#include <cstdint>

namespace akt {

enum class AttackNorm { L2, Linf };

[[nodiscard]] std::string_view to_string(AttackNorm norm);
[[nodiscard]] AttackNorm attack_norm_from_string(std::string_view name);

/// Projected gradient ascent on the squared error inside an input ball.
/// step_size <= 0 selects the default 2.5 * radius / steps.
struct AttackSpec {
    AttackNorm norm = AttackNorm::L2;
    double radius = 0.0;
    int steps = 40;
    double step_size = 0.0;
    int restarts = 1;
    std::uint64_t seed = 0;  // drives the random starts of restarts after the first

    void validate() const;
    [[nodiscard]] double effective_step() const { return step_size > 0.0 ? step_size : 2.5 * radius / steps; }
};

void to_json(nlohmann::json& j, const AttackSpec& a);
void from_json(const nlohmann::json& j, AttackSpec& a);

struct AttackResult {
    VectorXd x_adv;
    double loss = 0.0;        // (y - f(x_adv))^2
    double clean_loss = 0.0;  // (y - f(x))^2
};

/// Exact projection onto {d : ||d|| <= radius}.
void project_to_ball(VectorXd& d, AttackNorm norm, double radius);

/// `stream` decorrelates the random restarts of different points.
[[nodiscard]] AttackResult pgd_attack(const FittedModel& model, const VecRef& x, double y, const AttackSpec& spec,
                                      std::uint64_t stream = 0);
[[nodiscard]] AttackResult pgd_attack(const MklModel& model, const VecRef& x, double y, const AttackSpec& spec,
                                      std::uint64_t stream = 0);

/// Attacked copy of every row of X.
[[nodiscard]] MatrixXd attack_all(const FittedModel& model, const MatRef& X, const VecRef& y, const AttackSpec& spec);
[[nodiscard]] MatrixXd attack_all(const MklModel& model, const MatRef& X, const VecRef& y, const AttackSpec& spec);

/// 1 - sum (y - f)^2 / sum (y - mean y)^2.
[[nodiscard]] double r2_score(const VecRef& y, const VecRef& pred);

/// R^2 on the test set after attacking each point independently.
[[nodiscard]] double robust_score(const FittedModel& model, const MatRef& X_test, const VecRef& y_test,
                                  const AttackSpec& spec);
[[nodiscard]] double robust_score(const MklModel& model, const MatRef& X_test, const VecRef& y_test,
                                  const AttackSpec& spec);

/// Input-space adversarial training over dual coefficients, optimized with Adam.
struct InputTrainingOptions {
    double train_radius = 0.1;
    AttackNorm norm = AttackNorm::L2;
    int epochs = 300;
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int attack_steps = 40;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const InputTrainingOptions& o);
void from_json(const nlohmann::json& j, InputTrainingOptions& o);

[[nodiscard]] FittedModel fit_adversarial_input(const MatRef& X, const VecRef& y, const KernelSpec& kernel,
                                                const InputTrainingOptions& opts);

}  // namespace akt

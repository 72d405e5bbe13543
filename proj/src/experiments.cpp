#include "akt/experiments.hpp"

#include "akt/parallel.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

namespace akt {

double DeltaChoice::resolve(Index n_train) const {
    if (!automatic) return value;
    if (n_train < 1) throw std::invalid_argument("cannot resolve delta for an empty training set");
    return 1.0 / std::sqrt(static_cast<double>(n_train));
}

DeltaChoice DeltaChoice::parse(const std::string& text) {
    if (text == "auto") return {true, 0.0};
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("delta must be 'auto' or a nonnegative number (got '" + text + "')");
    }
    return {false, v};
}

void to_json(nlohmann::json& j, const DeltaChoice& d) {
    if (d.automatic) {
        j = "auto";
    } else {
        j = d.value;
    }
}

void from_json(const nlohmann::json& j, DeltaChoice& d) {
    if (j.is_string()) {
        d = DeltaChoice::parse(j.get<std::string>());
    } else if (j.is_number()) {
        const double v = j.get<double>();
        if (!(v >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
        d = {false, v};
    } else {
        throw std::invalid_argument("delta must be 'auto' or a number");
    }
}

void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

Dataset DataSource::load() const {
    if (path.empty()) return synthesize(synthetic);
    if (target_column.empty()) throw std::invalid_argument("a target column is required for CSV data");
    return load_csv(path, target_column, has_header);
}

void to_json(nlohmann::json& j, const DataSource& d) {
    if (d.path.empty()) {
        j = {{"synthetic",
              {{"target", std::string(to_string(d.synthetic.target))},
               {"n", d.synthetic.n},
               {"noise_sigma", d.synthetic.noise_sigma},
               {"seed", d.synthetic.seed}}}};
    } else {
        j = {{"path", d.path}, {"target", d.target_column}, {"has_header", d.has_header}};
    }
}

void from_json(const nlohmann::json& j, DataSource& d) {
    require_known_keys(j, {"path", "target", "has_header", "synthetic"}, "data");
    DataSource out;
    if (j.contains("synthetic")) {
        if (j.contains("path")) throw std::invalid_argument("data: give either path or synthetic, not both");
        const auto& s = j.at("synthetic");
        require_known_keys(s, {"target", "n", "noise_sigma", "seed"}, "data.synthetic");
        out.synthetic.target = synthetic_target_from_string(s.value("target", std::string("sine")));
        out.synthetic.n = s.value("n", out.synthetic.n);
        out.synthetic.noise_sigma = s.value("noise_sigma", out.synthetic.noise_sigma);
        out.synthetic.seed = s.value("seed", out.synthetic.seed);
        if (out.synthetic.n < 2) throw std::invalid_argument("data.synthetic.n must be at least 2");
    } else {
        out.path = j.at("path").get<std::string>();
        out.target_column = j.at("target").get<std::string>();
        out.has_header = j.value("has_header", true);
    }
    d = out;
}

std::string config_hash(const nlohmann::json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

TargetScaler TargetScaler::fit(const VecRef& y, bool enabled) {
    TargetScaler t;
    if (!enabled || y.size() == 0) return t;
    t.mean = y.mean();
    const double var = (y.array() - t.mean).square().mean();
    t.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return t;
}

VectorXd TargetScaler::forward(const VecRef& y) const { return ((y.array() - mean) / scale).matrix(); }
VectorXd TargetScaler::inverse(const VecRef& f) const { return (f.array() * scale + mean).matrix(); }

// ---------------------------------------------------------------- rate sweep

void RateSweepConfig::validate() const {
    kernel.validate();
    if (n_grid.empty()) throw std::invalid_argument("rate sweep: n grid is empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2) throw std::invalid_argument("rate sweep: n values must be at least 2");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("rate sweep: n grid must be ascending");
    }
    if (reps < 1) throw std::invalid_argument("rate sweep: reps must be at least 1");
    if (n_test < 1) throw std::invalid_argument("rate sweep: n_test must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("rate sweep: noise_sigma must be nonnegative");
    if (method != "adversarial" && method != "krr") {
        throw std::invalid_argument("rate sweep: method must be adversarial or krr");
    }
    if (method == "krr" && !(lambda > 0.0)) throw std::invalid_argument("rate sweep: lambda must be positive");
}

void to_json(nlohmann::json& j, const RateSweepConfig& c) {
    j = {{"target", std::string(to_string(c.target))},
         {"kernel", c.kernel},
         {"method", c.method},
         {"lambda", c.lambda},
         {"n_grid", c.n_grid},
         {"reps", c.reps},
         {"noise_sigma", c.noise_sigma},
         {"delta", c.delta},
         {"n_test", c.n_test},
         {"seed", c.seed},
         {"solver", c.solver}};
}

void from_json(const nlohmann::json& j, RateSweepConfig& c) {
    require_known_keys(j,
                       {"target", "kernel", "method", "lambda", "n_grid", "reps", "noise_sigma", "delta", "n_test",
                        "seed", "solver"},
                       "rate-sweep config");
    RateSweepConfig out;
    if (j.contains("target")) out.target = synthetic_target_from_string(j.at("target").get<std::string>());
    if (j.contains("kernel")) out.kernel = j.at("kernel").get<KernelSpec>();
    out.method = j.value("method", out.method);
    out.lambda = j.value("lambda", out.lambda);
    if (j.contains("n_grid")) out.n_grid = j.at("n_grid").get<std::vector<Index>>();
    out.reps = j.value("reps", out.reps);
    out.noise_sigma = j.value("noise_sigma", out.noise_sigma);
    if (j.contains("delta")) out.delta = j.at("delta").get<DeltaChoice>();
    out.n_test = j.value("n_test", out.n_test);
    out.seed = j.value("seed", out.seed);
    if (j.contains("solver")) out.solver = j.at("solver").get<SolverConfig>();
    out.validate();
    c = out;
}

LogLogFit fit_loglog(const std::vector<double>& n, const std::vector<double>& err) {
    if (n.size() != err.size() || n.size() < 2) throw std::invalid_argument("log-log fit needs at least two points");
    LogLogFit fit;
    constexpr double floor = 1e-20;
    const double worst = *std::max_element(err.begin(), err.end());
    fit.degenerate = worst < 1e-12;
    const std::size_t m = n.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(n[i]);
        const double ly = std::log(std::max(err[i], floor));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double md = static_cast<double>(m);
    const double den = md * sxx - sx * sx;
    fit.slope = den != 0.0 ? (md * sxy - sx * sy) / den : 0.0;
    fit.intercept = (sy - fit.slope * sx) / md;
    return fit;
}

RateSweepResult run_rate_sweep(const RateSweepConfig& config, const std::function<void(const RatePoint&)>& on_point) {
    config.validate();
    RateSweepResult res;
    for (Index n : config.n_grid) {
        std::vector<RatePoint> pts(static_cast<std::size_t>(config.reps));
        parallel_for(pts.size(), [&](std::size_t rep) {
            const std::uint64_t s = task_seed(config.seed, static_cast<std::uint64_t>(n) * 100003u + rep);
            const Dataset train = synthesize({config.target, n, config.noise_sigma, s});
            const Dataset test = synthesize({config.target, config.n_test, 0.0, task_seed(s, 1)});
            // The estimators carry no intercept: center inputs and targets on the training sample.
            const VectorXd xmean = train.X.colwise().mean().transpose();
            const MatrixXd Xtr = train.X.rowwise() - xmean.transpose();
            const MatrixXd Xte = test.X.rowwise() - xmean.transpose();
            const double ymean = train.y.mean();
            const VectorXd ytr = train.y.array() - ymean;

            RatePoint pt;
            pt.n = n;
            pt.rep = static_cast<int>(rep);
            FittedModel m;
            if (config.method == "krr") {
                m = fit_krr(Xtr, ytr, config.kernel, config.lambda);
            } else {
                SolverConfig sc = config.solver;
                sc.delta = config.delta.resolve(n);
                pt.delta = sc.delta;
                m = fit_adversarial(Xtr, ytr, config.kernel, sc);
            }
            pt.iterations = m.summary.iterations;
            const auto& h = m.summary.objective_history;
            for (std::size_t k = 1; k < h.size(); ++k) pt.max_increase = std::max(pt.max_increase, h[k] - h[k - 1]);
            const VectorXd pred = predict(m, Xte).array() + ymean;
            pt.mse = (pred - test.f_star).squaredNorm() / static_cast<double>(config.n_test);
            pts[rep] = pt;
        });
        std::vector<double> mses;
        for (const auto& p : pts) {
            mses.push_back(p.mse);
            res.points.push_back(p);
            if (on_point) on_point(p);
        }
        res.n.push_back(n);
        res.median_mse.push_back(quantile(mses, 0.5));
    }
    if (res.n.size() >= 2) {
        std::vector<double> nd(res.n.begin(), res.n.end());
        res.fit = fit_loglog(nd, res.median_mse);
    } else {
        res.fit.degenerate = true;
    }
    return res;
}

// ----------------------------------------------------------------- benchmark

std::vector<AttackSpec> default_benchmark_attacks() {
    std::vector<AttackSpec> out;
    for (AttackNorm norm : {AttackNorm::L2, AttackNorm::Linf}) {
        for (double r : {0.01, 0.1}) {
            AttackSpec a;
            a.norm = norm;
            a.radius = r;
            out.push_back(a);
        }
    }
    return out;
}

std::string attack_label(const AttackSpec& a) {
    return std::string(to_string(a.norm)) + "<=" + format_number(a.radius);
}

void BenchmarkConfig::validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
    if (bootstrap_reps < 1) throw std::invalid_argument("bootstrap_reps must be at least 1");
    if (folds < 2) throw std::invalid_argument("folds must be at least 2");
    if (methods.empty()) throw std::invalid_argument("benchmark: no methods selected");
    for (const auto& m : methods) {
        if (m != "adv_kern_auto" && m != "ridge_cv" && m != "adv_kern_fixed" && m != "adv_input") {
            throw std::invalid_argument("benchmark: unknown method '" + m + "'");
        }
    }
    for (double d : fixed_deltas) {
        if (!(d > 0.0)) throw std::invalid_argument("benchmark: fixed deltas must be positive");
    }
    for (const auto& a : attacks) a.validate();
    kernel.validate();
    if (gamma_grid.empty() || lambda_grid.empty()) throw std::invalid_argument("benchmark: empty grid");
    if (adv_input.epochs < 1) throw std::invalid_argument("benchmark: adv_input epochs must be at least 1");
    solver.validate();
}

void to_json(nlohmann::json& j, const BenchmarkConfig& c) {
    std::vector<std::string> norms;
    for (auto n : c.adv_input_norms) norms.emplace_back(to_string(n));
    j = {{"data", c.data},
         {"test_fraction", c.test_fraction},
         {"seed", c.seed},
         {"methods", c.methods},
         {"fixed_deltas", c.fixed_deltas},
         {"attacks", c.attacks},
         {"bootstrap_reps", c.bootstrap_reps},
         {"kernel", c.kernel},
         {"gamma_grid", c.gamma_grid},
         {"lambda_grid", c.lambda_grid},
         {"lambda_scale", std::string(to_string(c.lambda_scale))},
         {"folds", c.folds},
         {"standardize_target", c.standardize_target},
         {"adv_input_norms", norms},
         {"adv_input", c.adv_input},
         {"solver", c.solver}};
}

void from_json(const nlohmann::json& j, BenchmarkConfig& c) {
    require_known_keys(j,
                       {"data", "test_fraction", "seed", "methods", "fixed_deltas", "attacks", "bootstrap_reps",
                        "kernel", "gamma_grid", "lambda_grid", "lambda_scale", "folds", "standardize_target",
                        "adv_input_norms", "adv_input", "solver"},
                       "benchmark config");
    BenchmarkConfig out;
    if (j.contains("data")) out.data = j.at("data").get<DataSource>();
    out.test_fraction = j.value("test_fraction", out.test_fraction);
    out.seed = j.value("seed", out.seed);
    if (j.contains("methods")) out.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("fixed_deltas")) out.fixed_deltas = j.at("fixed_deltas").get<std::vector<double>>();
    if (j.contains("attacks")) out.attacks = j.at("attacks").get<std::vector<AttackSpec>>();
    out.bootstrap_reps = j.value("bootstrap_reps", out.bootstrap_reps);
    if (j.contains("kernel")) out.kernel = j.at("kernel").get<KernelSpec>();
    if (j.contains("gamma_grid")) out.gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
    if (j.contains("lambda_grid")) out.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    if (j.contains("lambda_scale")) out.lambda_scale = ridge_grid_scale_from_string(j.at("lambda_scale").get<std::string>());
    out.folds = j.value("folds", out.folds);
    out.standardize_target = j.value("standardize_target", out.standardize_target);
    if (j.contains("adv_input_norms")) {
        out.adv_input_norms.clear();
        for (const auto& s : j.at("adv_input_norms")) out.adv_input_norms.push_back(attack_norm_from_string(s.get<std::string>()));
    }
    if (j.contains("adv_input")) out.adv_input = j.at("adv_input").get<InputTrainingOptions>();
    if (j.contains("solver")) out.solver = j.at("solver").get<SolverConfig>();
    out.validate();
    c = out;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config_in, const std::function<void(const std::string&)>& log) {
    BenchmarkConfig config = config_in;
    if (config.attacks.empty()) config.attacks = default_benchmark_attacks();
    config.validate();
    auto say = [&](const std::string& s) {
        if (log) log(s);
    };

    const Dataset full = config.data.load();
    auto [train_raw, test_raw] = split(full, config.test_fraction, config.seed);
    const auto st = standardize(train_raw, {test_raw});
    const Dataset& train = st.train;
    const Dataset& test = st.others.front();
    const TargetScaler ts = TargetScaler::fit(train.y, config.standardize_target);
    const VectorXd ytr = ts.forward(train.y);
    const VectorXd yte_s = ts.forward(test.y);
    const Index n = train.n();

    BenchmarkResult res;
    res.n_train = n;
    res.n_test = test.n();
    res.dropped_rows = full.dropped_rows;
    const auto boot = bootstrap_indices(test.n(), config.bootstrap_reps, task_seed(config.seed, 7));
    const std::uint64_t cv_seed = task_seed(config.seed, 11);

    auto has = [&](const char* m) {
        return std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end();
    };

    std::optional<CvResult> adv_cv;
    auto adversarial_gamma = [&]() {
        if (!adv_cv) {
            say("cross-validating gamma for adversarial training");
            SolverConfig sc = config.solver;
            adv_cv = cross_validate_adversarial(train.X, ytr, config.kernel, config.gamma_grid, config.folds, cv_seed,
                                                std::nullopt, sc);
        }
        return adv_cv->kernel;
    };
    std::optional<CvResult> ridge_cv;
    auto ridge_selection = [&]() -> const CvResult& {
        if (!ridge_cv) {
            say("cross-validating (gamma, lambda) for ridge regression");
            ridge_cv = cross_validate_krr(train.X, ytr, config.kernel, config.gamma_grid, config.lambda_grid,
                                          config.folds, cv_seed, config.lambda_scale);
        }
        return *ridge_cv;
    };

    if (has("adv_kern_auto")) {
        const KernelSpec k = adversarial_gamma();
        SolverConfig sc = config.solver;
        sc.delta = 1.0 / std::sqrt(static_cast<double>(n));
        say("fitting adv_kern_auto");
        TrainedMethod t{"adv_kern_auto", fit_adversarial(train.X, ytr, k, sc), {}};
        t.info = {{"gamma", k.gamma}, {"delta", sc.delta}, {"summary", t.model.summary}};
        res.trained.push_back(std::move(t));
    }
    if (has("ridge_cv")) {
        const CvResult& cv = ridge_selection();
        const double lam = cv.solver_lambda(n);
        say("fitting ridge_cv");
        TrainedMethod t{"ridge_cv", fit_krr(train.X, ytr, cv.kernel, lam), {}};
        t.info = {{"gamma", cv.kernel.gamma},
                  {"lambda_grid_value", cv.lambda},
                  {"lambda_scale", std::string(to_string(cv.scale))},
                  {"lambda", lam},
                  {"cv_mse", cv.mse}};
        res.trained.push_back(std::move(t));
    }
    if (has("adv_kern_fixed")) {
        const KernelSpec k = adversarial_gamma();
        for (double d : config.fixed_deltas) {
            SolverConfig sc = config.solver;
            sc.delta = d;
            const std::string name = "adv_kern_delta=" + format_number(d);
            say("fitting " + name);
            TrainedMethod t{name, fit_adversarial(train.X, ytr, k, sc), {}};
            t.info = {{"gamma", k.gamma}, {"delta", d}, {"summary", t.model.summary}};
            res.trained.push_back(std::move(t));
        }
    }
    if (has("adv_input")) {
        const KernelSpec k = ridge_selection().kernel;
        for (AttackNorm norm : config.adv_input_norms) {
            InputTrainingOptions o = config.adv_input;
            o.norm = norm;
            o.seed = task_seed(config.seed, 13);
            const std::string name = "adv_input_" + std::string(to_string(norm)) + "<=" + format_number(o.train_radius);
            say("fitting " + name);
            TrainedMethod t{name, fit_adversarial_input(train.X, ytr, k, o), {}};
            t.info = {{"gamma", k.gamma}, {"options", o}, {"final_loss", t.model.summary.objective}};
            res.trained.push_back(std::move(t));
        }
    }

    for (const auto& t : res.trained) {
        auto add_row = [&](const std::string& setting, const MatrixXd& Xeval) {
            const VectorXd pred = ts.inverse(predict(t.model, Xeval));
            BenchmarkRow row;
            row.method = t.method;
            row.setting = setting;
            row.r2 = r2_score(test.y, pred);
            row.bootstrap = quartiles(bootstrap_r2(test.y, pred, boot));
            res.rows.push_back(row);
        };
        say("evaluating " + t.method);
        add_row("clean", test.X);
        for (std::size_t a = 0; a < config.attacks.size(); ++a) {
            AttackSpec spec = config.attacks[a];
            spec.seed = task_seed(config.seed, 100 + a);
            add_row(attack_label(spec), attack_all(t.model, test.X, yte_s, spec));
        }
    }
    return res;
}

std::string format_benchmark_table(const BenchmarkResult& result) {
    std::vector<std::string> settings;
    std::vector<std::string> methods;
    std::map<std::pair<std::string, std::string>, const BenchmarkRow*> cell;
    for (const auto& r : result.rows) {
        if (std::find(settings.begin(), settings.end(), r.setting) == settings.end()) settings.push_back(r.setting);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        cell[{r.method, r.setting}] = &r;
    }
    std::size_t w0 = 6;
    for (const auto& m : methods) w0 = std::max(w0, m.size());
    constexpr int w = 22;
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w0) + 2) << "method";
    for (const auto& s : settings) os << std::setw(w) << s;
    os << '\n';
    for (const auto& m : methods) {
        os << std::setw(static_cast<int>(w0) + 2) << m;
        for (const auto& s : settings) {
            const auto it = cell.find({m, s});
            if (it == cell.end()) {
                os << std::setw(w) << "-";
                continue;
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f (%.2f-%.2f)", it->second->bootstrap.median, it->second->bootstrap.q1,
                          it->second->bootstrap.q3);
            os << std::setw(w) << buf;
        }
        os << '\n';
    }
    return os.str();
}

// -------------------------------------------------------------------- bounds

void BoundsConfig::validate() const {
    kernel.validate();
    if (mc_samples < 2) throw std::invalid_argument("bounds: mc_samples must be at least 2");
    for (double s : sigma_grid) {
        if (!(s >= 0.0)) throw std::invalid_argument("bounds: sigma values must be nonnegative");
    }
    for (double r : R_grid) {
        if (!(r >= 0.0)) throw std::invalid_argument("bounds: R values must be nonnegative");
    }
    for (double l : lambda_grid) {
        if (!(l > 0.0)) throw std::invalid_argument("bounds: lambda values must be positive");
    }
}

void to_json(nlohmann::json& j, const BoundsConfig& c) {
    j = {{"data", c.data},         {"kernel", c.kernel},         {"standardize", c.standardize},
         {"mc_samples", c.mc_samples}, {"seed", c.seed},          {"sigma_grid", c.sigma_grid},
         {"R_grid", c.R_grid},     {"delta_grid", c.delta_grid}, {"lambda_grid", c.lambda_grid}};
}

void from_json(const nlohmann::json& j, BoundsConfig& c) {
    require_known_keys(j,
                       {"data", "kernel", "standardize", "mc_samples", "seed", "sigma_grid", "R_grid", "delta_grid",
                        "lambda_grid"},
                       "bounds config");
    BoundsConfig out;
    if (j.contains("data")) out.data = j.at("data").get<DataSource>();
    if (j.contains("kernel")) out.kernel = j.at("kernel").get<KernelSpec>();
    out.standardize = j.value("standardize", out.standardize);
    out.mc_samples = j.value("mc_samples", out.mc_samples);
    out.seed = j.value("seed", out.seed);
    if (j.contains("sigma_grid")) out.sigma_grid = j.at("sigma_grid").get<std::vector<double>>();
    if (j.contains("R_grid")) out.R_grid = j.at("R_grid").get<std::vector<double>>();
    if (j.contains("delta_grid")) out.delta_grid = j.at("delta_grid").get<std::vector<DeltaChoice>>();
    if (j.contains("lambda_grid")) out.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    out.validate();
    c = out;
}

nlohmann::json run_bounds(const BoundsConfig& config) {
    config.validate();
    Dataset ds = config.data.load();
    if (config.standardize && ds.p() > 0) ds = standardize(ds).train;
    const MatrixXd K = gram_matrix(config.kernel, ds.X).entries;
    const ComplexityReport rep = gaussian_complexity(K, config.mc_samples, config.seed);
    nlohmann::json rows = nlohmann::json::array();
    for (double sigma : config.sigma_grid) {
        for (double R : config.R_grid) {
            for (const auto& dc : config.delta_grid) {
                const double d = dc.resolve(ds.n());
                const BoundValues b =
                    theorem_bounds({sigma, R, d, rep.gamma_bar_analytic, rep.beta_bar}, Estimator::Adversarial);
                rows.push_back({{"estimator", "adversarial"}, {"sigma", sigma}, {"R", R}, {"delta", d},
                                {"B_gamma", b.B_gamma}, {"B_beta", b.B_beta}, {"min", b.min}});
            }
            for (double l : config.lambda_grid) {
                const BoundValues b = theorem_bounds({sigma, R, l, rep.gamma_bar_analytic, rep.beta_bar}, Estimator::Ridge);
                rows.push_back({{"estimator", "ridge"}, {"sigma", sigma}, {"R", R}, {"lambda", l},
                                {"B_gamma", b.B_gamma}, {"B_beta", b.B_beta}, {"min", b.min}});
            }
        }
    }
    return {{"dataset", ds.name},
            {"n", ds.n()},
            {"p", ds.p()},
            {"kernel", config.kernel},
            {"complexity", rep},
            {"bounds", rows},
            {"note", "gamma = gamma_bar_analytic, beta = beta_bar (critical radius of the spectrum of K/n)"}};
}

}  // namespace akt

// Experiment harness: fit / predict / attack / rate-sweep / benchmark / bounds.
//
// Exit codes: 0 success, 2 configuration error, 3 solver error, 4 I/O error.
// Every input is validated before the first output file is created.

#include "akt/attacks.hpp"
#include "akt/bounds.hpp"
#include "akt/data.hpp"
#include "akt/errors.hpp"
#include "akt/experiments.hpp"
#include "akt/mkl.hpp"
#include "akt/parallel.hpp"
#include "akt/solver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <variant>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace akt;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    unsigned threads = 0;
    std::string config;
    bool timing = false;
};

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config '" + path + "' must hold a JSON object");
    return j;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::parse_error& e) {
        throw IoError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// Wall-clock fields break byte-for-byte reproducibility; they are kept only on request.
void scrub_timing(json& j) {
    if (j.is_object()) {
        j.erase("wall_seconds");
        for (auto& [_, v] : j.items()) scrub_timing(v);
    } else if (j.is_array()) {
        for (auto& v : j) scrub_timing(v);
    }
}

class OutputDir {
public:
    explicit OutputDir(std::string dir) : dir_(std::move(dir)) {}

    void create() const {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
    }

    [[nodiscard]] std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(path(name), std::ios::binary);
        if (!out) throw IoError("cannot write '" + path(name) + "'");
        out << content;
        if (!out) throw IoError("write failed for '" + path(name) + "'");
    }

    void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

private:
    std::string dir_;
};

std::string provenance(const std::string& command, const std::string& hash, std::uint64_t seed) {
    return "# akt " + command + " config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
}

json& ensure_object(json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_object()) j[key] = json::object();
    return j[key];
}

struct KernelFlags {
    std::optional<std::string> family;
    std::optional<double> gamma;
    std::optional<double> nu;
    std::optional<int> degree;

    void add(CLI::App* app) {
        app->add_option("--kernel", family, "kernel family (linear, polynomial, exponential, gaussian, laplacian, matern)");
        app->add_option("--gamma", gamma, "kernel bandwidth parameter");
        app->add_option("--nu", nu, "Matérn smoothness (0.5, 1.5, 2.5)");
        app->add_option("--degree", degree, "polynomial degree");
    }

    [[nodiscard]] bool any() const { return family || gamma || nu || degree; }

    void apply(json& cfg, const char* key, const KernelSpec& fallback) const {
        if (!any()) return;
        if (family) {
            cfg[key] = json{{"family", *family}};
        } else if (!cfg.contains(key)) {
            cfg[key] = fallback;
        }
        if (gamma) cfg[key]["gamma"] = *gamma;
        if (nu) cfg[key]["nu"] = *nu;
        if (degree) cfg[key]["degree"] = *degree;
    }
};

struct DataFlags {
    std::optional<std::string> path;
    std::optional<std::string> target;

    void add(CLI::App* app) {
        app->add_option("--data", path, "CSV file");
        app->add_option("--target", target, "target column (name or zero-based index)");
    }

    void apply(json& cfg) const {
        if (!path && !target) return;
        json& d = ensure_object(cfg, "data");
        d.erase("synthetic");
        if (path) d["path"] = *path;
        if (target) d["target"] = *target;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::uint64_t take_seed(json& cfg, const Globals& g) {
    if (g.seed) cfg["seed"] = *g.seed;
    return cfg.value("seed", std::uint64_t{0});
}

// ------------------------------------------------------------------ models

using AnyModel = std::variant<FittedModel, MklModel>;

struct ModelFile {
    AnyModel model;
    std::string method;
    std::vector<std::string> feature_names;  // columns as loaded, before standardization
    std::string target_name;
    std::optional<Standardization> standardization;
};

json to_json(const ModelFile& m) {
    json j{{"format", "akt-model"}, {"version", 1}, {"method", m.method}, {"feature_names", m.feature_names},
           {"target_name", m.target_name}};
    if (const auto* single = std::get_if<FittedModel>(&m.model)) {
        j["type"] = "kernel";
        j["model"] = *single;
    } else {
        j["type"] = "mkl";
        j["model"] = std::get<MklModel>(m.model);
    }
    if (m.standardization) j["standardization"] = *m.standardization;
    return j;
}

ModelFile read_model(const std::string& path) {
    const json j = read_json_file(path);
    try {
        if (j.value("format", std::string()) != "akt-model") throw IoError("'" + path + "' is not an akt model file");
        ModelFile m;
        m.method = j.at("method").get<std::string>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.target_name = j.value("target_name", std::string());
        if (j.contains("standardization")) m.standardization = j.at("standardization").get<Standardization>();
        const std::string type = j.at("type").get<std::string>();
        if (type == "kernel") {
            m.model = model_from_json(j.at("model"));
        } else if (type == "mkl") {
            m.model = mkl_model_from_json(j.at("model"));
        } else {
            throw IoError("'" + path + "': unknown model type '" + type + "'");
        }
        return m;
    } catch (const json::exception& e) {
        throw IoError("'" + path + "' is malformed: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError("'" + path + "' is malformed: " + e.what());
    }
}

VectorXd predict_any(const AnyModel& m, const MatrixXd& X) {
    return std::visit([&](const auto& model) { return predict(model, X); }, m);
}

MatrixXd attack_any(const AnyModel& m, const MatrixXd& X, const VectorXd& y, const AttackSpec& spec) {
    return std::visit([&](const auto& model) { return attack_all(model, X, y, spec); }, m);
}

// Reorders the columns of a freshly loaded file to the model's feature list,
// then applies the stored standardization. Absent one-hot levels are zero.
MatrixXd model_inputs(const ModelFile& m, const Dataset& ds) {
    MatrixXd X = MatrixXd::Zero(ds.n(), static_cast<Index>(m.feature_names.size()));
    for (std::size_t c = 0; c < m.feature_names.size(); ++c) {
        const auto& name = m.feature_names[c];
        const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
        if (it != ds.feature_names.end()) {
            X.col(static_cast<Index>(c)) = ds.X.col(it - ds.feature_names.begin());
        } else if (name.find('=') == std::string::npos) {
            throw IoError("input data lacks feature column '" + name + "'");
        }
    }
    if (!m.standardization) return X;
    Dataset tmp;
    tmp.X = std::move(X);
    tmp.feature_names = m.feature_names;
    return apply_standardization(tmp, *m.standardization).X;
}

double mse(const VectorXd& a, const VectorXd& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

// --------------------------------------------------------------------- fit

struct FitConfig {
    DataSource data;
    std::string method = "adversarial";  // adversarial | krr | mkl | adv_input
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    std::vector<KernelSpec> kernels;  // mkl
    DeltaChoice delta;
    double lambda = 1e-3;  // krr
    bool standardize = true;
    double test_fraction = 0.0;
    std::uint64_t seed = 0;
    SolverConfig solver = {0.0, 1e-8, 100, 1e-8};
    InputTrainingOptions adv_input;
};

void to_json(json& j, const FitConfig& c) {
    j = {{"data", c.data},
         {"method", c.method},
         {"kernel", c.kernel},
         {"kernels", c.kernels},
         {"delta", c.delta},
         {"lambda", c.lambda},
         {"standardize", c.standardize},
         {"test_fraction", c.test_fraction},
         {"seed", c.seed},
         {"solver", c.solver},
         {"adv_input", c.adv_input}};
}

void from_json(const json& j, FitConfig& c) {
    require_known_keys(j,
                       {"data", "method", "kernel", "kernels", "delta", "lambda", "standardize", "test_fraction",
                        "seed", "solver", "adv_input"},
                       "fit config");
    FitConfig out;
    if (j.contains("data")) out.data = j.at("data").get<DataSource>();
    out.method = j.value("method", out.method);
    if (j.contains("kernel")) out.kernel = j.at("kernel").get<KernelSpec>();
    if (j.contains("kernels")) out.kernels = j.at("kernels").get<std::vector<KernelSpec>>();
    if (j.contains("delta")) out.delta = j.at("delta").get<DeltaChoice>();
    out.lambda = j.value("lambda", out.lambda);
    out.standardize = j.value("standardize", out.standardize);
    out.test_fraction = j.value("test_fraction", out.test_fraction);
    out.seed = j.value("seed", out.seed);
    if (j.contains("solver")) out.solver = j.at("solver").get<SolverConfig>();
    if (j.contains("adv_input")) out.adv_input = j.at("adv_input").get<InputTrainingOptions>();

    if (out.method != "adversarial" && out.method != "krr" && out.method != "mkl" && out.method != "adv_input") {
        throw std::invalid_argument("fit: method must be adversarial, krr, mkl or adv_input (got '" + out.method + "')");
    }
    if (out.method == "mkl" && out.kernels.empty()) throw std::invalid_argument("fit: mkl needs a non-empty 'kernels' list");
    if (out.method == "krr" && !(out.lambda > 0.0)) throw std::invalid_argument("fit: lambda must be positive");
    if (!(out.test_fraction >= 0.0 && out.test_fraction < 1.0)) {
        throw std::invalid_argument("fit: test_fraction must lie in [0, 1)");
    }
    out.solver.validate();
    c = out;
}

int cmd_fit(json cfg, const Globals& g) {
    const std::uint64_t seed = take_seed(cfg, g);
    const FitConfig config = cfg.get<FitConfig>();
    const json effective = config;
    const std::string hash = config_hash(effective);

    const Dataset full = config.data.load();
    if (full.y.size() == 0) throw std::invalid_argument("fit: the data needs a target column");
    std::vector<Index> train_rows(static_cast<std::size_t>(full.n()));
    std::iota(train_rows.begin(), train_rows.end(), Index{0});
    std::vector<Index> test_rows;
    if (config.test_fraction > 0.0) {
        const auto m = split_indices(full.n(), config.test_fraction, seed);
        train_rows = m.train;
        test_rows = m.test;
    }
    Dataset train = subset(full, train_rows);
    Dataset test;
    bool has_test = !test_rows.empty();
    if (has_test) test = subset(full, test_rows);
    std::optional<Standardization> stats;
    if (config.standardize) {
        auto st = has_test ? standardize(train, {test}) : standardize(train);
        train = st.train;
        if (has_test) test = st.others.front();
        stats = st.stats;
    }

    const Index n = train.n();
    const double delta = config.delta.resolve(n);
    SolverConfig sc = config.solver;
    sc.delta = delta;

    ModelFile mf;
    mf.method = config.method;
    mf.feature_names = full.feature_names;
    mf.target_name = full.target_name;
    mf.standardization = stats;
    json fit_info;
    if (config.method == "adversarial") {
        FittedModel m = fit_adversarial(train.X, train.y, config.kernel, sc);
        fit_info = m.summary;
        mf.model = std::move(m);
    } else if (config.method == "krr") {
        FittedModel m = fit_krr(train.X, train.y, config.kernel, config.lambda);
        fit_info = m.summary;
        mf.model = std::move(m);
    } else if (config.method == "mkl") {
        MklModel m = fit_adversarial_mkl(train.X, train.y, config.kernels, sc);
        fit_info = m.summary;
        mf.model = std::move(m);
    } else {
        InputTrainingOptions o = config.adv_input;
        o.seed = task_seed(seed, 13);
        FittedModel m = fit_adversarial_input(train.X, train.y, config.kernel, o);
        fit_info = m.summary;
        mf.model = std::move(m);
    }

    const VectorXd train_pred = predict_any(mf.model, train.X);
    json summary{{"command", "fit"},
                 {"config_hash", hash},
                 {"seed", seed},
                 {"config", effective},
                 {"method", config.method},
                 {"delta", delta},
                 {"delta_policy", config.delta.automatic ? "auto" : "fixed"},
                 {"n_train", n},
                 {"n_test", has_test ? test.n() : 0},
                 {"dropped_rows", full.dropped_rows},
                 {"fit", fit_info},
                 {"train_mse", mse(train_pred, train.y)},
                 {"train_r2", r2_score(train.y, train_pred)}};
    if (has_test) {
        const VectorXd test_pred = predict_any(mf.model, test.X);
        summary["test_mse"] = mse(test_pred, test.y);
        summary["test_r2"] = r2_score(test.y, test_pred);
    }
    json model_json = to_json(mf);
    if (!g.timing) {
        scrub_timing(summary);
        scrub_timing(model_json);
    }

    std::ostringstream csv;
    csv << provenance("fit", hash, seed) << "index,y,prediction\n";
    for (Index i = 0; i < n; ++i) {
        csv << train_rows[static_cast<std::size_t>(i)] << ',' << format_number(train.y[i]) << ','
            << format_number(train_pred[i]) << '\n';
    }

    const OutputDir out(g.out);
    out.create();
    out.write_json("model.json", model_json);
    out.write_json("fit_summary.json", summary);
    out.write("train_predictions.csv", csv.str());
    std::cout << "fit " << config.method << ": n_train=" << n << " delta=" << format_number(delta)
              << " objective=" << format_number(summary["fit"].value("objective", 0.0)) << " -> " << g.out << '\n';
    return 0;
}

// ----------------------------------------------------------------- predict

struct PredictFlags {
    std::string model;
    DataFlags data;
};

int cmd_predict(json cfg, const Globals& g, const PredictFlags& f) {
    require_known_keys(cfg, {"model", "data", "seed"}, "predict config");
    if (!f.model.empty()) cfg["model"] = f.model;
    f.data.apply(cfg);
    const std::uint64_t seed = take_seed(cfg, g);
    if (!cfg.contains("model")) throw std::invalid_argument("predict: --model is required");
    if (!cfg.contains("data")) throw std::invalid_argument("predict: --data is required");
    json dj = cfg.at("data");
    if (!dj.contains("target")) dj["target"] = "";
    const DataSource src = dj.get<DataSource>();
    const std::string hash = config_hash(cfg);

    const ModelFile mf = read_model(cfg.at("model").get<std::string>());
    const Dataset ds = src.path.empty() ? src.load() : load_csv(src.path, src.target_column, src.has_header);
    const VectorXd pred = predict_any(mf.model, model_inputs(mf, ds));
    const bool has_y = ds.y.size() > 0;

    std::ostringstream csv;
    csv << provenance("predict", hash, seed) << "index,prediction" << (has_y ? ",y" : "") << '\n';
    for (Index i = 0; i < ds.n(); ++i) {
        csv << i << ',' << format_number(pred[i]);
        if (has_y) csv << ',' << format_number(ds.y[i]);
        csv << '\n';
    }
    json summary{{"command", "predict"}, {"config_hash", hash}, {"seed", seed}, {"n", ds.n()}};
    if (has_y) {
        summary["mse"] = mse(pred, ds.y);
        summary["r2"] = r2_score(ds.y, pred);
    }
    const OutputDir out(g.out);
    out.create();
    out.write("predictions.csv", csv.str());
    out.write_json("predict_summary.json", summary);
    std::cout << "predicted " << ds.n() << " rows -> " << g.out << '\n';
    return 0;
}

// ------------------------------------------------------------------ attack

struct AttackFlags {
    std::string model;
    DataFlags data;
    std::optional<std::string> norm;
    std::optional<double> radius;
    std::optional<int> steps;
    std::optional<int> restarts;
    std::optional<double> step_size;
};

int cmd_attack(json cfg, const Globals& g, const AttackFlags& f) {
    require_known_keys(cfg, {"model", "data", "attacks", "seed"}, "attack config");
    if (!f.model.empty()) cfg["model"] = f.model;
    f.data.apply(cfg);
    const std::uint64_t seed = take_seed(cfg, g);
    if (f.norm || f.radius || f.steps || f.restarts || f.step_size) {
        json a{{"norm", f.norm.value_or("l2")}, {"radius", f.radius.value_or(0.1)}};
        if (f.steps) a["steps"] = *f.steps;
        if (f.restarts) a["restarts"] = *f.restarts;
        if (f.step_size) a["step_size"] = *f.step_size;
        cfg["attacks"] = json::array({a});
    }
    if (!cfg.contains("model")) throw std::invalid_argument("attack: --model is required");
    if (!cfg.contains("data")) throw std::invalid_argument("attack: --data and --target are required");
    const DataSource src = cfg.at("data").get<DataSource>();
    std::vector<AttackSpec> attacks =
        cfg.contains("attacks") ? cfg.at("attacks").get<std::vector<AttackSpec>>() : default_benchmark_attacks();
    if (attacks.empty()) throw std::invalid_argument("attack: the attack list is empty");
    for (auto& a : attacks) a.validate();
    json effective = cfg;
    effective["attacks"] = attacks;
    const std::string hash = config_hash(effective);

    const ModelFile mf = read_model(cfg.at("model").get<std::string>());
    const Dataset ds = src.load();
    const MatrixXd X = model_inputs(mf, ds);
    const VectorXd clean = predict_any(mf.model, X);

    std::ostringstream rows;
    std::ostringstream table;
    rows << provenance("attack", hash, seed) << "attack,index,y,clean_prediction,adv_prediction\n";
    table << provenance("attack", hash, seed) << "attack,norm,radius,clean_mse,adv_mse,clean_r2,adv_r2\n";
    for (std::size_t k = 0; k < attacks.size(); ++k) {
        AttackSpec spec = attacks[k];
        spec.seed = task_seed(seed, 100 + k);
        const VectorXd adv = predict_any(mf.model, attack_any(mf.model, X, ds.y, spec));
        const std::string label = attack_label(spec);
        for (Index i = 0; i < ds.n(); ++i) {
            rows << label << ',' << i << ',' << format_number(ds.y[i]) << ',' << format_number(clean[i]) << ','
                 << format_number(adv[i]) << '\n';
        }
        table << label << ',' << to_string(spec.norm) << ',' << format_number(spec.radius) << ','
              << format_number(mse(clean, ds.y)) << ',' << format_number(mse(adv, ds.y)) << ','
              << format_number(r2_score(ds.y, clean)) << ',' << format_number(r2_score(ds.y, adv)) << '\n';
    }
    const OutputDir out(g.out);
    out.create();
    out.write("attack_points.csv", rows.str());
    out.write("attack_summary.csv", table.str());
    std::cout << table.str();
    return 0;
}

// -------------------------------------------------------------- rate sweep

struct RateFlags {
    std::optional<std::string> target_fn;
    KernelFlags kernel;
    std::optional<std::string> method;
    std::optional<std::string> delta;
    std::optional<int> reps;
    std::optional<std::string> n_grid;
    std::optional<double> noise;
};

int cmd_rate_sweep(json cfg, const Globals& g, const RateFlags& f) {
    if (f.target_fn) cfg["target"] = *f.target_fn;
    f.kernel.apply(cfg, "kernel", RateSweepConfig{}.kernel);
    if (f.method) cfg["method"] = *f.method;
    if (f.delta) cfg["delta"] = DeltaChoice::parse(*f.delta);
    if (f.reps) cfg["reps"] = *f.reps;
    if (f.noise) cfg["noise_sigma"] = *f.noise;
    if (f.n_grid) {
        std::vector<Index> grid;
        for (const auto& s : split_list(*f.n_grid)) {
            std::size_t used = 0;
            long long v = 0;
            try {
                v = std::stoll(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size()) throw std::invalid_argument("--n-grid: '" + s + "' is not an integer");
            grid.push_back(static_cast<Index>(v));
        }
        cfg["n_grid"] = grid;
    }
    const std::uint64_t seed = take_seed(cfg, g);
    const RateSweepConfig config = cfg.get<RateSweepConfig>();
    const json effective = config;
    const std::string hash = config_hash(effective);

    const OutputDir out(g.out);
    out.create();
    // Points are streamed so that a failing fit leaves the finished ones on disk.
    std::ofstream points(out.path("rate_points.csv"), std::ios::binary);
    if (!points) throw IoError("cannot write '" + out.path("rate_points.csv") + "'");
    points << provenance("rate-sweep", hash, seed) << "n,rep,delta,mse,iterations\n" << std::flush;
    const RateSweepResult res = run_rate_sweep(config, [&](const RatePoint& p) {
        points << p.n << ',' << p.rep << ',' << format_number(p.delta) << ',' << format_number(p.mse) << ','
               << p.iterations << '\n';
        points.flush();
    });
    points.close();

    std::ostringstream med;
    med << provenance("rate-sweep", hash, seed) << "n,median_mse\n";
    for (std::size_t i = 0; i < res.n.size(); ++i) med << res.n[i] << ',' << format_number(res.median_mse[i]) << '\n';
    out.write("rate_medians.csv", med.str());
    out.write_json("rate_fit.json", {{"command", "rate-sweep"},
                                     {"config_hash", hash},
                                     {"seed", seed},
                                     {"config", effective},
                                     {"slope", res.fit.slope},
                                     {"intercept", res.fit.intercept},
                                     {"degenerate", res.fit.degenerate}});
    std::cout << "slope " << format_number(res.fit.slope) << (res.fit.degenerate ? " (degenerate fit)" : "") << '\n';
    return 0;
}

// --------------------------------------------------------------- benchmark

struct BenchFlags {
    DataFlags data;
    std::optional<int> bootstrap_reps;
    std::optional<std::string> methods;
    std::optional<int> epochs;
    bool quiet = false;
};

int cmd_benchmark(json cfg, const Globals& g, const BenchFlags& f) {
    f.data.apply(cfg);
    if (f.bootstrap_reps) cfg["bootstrap_reps"] = *f.bootstrap_reps;
    if (f.methods) cfg["methods"] = split_list(*f.methods);
    if (f.epochs) ensure_object(cfg, "adv_input")["epochs"] = *f.epochs;
    const std::uint64_t seed = take_seed(cfg, g);
    BenchmarkConfig config = cfg.get<BenchmarkConfig>();
    if (config.attacks.empty()) config.attacks = default_benchmark_attacks();
    const json effective = config;
    const std::string hash = config_hash(effective);

    const BenchmarkResult res = run_benchmark(config, [&](const std::string& msg) {
        if (!f.quiet) std::clog << "[benchmark] " << msg << '\n';
    });

    std::ostringstream csv;
    csv << provenance("benchmark", hash, seed) << "method,setting,r2,median,q1,q3\n";
    for (const auto& r : res.rows) {
        csv << r.method << ',' << r.setting << ',' << format_number(r.r2) << ',' << format_number(r.bootstrap.median)
            << ',' << format_number(r.bootstrap.q1) << ',' << format_number(r.bootstrap.q3) << '\n';
    }
    json methods = json::array();
    for (const auto& t : res.trained) methods.push_back({{"method", t.method}, {"info", t.info}});
    json report{{"command", "benchmark"},
                {"config_hash", hash},
                {"seed", seed},
                {"config", effective},
                {"split", {{"test_fraction", config.test_fraction}, {"seed", seed}}},
                {"n_train", res.n_train},
                {"n_test", res.n_test},
                {"dropped_rows", res.dropped_rows},
                {"methods", methods}};
    if (!g.timing) scrub_timing(report);
    const std::string table = format_benchmark_table(res);

    const OutputDir out(g.out);
    out.create();
    out.write("benchmark.csv", csv.str());
    out.write("benchmark.txt", table);
    out.write_json("benchmark.json", report);
    std::cout << table;
    return 0;
}

// ------------------------------------------------------------------ bounds

struct BoundsFlags {
    DataFlags data;
    KernelFlags kernel;
    std::optional<int> mc_samples;
};

int cmd_bounds(json cfg, const Globals& g, const BoundsFlags& f) {
    f.data.apply(cfg);
    f.kernel.apply(cfg, "kernel", BoundsConfig{}.kernel);
    if (f.mc_samples) cfg["mc_samples"] = *f.mc_samples;
    const std::uint64_t seed = take_seed(cfg, g);
    const BoundsConfig config = cfg.get<BoundsConfig>();
    const json effective = config;
    const std::string hash = config_hash(effective);

    json report = run_bounds(config);
    report["command"] = "bounds";
    report["config_hash"] = hash;
    report["seed"] = seed;
    report["config"] = effective;

    std::ostringstream csv;
    csv << provenance("bounds", hash, seed) << "estimator,sigma,R,delta_or_lambda,B_gamma,B_beta,min\n";
    for (const auto& row : report.at("bounds")) {
        const double reg = row.contains("delta") ? row.at("delta").get<double>() : row.at("lambda").get<double>();
        csv << row.at("estimator").get<std::string>() << ',' << format_number(row.at("sigma").get<double>()) << ','
            << format_number(row.at("R").get<double>()) << ',' << format_number(reg) << ','
            << format_number(row.at("B_gamma").get<double>()) << ',' << format_number(row.at("B_beta").get<double>())
            << ',' << format_number(row.at("min").get<double>()) << '\n';
    }
    const OutputDir out(g.out);
    out.create();
    out.write_json("bounds.json", report);
    out.write("bounds.csv", csv.str());
    const auto& c = report.at("complexity");
    std::cout << "n=" << report.at("n") << " gamma_bar=" << format_number(c.at("gamma_bar_analytic").get<double>())
              << " beta_bar=" << format_number(c.at("beta_bar").get<double>()) << '\n';
    return 0;
}

// Maps the exception taxonomy to exit codes.
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial kernel training experiments"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "seed for splits, folds, attacks and synthetic data");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_flag("--timing", g.timing, "keep wall-clock fields in JSON outputs");

    auto* fit = app.add_subcommand("fit", "fit a model and write model.json");
    DataFlags fit_data;
    KernelFlags fit_kernel;
    std::optional<std::string> fit_method;
    std::optional<std::string> fit_delta;
    std::optional<double> fit_lambda;
    std::optional<double> fit_test_fraction;
    fit_data.add(fit);
    fit_kernel.add(fit);
    fit->add_option("--method", fit_method, "adversarial, krr, mkl or adv_input");
    fit->add_option("--delta", fit_delta, "adversarial radius or 'auto' (1/sqrt(n_train))");
    fit->add_option("--lambda", fit_lambda, "ridge level for krr");
    fit->add_option("--test-fraction", fit_test_fraction, "held-out fraction (0 trains on everything)");

    auto* pred = app.add_subcommand("predict", "predict with a saved model");
    PredictFlags pf;
    pred->add_option("--model", pf.model, "model.json written by fit");
    pf.data.add(pred);

    auto* atk = app.add_subcommand("attack", "PGD attack evaluation of a saved model");
    AttackFlags af;
    atk->add_option("--model", af.model, "model.json written by fit");
    af.data.add(atk);
    atk->add_option("--norm", af.norm, "l2 or linf");
    atk->add_option("--radius", af.radius, "attack radius");
    atk->add_option("--steps", af.steps, "PGD steps");
    atk->add_option("--restarts", af.restarts, "PGD restarts");
    atk->add_option("--step-size", af.step_size, "PGD step size (default 2.5 radius / steps)");

    auto* rate = app.add_subcommand("rate-sweep", "test error versus training size on synthetic data");
    RateFlags rf;
    rate->add_option("--target-fn", rf.target_fn, "sine, square or linear");
    rf.kernel.add(rate);
    rate->add_option("--method", rf.method, "adversarial or krr");
    rate->add_option("--delta", rf.delta, "adversarial radius or 'auto'");
    rate->add_option("--reps", rf.reps, "replicates per n");
    rate->add_option("--n-grid", rf.n_grid, "comma-separated ascending sample sizes");
    rate->add_option("--noise", rf.noise, "noise standard deviation");

    auto* bench = app.add_subcommand("benchmark", "R^2 table of the method roster, clean and attacked");
    BenchFlags bf;
    bf.data.add(bench);
    bench->add_option("--bootstrap-reps", bf.bootstrap_reps, "bootstrap resamples of the test set");
    bench->add_option("--methods", bf.methods, "comma-separated subset of adv_kern_auto,ridge_cv,adv_kern_fixed,adv_input");
    bench->add_option("--epochs", bf.epochs, "epochs for input-space adversarial training");
    bench->add_flag("--quiet", bf.quiet, "suppress progress messages");

    auto* bnd = app.add_subcommand("bounds", "complexity report and generalization bounds");
    BoundsFlags bof;
    bof.data.add(bnd);
    bof.kernel.add(bnd);
    bnd->add_option("--mc-samples", bof.mc_samples, "Monte Carlo draws for the complexity estimate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    return guarded([&]() {
        set_thread_count(g.threads);
        json cfg = read_config(g.config);
        if (fit->parsed()) {
            fit_data.apply(cfg);
            fit_kernel.apply(cfg, "kernel", FitConfig{}.kernel);
            if (fit_method) cfg["method"] = *fit_method;
            if (fit_delta) cfg["delta"] = DeltaChoice::parse(*fit_delta);
            if (fit_lambda) cfg["lambda"] = *fit_lambda;
            if (fit_test_fraction) cfg["test_fraction"] = *fit_test_fraction;
            return cmd_fit(cfg, g);
        }
        if (pred->parsed()) return cmd_predict(cfg, g, pf);
        if (atk->parsed()) return cmd_attack(cfg, g, af);
        if (rate->parsed()) return cmd_rate_sweep(cfg, g, rf);
        if (bench->parsed()) return cmd_benchmark(cfg, g, bf);
        return cmd_bounds(cfg, g, bof);
    });
}

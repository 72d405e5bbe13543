#include "akt/data.hpp"

#include "akt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace akt {

void to_json(nlohmann::json& j, const Standardization& s) {
    j = {{"means", std::vector<double>(s.means.data(), s.means.data() + s.means.size())},
         {"stds", std::vector<double>(s.stds.data(), s.stds.data() + s.stds.size())},
         {"kept", s.kept},
         {"dropped", s.dropped_names}};
}

void from_json(const nlohmann::json& j, Standardization& s) {
    const auto m = j.at("means").get<std::vector<double>>();
    const auto d = j.at("stds").get<std::vector<double>>();
    if (m.size() != d.size()) throw std::invalid_argument("standardization: means and stds differ in length");
    s.means = Eigen::Map<const VectorXd>(m.data(), static_cast<Index>(m.size()));
    s.stds = Eigen::Map<const VectorXd>(d.data(), static_cast<Index>(d.size()));
    s.kept = j.at("kept").get<std::vector<Index>>();
    s.dropped_names = j.value("dropped", std::vector<std::string>{});
}

void Dataset::validate() const {
    if (y.size() != 0 && X.rows() != y.size()) throw std::invalid_argument("dataset '" + name + "': X rows and y length differ");
    if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("dataset '" + name + "' has non-finite entries");
    if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != X.cols()) {
        throw std::invalid_argument("dataset '" + name + "': feature name count mismatch");
    }
}

Dataset subset(const Dataset& ds, const std::vector<Index>& rows) {
    Dataset out;
    out.name = ds.name;
    out.feature_names = ds.feature_names;
    out.target_name = ds.target_name;
    out.standardization = ds.standardization;
    out.X = ds.X(rows, Eigen::all);
    if (ds.y.size() > 0) out.y = ds.y(rows);
    if (ds.f_star.size() > 0 && ds.f_star.size() == ds.y.size()) out.f_star = ds.f_star(rows);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == delim && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "?" || s == "nan" || s == "NaN"; }

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column, bool has_header, char delimiter) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        auto fields = split_line(line, delimiter);
        if (has_header && header.empty()) {
            header = std::move(fields);
            continue;
        }
        const std::size_t expect = header.empty() ? (rows.empty() ? fields.size() : rows.front().size()) : header.size();
        if (fields.size() != expect) {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(expect) + " fields, got " +
                          std::to_string(fields.size()));
        }
        rows.push_back(std::move(fields));
    }
    if (has_header && header.empty()) throw IoError("'" + path + "' has no header line");
    const std::size_t cols = has_header ? header.size() : (rows.empty() ? 0 : rows.front().size());
    if (!has_header) {
        for (std::size_t c = 0; c < cols; ++c) header.push_back("c" + std::to_string(c));
    }

    std::size_t target = cols;
    for (std::size_t c = 0; c < cols; ++c) {
        if (header[c] == target_column) target = c;
    }
    if (target == cols && !target_column.empty()) {
        char* end = nullptr;
        const long idx = std::strtol(target_column.c_str(), &end, 10);
        if (!target_column.empty() && *end == '\0' && idx >= 0 && static_cast<std::size_t>(idx) < cols) {
            target = static_cast<std::size_t>(idx);
        } else {
            throw std::invalid_argument("target column '" + target_column + "' not found in '" + path + "'");
        }
    }

    // Drop incomplete rows first, then type each column on what remains.
    std::vector<const std::vector<std::string>*> complete;
    for (const auto& r : rows) {
        if (std::none_of(r.begin(), r.end(), is_missing)) complete.push_back(&r);
    }
    Dataset ds;
    ds.dropped_rows = static_cast<Index>(rows.size() - complete.size());
    if (complete.empty()) throw IoError("'" + path + "' has no complete rows");

    std::vector<bool> numeric(cols, true);
    std::vector<std::vector<std::string>> levels(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        double v;
        for (const auto* r : complete) {
            if (!parse_double((*r)[c], v)) {
                numeric[c] = false;
                break;
            }
        }
        if (!numeric[c]) {
            std::set<std::string> lv;
            for (const auto* r : complete) lv.insert((*r)[c]);
            levels[c].assign(lv.begin(), lv.end());
        }
    }
    const bool has_target = target < cols;
    if (has_target && !numeric[target]) throw IoError("target column '" + header[target] + "' is not numeric");

    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) {
        if (c == target) continue;
        if (numeric[c]) {
            names.push_back(header[c]);
        } else {
            for (const auto& l : levels[c]) names.push_back(header[c] + "=" + l);
        }
    }
    const Index n = static_cast<Index>(complete.size());
    ds.X.resize(n, static_cast<Index>(names.size()));
    ds.y.resize(has_target ? n : 0);
    for (Index i = 0; i < n; ++i) {
        const auto& r = *complete[i];
        Index k = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            if (c == target) {
                parse_double(r[c], ds.y[i]);
                continue;
            }
            if (numeric[c]) {
                parse_double(r[c], ds.X(i, k++));
            } else {
                for (const auto& l : levels[c]) ds.X(i, k++) = r[c] == l ? 1.0 : 0.0;
            }
        }
    }
    ds.feature_names = std::move(names);
    ds.target_name = has_target ? header[target] : std::string();
    const auto slash = path.find_last_of('/');
    ds.name = path.substr(slash == std::string::npos ? 0 : slash + 1);
    if (const auto dot = ds.name.rfind('.'); dot != std::string::npos) ds.name.resize(dot);
    if (ds.dropped_rows > 0) {
        std::clog << "warning: dropped " << ds.dropped_rows << " incomplete row(s) from '" << path << "'\n";
    }
    ds.validate();
    return ds;
}

Dataset apply_standardization(const Dataset& ds, const Standardization& s) {
    Dataset out = ds;
    out.X = ds.X(Eigen::all, s.kept);
    if (out.X.cols() != s.means.size()) throw std::invalid_argument("standardization: column count mismatch");
    out.X = (out.X.rowwise() - s.means.transpose()).array().rowwise() / s.stds.transpose().array();
    if (!ds.feature_names.empty()) {
        out.feature_names.clear();
        for (Index c : s.kept) out.feature_names.push_back(ds.feature_names[c]);
    }
    out.standardization = s;
    return out;
}

StandardizedSplits standardize(const Dataset& train, const std::vector<Dataset>& others) {
    if (train.n() == 0) throw std::invalid_argument("standardize: empty training set");
    StandardizedSplits out;
    if (train.standardization) {
        // Already mapped; reuse the stored statistics.
        out.stats = *train.standardization;
        out.train = train;
        for (const auto& o : others) out.others.push_back(o.standardization ? o : apply_standardization(o, out.stats));
        return out;
    }
    const double nd = static_cast<double>(train.n());
    const VectorXd mean = train.X.colwise().mean().transpose();
    const VectorXd var = ((train.X.rowwise() - mean.transpose()).array().square().colwise().sum() / nd).transpose();
    Standardization st;
    std::vector<double> m, s;
    for (Index c = 0; c < train.p(); ++c) {
        const double sd = std::sqrt(var[c]);
        if (sd > 1e-12 * std::max(1.0, std::abs(mean[c]))) {
            st.kept.push_back(c);
            m.push_back(mean[c]);
            s.push_back(sd);
        } else {
            const std::string nm = train.feature_names.empty() ? "column " + std::to_string(c) : train.feature_names[c];
            st.dropped_names.push_back(nm);
            std::clog << "warning: dropping constant feature '" << nm << "'\n";
        }
    }
    if (st.kept.empty()) throw std::invalid_argument("standardize: every feature is constant");
    st.means = Eigen::Map<VectorXd>(m.data(), static_cast<Index>(m.size()));
    st.stds = Eigen::Map<VectorXd>(s.data(), static_cast<Index>(s.size()));
    out.stats = st;
    out.train = apply_standardization(train, st);
    for (const auto& o : others) out.others.push_back(apply_standardization(o, st));
    return out;
}

std::string_view to_string(SyntheticTarget t) {
    switch (t) {
        case SyntheticTarget::Sine: return "sine";
        case SyntheticTarget::Square: return "square";
        case SyntheticTarget::Linear: return "linear";
    }
    return "unknown";
}

SyntheticTarget synthetic_target_from_string(std::string_view name) {
    if (name == "sine") return SyntheticTarget::Sine;
    if (name == "square") return SyntheticTarget::Square;
    if (name == "linear") return SyntheticTarget::Linear;
    throw std::invalid_argument("unknown synthetic target '" + std::string(name) + "' (expected sine, square, linear)");
}

double synthetic_target_value(SyntheticTarget t, double x) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    switch (t) {
        case SyntheticTarget::Sine: return std::sin(two_pi * x);
        case SyntheticTarget::Square: {
            const double s = std::sin(two_pi * x);
            return double((s > 0) - (s < 0));
        }
        case SyntheticTarget::Linear: return 2.0 * x - 1.0;
    }
    return 0.0;
}

Dataset synthesize(const SyntheticSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("synthetic dataset needs n >= 2");
    if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be nonnegative");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset ds;
    ds.name = std::string(to_string(spec.target));
    ds.X.resize(spec.n, 1);
    ds.y.resize(spec.n);
    ds.f_star.resize(spec.n);
    ds.feature_names = {"x"};
    for (Index i = 0; i < spec.n; ++i) ds.X(i, 0) = unif(rng);
    for (Index i = 0; i < spec.n; ++i) {
        ds.f_star[i] = synthetic_target_value(spec.target, ds.X(i, 0));
        ds.y[i] = ds.f_star[i] + (spec.noise_sigma > 0.0 ? spec.noise_sigma * normal(rng) : 0.0);
    }
    return ds;
}

SplitManifest split_indices(Index n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
    const Index n_test = static_cast<Index>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test < 1 || n_test >= n) throw std::invalid_argument("split leaves the train or test side empty");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    SplitManifest m;
    m.seed = seed;
    m.test_fraction = test_fraction;
    m.test.assign(perm.begin(), perm.begin() + n_test);
    m.train.assign(perm.begin() + n_test, perm.end());
    std::sort(m.test.begin(), m.test.end());
    std::sort(m.train.begin(), m.train.end());
    return m;
}

void to_json(nlohmann::json& j, const SplitManifest& m) {
    j = {{"seed", m.seed}, {"test_fraction", m.test_fraction}, {"train", m.train}, {"test", m.test}};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    const auto m = split_indices(ds.n(), test_fraction, seed);
    return {subset(ds, m.train), subset(ds, m.test)};
}

std::vector<std::vector<Index>> bootstrap_indices(Index n, int reps, std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("bootstrap needs at least one replicate");
    if (n < 1) throw std::invalid_argument("bootstrap needs a nonempty sample");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(reps));
    for (auto& s : out) {
        s.resize(static_cast<std::size_t>(n));
        for (auto& v : s) v = pick(rng);
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary3 quartiles(const std::vector<double>& values) {
    return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

std::vector<double> bootstrap_r2(const VecRef& y, const VecRef& pred, const std::vector<std::vector<Index>>& samples) {
    if (y.size() != pred.size()) throw std::invalid_argument("bootstrap_r2: length mismatch");
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        double mean = 0.0;
        for (Index i : s) mean += y[i];
        mean /= static_cast<double>(s.size());
        double ss_res = 0.0;
        double ss_tot = 0.0;
        for (Index i : s) {
            ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
            ss_tot += (y[i] - mean) * (y[i] - mean);
        }
        if (!(ss_tot > 0.0)) throw std::invalid_argument("bootstrap_r2: resample has zero target variance");
        out.push_back(1.0 - ss_res / ss_tot);
    }
    return out;
}

}  // namespace akt

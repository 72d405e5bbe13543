#pragma once

#include "akt/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace akt {

/// Per-feature affine map fitted on a training split.
struct Standardization {
    VectorXd means;
    VectorXd stds;
    std::vector<Index> kept;  // original column indices that survived (nonzero variance)
    std::vector<std::string> dropped_names;
};

void to_json(nlohmann::json& j, const Standardization& s);
void from_json(const nlohmann::json& j, Standardization& s);

struct Dataset {
    std::string name;
    MatrixXd X;
    VectorXd y;
    std::vector<std::string> feature_names;
    std::string target_name = "y";
    VectorXd f_star;  // noiseless targets when known (synthetic data), else empty
    std::optional<Standardization> standardization;
    Index dropped_rows = 0;  // rows removed during ingestion

    [[nodiscard]] Index n() const { return X.rows(); }
    [[nodiscard]] Index p() const { return X.cols(); }
    void validate() const;
};

/// Rows of a dataset, preserving names and any noiseless targets.
[[nodiscard]] Dataset subset(const Dataset& ds, const std::vector<Index>& rows);

/// Reads a delimited text file. Non-numeric columns are one-hot encoded with
/// levels in sorted order; rows with empty or "NA"/"?" fields are dropped.
/// Lines starting with '#' are skipped. Without a header, columns are named
/// c0, c1, ... and `target_column` may be such a name or a zero-based index.
/// An empty `target_column` reads every column as a feature and leaves y empty.
[[nodiscard]] Dataset load_csv(const std::string& path, const std::string& target_column, bool has_header = true,
                               char delimiter = ',');

struct StandardizedSplits {
    Dataset train;
    std::vector<Dataset> others;
    Standardization stats;
};

/// Fits (x - mean) / std on `train` and applies it to every set. A training set
/// that already carries statistics is left unchanged and its stored statistics
/// are reused. Zero-variance features are removed everywhere.
[[nodiscard]] StandardizedSplits standardize(const Dataset& train, const std::vector<Dataset>& others = {});

/// Applies stored statistics to another set (column selection plus affine map).
[[nodiscard]] Dataset apply_standardization(const Dataset& ds, const Standardization& s);

enum class SyntheticTarget { Sine, Square, Linear };

[[nodiscard]] std::string_view to_string(SyntheticTarget t);
[[nodiscard]] SyntheticTarget synthetic_target_from_string(std::string_view name);
[[nodiscard]] double synthetic_target_value(SyntheticTarget t, double x);

struct SyntheticSpec {
    SyntheticTarget target = SyntheticTarget::Sine;
    Index n = 100;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;
};

/// x ~ U[0, 1], y = f*(x) + noise_sigma * N(0, 1).
[[nodiscard]] Dataset synthesize(const SyntheticSpec& spec);

/// Seeded shuffle split; the test side gets round(test_fraction * n) rows.
[[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

struct SplitManifest {
    std::vector<Index> train;
    std::vector<Index> test;
    std::uint64_t seed = 0;
    double test_fraction = 0.0;
};

void to_json(nlohmann::json& j, const SplitManifest& m);

[[nodiscard]] SplitManifest split_indices(Index n, double test_fraction, std::uint64_t seed);

/// `reps` resamples of size n drawn with replacement.
[[nodiscard]] std::vector<std::vector<Index>> bootstrap_indices(Index n, int reps, std::uint64_t seed);

/// Linearly interpolated quantile (q in [0, 1]).
[[nodiscard]] double quantile(std::vector<double> values, double q);

struct Summary3 {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

[[nodiscard]] Summary3 quartiles(const std::vector<double>& values);

/// R^2 of `pred` on each bootstrap resample of (y, pred).
[[nodiscard]] std::vector<double> bootstrap_r2(const VecRef& y, const VecRef& pred,
                                               const std::vector<std::vector<Index>>& samples);

}  // namespace akt

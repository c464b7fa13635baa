#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rnnevo {

/// One multivariate series: T rows of P readings, row-major.
struct TimeSeriesFile {
    std::string name;
    std::vector<std::string> columns;
    std::vector<double> values;

    std::size_t rows() const { return columns.empty() ? 0 : values.size() / columns.size(); }
    std::size_t cols() const { return columns.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * columns.size() + col]; }
    double& at(std::size_t row, std::size_t col) { return values[row * columns.size() + col]; }
    std::vector<double> column(std::size_t col) const;
    std::size_t column_index(std::string_view name) const;  // throws if absent
};

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& what, std::size_t row, std::size_t column);
    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Header row plus comma-separated numeric rows. Row numbers in errors are
/// 1-based data rows (the header is row 0); columns are 1-based.
TimeSeriesFile parse_csv(std::string_view text, std::string name = "");
TimeSeriesFile load_csv(const std::string& path);
void write_csv(const TimeSeriesFile& file, const std::string& path);

struct ColumnRange {
    double min = 0.0;
    double max = 1.0;
};

using Normalization = std::vector<ColumnRange>;

enum class NormalizeMode { minmax, none };
NormalizeMode parse_normalize_mode(std::string_view name);

/// Per-column min/max over the given (training) files only.
Normalization fit_normalization(std::span<const TimeSeriesFile> training);

/// x -> (x - min) / (max - min); constant columns map to 0. Values outside
/// the fitted range are not clipped.
TimeSeriesFile apply_normalization(const TimeSeriesFile& file, const Normalization& norms);
double normalize_value(double x, const ColumnRange& range);
double denormalize_value(double y, const ColumnRange& range);

struct FoldPlan {
    int k = 0;
    int repeats = 1;
    std::vector<int> fold_of_file;

    std::vector<std::size_t> validation_files(int fold) const;
    std::vector<std::size_t> training_files(int fold) const;
};

/// Shuffles file indices with `seed` and deals them round-robin into k folds.
FoldPlan make_folds(std::size_t n_files, int k, std::uint64_t seed, int repeats = 1);
/// k = n_files / fold_size (10 files, fold size 2 -> 5 folds).
FoldPlan make_folds_by_size(std::size_t n_files, std::size_t fold_size, std::uint64_t seed, int repeats = 1);

/// Inputs at time t paired with targets at time t + 1.
struct Frames {
    std::size_t count = 0;
    std::size_t n_inputs = 0;
    std::size_t n_outputs = 0;
    std::vector<double> inputs;   // count x n_inputs
    std::vector<double> targets;  // count x n_outputs

    std::span<const double> input_row(std::size_t t) const { return {inputs.data() + t * n_inputs, n_inputs}; }
    std::span<const double> target_row(std::size_t t) const { return {targets.data() + t * n_outputs, n_outputs}; }
};

/// Every column of `file` (in `input_columns` order, or all columns when
/// empty) at t predicts `target_column` at t + 1. T rows give T - 1 frames.
Frames prediction_frames(const TimeSeriesFile& file, std::string_view target_column,
                         std::span<const std::string> input_columns = {});

/// A normalized set of series with a designated prediction parameter.
struct TimeSeriesSet {
    std::vector<TimeSeriesFile> files;
    Normalization normalization;
    std::string target_column;
    std::vector<std::string> input_columns;
};

/// Fits normalization on `training` indices only and applies it to all files.
TimeSeriesSet build_series_set(std::vector<TimeSeriesFile> files, std::span<const std::size_t> training,
                               std::string target_column, NormalizeMode mode);

/// Training and validation frames ready for the trainer.
struct EvaluationData {
    std::vector<Frames> training;
    std::vector<Frames> validation;
    std::size_t n_inputs = 0;
    std::size_t n_outputs = 1;
};

EvaluationData make_evaluation_data(const TimeSeriesSet& set, std::span<const std::size_t> training,
                                    std::span<const std::size_t> validation);

/// MSE of predicting target(t + 1) = target(t), pooled over all frames.
double persistence_mse(std::span<const Frames> frames, std::size_t target_input_column);

struct FixtureSpec {
    std::size_t files = 4;
    std::size_t rows = 1000;
    std::size_t columns = 12;
    std::uint64_t seed = 1;
};

/// Synthetic multivariate series: sine mixtures with autoregressive noise.
/// The last column, "target", is a noisy mixture of the oscillators that
/// drive the other columns, so it is predictable one step ahead from them.
std::vector<TimeSeriesFile> generate_fixture(const FixtureSpec& spec);

}  // namespace rnnevo

#include "rnnevo/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace rnnevo {

std::vector<double> TimeSeriesFile::column(std::size_t col) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
    return out;
}

std::size_t TimeSeriesFile::column_index(std::string_view col_name) const {
    auto it = std::find(columns.begin(), columns.end(), col_name);
    if (it == columns.end()) throw std::invalid_argument("column '" + std::string(col_name) + "' not found in " + name);
    return static_cast<std::size_t>(it - columns.begin());
}

CsvError::CsvError(const std::string& what, std::size_t row, std::size_t column)
    : std::runtime_error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
      row_(row),
      column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

}  // namespace

TimeSeriesFile parse_csv(std::string_view text, std::string name) {
    TimeSeriesFile file;
    file.name = std::move(name);
    std::size_t row = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (!header_seen) {
            for (auto c : cells) file.columns.emplace_back(c);
            header_seen = true;
            continue;
        }
        ++row;
        if (cells.size() != file.columns.size()) {
            throw CsvError("expected " + std::to_string(file.columns.size()) + " cells, found " +
                               std::to_string(cells.size()),
                           row, std::min(cells.size(), file.columns.size()) + 1);
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = cells[c];
            double value = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (cell.empty()) throw CsvError("missing value", row, c + 1);
            if (ec != std::errc() || ptr != last) throw CsvError("non-numeric cell '" + std::string(cell) + "'", row, c + 1);
            if (!std::isfinite(value)) throw CsvError("non-finite value", row, c + 1);
            file.values.push_back(value);
        }
    }
    if (!header_seen) throw CsvError("empty file", 0, 0);
    if (row == 0) throw CsvError("no data rows", 0, 0);
    return file;
}

TimeSeriesFile load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

void write_csv(const TimeSeriesFile& file, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.imbue(std::locale::classic());
    out << std::setprecision(17);
    for (std::size_t c = 0; c < file.cols(); ++c) out << (c ? "," : "") << file.columns[c];
    out << '\n';
    for (std::size_t r = 0; r < file.rows(); ++r) {
        for (std::size_t c = 0; c < file.cols(); ++c) out << (c ? "," : "") << file.at(r, c);
        out << '\n';
    }
}

NormalizeMode parse_normalize_mode(std::string_view name) {
    if (name == "minmax") return NormalizeMode::minmax;
    if (name == "none") return NormalizeMode::none;
    throw std::invalid_argument("unknown normalization mode '" + std::string(name) + "'");
}

Normalization fit_normalization(std::span<const TimeSeriesFile> training) {
    if (training.empty()) throw std::invalid_argument("fit_normalization needs at least one file");
    const std::size_t cols = training.front().cols();
    Normalization norms(cols, ColumnRange{std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity()});
    for (const auto& f : training) {
        if (f.cols() != cols) throw std::invalid_argument("column count differs between files");
        for (std::size_t r = 0; r < f.rows(); ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                norms[c].min = std::min(norms[c].min, f.at(r, c));
                norms[c].max = std::max(norms[c].max, f.at(r, c));
            }
        }
    }
    return norms;
}

double normalize_value(double x, const ColumnRange& range) {
    const double span = range.max - range.min;
    if (span == 0.0) return 0.0;
    return (x - range.min) / span;
}

double denormalize_value(double y, const ColumnRange& range) { return y * (range.max - range.min) + range.min; }

TimeSeriesFile apply_normalization(const TimeSeriesFile& file, const Normalization& norms) {
    if (norms.size() != file.cols()) throw std::invalid_argument("normalization does not match column count");
    TimeSeriesFile out = file;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) = normalize_value(file.at(r, c), norms[c]);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::validation_files(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_file.size(); ++i) {
        if (fold_of_file[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::training_files(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_file.size(); ++i) {
        if (fold_of_file[i] != fold) out.push_back(i);
    }
    return out;
}

FoldPlan make_folds(std::size_t n_files, int k, std::uint64_t seed, int repeats) {
    if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
    if (n_files < static_cast<std::size_t>(k)) throw std::invalid_argument("fewer files than folds");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    std::vector<std::size_t> order(n_files);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit draw so the plan does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = n_files; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    FoldPlan plan;
    plan.k = k;
    plan.repeats = repeats;
    plan.fold_of_file.assign(n_files, 0);
    for (std::size_t i = 0; i < n_files; ++i) plan.fold_of_file[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return plan;
}

FoldPlan make_folds_by_size(std::size_t n_files, std::size_t fold_size, std::uint64_t seed, int repeats) {
    if (fold_size == 0) throw std::invalid_argument("fold size must be positive");
    return make_folds(n_files, static_cast<int>(n_files / fold_size), seed, repeats);
}

Frames prediction_frames(const TimeSeriesFile& file, std::string_view target_column,
                         std::span<const std::string> input_columns) {
    if (file.rows() < 2) throw std::invalid_argument("series " + file.name + " needs at least 2 rows");
    const std::size_t target = file.column_index(target_column);
    std::vector<std::size_t> in_cols;
    if (input_columns.empty()) {
        in_cols.resize(file.cols());
        std::iota(in_cols.begin(), in_cols.end(), 0);
    } else {
        for (const auto& c : input_columns) in_cols.push_back(file.column_index(c));
    }
    Frames f;
    f.count = file.rows() - 1;
    f.n_inputs = in_cols.size();
    f.n_outputs = 1;
    f.inputs.reserve(f.count * f.n_inputs);
    f.targets.reserve(f.count);
    for (std::size_t t = 0; t + 1 < file.rows(); ++t) {
        for (auto c : in_cols) f.inputs.push_back(file.at(t, c));
        f.targets.push_back(file.at(t + 1, target));
    }
    return f;
}

TimeSeriesSet build_series_set(std::vector<TimeSeriesFile> files, std::span<const std::size_t> training,
                               std::string target_column, NormalizeMode mode) {
    if (files.empty()) throw std::invalid_argument("no series files");
    for (const auto& f : files) {
        if (f.columns != files.front().columns) throw std::invalid_argument("series files have differing columns");
    }
    files.front().column_index(target_column);
    TimeSeriesSet set;
    set.target_column = std::move(target_column);
    set.input_columns = files.front().columns;
    if (mode == NormalizeMode::minmax) {
        std::vector<TimeSeriesFile> train;
        for (auto i : training) train.push_back(files.at(i));
        set.normalization = fit_normalization(train);
        for (auto& f : files) f = apply_normalization(f, set.normalization);
    } else {
        set.normalization.assign(files.front().cols(), ColumnRange{0.0, 1.0});
    }
    set.files = std::move(files);
    return set;
}

EvaluationData make_evaluation_data(const TimeSeriesSet& set, std::span<const std::size_t> training,
                                    std::span<const std::size_t> validation) {
    EvaluationData data;
    for (auto i : training) data.training.push_back(prediction_frames(set.files.at(i), set.target_column, set.input_columns));
    for (auto i : validation) data.validation.push_back(prediction_frames(set.files.at(i), set.target_column, set.input_columns));
    data.n_inputs = set.input_columns.size();
    data.n_outputs = 1;
    return data;
}

double persistence_mse(std::span<const Frames> frames, std::size_t target_input_column) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : frames) {
        for (std::size_t t = 0; t < f.count; ++t) {
            const double d = f.input_row(t)[target_input_column] - f.target_row(t)[0];
            sum += d * d;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("persistence_mse: no frames");
    return sum / static_cast<double>(n);
}

std::vector<TimeSeriesFile> generate_fixture(const FixtureSpec& spec) {
    if (spec.columns < 2) throw std::invalid_argument("fixture needs at least 2 columns");
    if (spec.rows < 2 || spec.files < 1) throw std::invalid_argument("fixture needs rows >= 2 and files >= 1");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    const std::size_t drivers = spec.columns - 1;
    // Shared oscillator bank: a handful of periods between 3 and 8 steps.
    const std::size_t n_osc = std::min<std::size_t>(4, drivers);
    std::vector<double> omega(n_osc);
    for (auto& w : omega) w = 2.0 * std::numbers::pi / (3.0 + 5.0 * unit(rng));
    // Each driver column mixes the oscillators (sine and cosine phases).
    std::vector<std::vector<double>> mix_sin(drivers, std::vector<double>(n_osc));
    std::vector<std::vector<double>> mix_cos(drivers, std::vector<double>(n_osc));
    for (std::size_t c = 0; c < drivers; ++c) {
        for (std::size_t k = 0; k < n_osc; ++k) {
            mix_sin[c][k] = unit(rng) * 2.0 - 1.0;
            mix_cos[c][k] = unit(rng) * 2.0 - 1.0;
        }
    }
    std::vector<double> target_amp(n_osc);
    for (auto& a : target_amp) a = 0.5 + unit(rng);

    std::vector<TimeSeriesFile> files;
    for (std::size_t f = 0; f < spec.files; ++f) {
        TimeSeriesFile file;
        file.name = "fixture_" + std::to_string(f);
        for (std::size_t c = 0; c < drivers; ++c) file.columns.push_back("p" + std::to_string(c));
        file.columns.push_back("target");
        file.values.resize(spec.rows * spec.columns);
        std::vector<double> phase(n_osc);
        for (auto& p : phase) p = 2.0 * std::numbers::pi * unit(rng);
        std::vector<double> ar(drivers + 1, 0.0);
        for (std::size_t t = 0; t < spec.rows; ++t) {
            for (std::size_t c = 0; c <= drivers; ++c) ar[c] = 0.8 * ar[c] + 0.05 * noise(rng);
            for (std::size_t c = 0; c < drivers; ++c) {
                double v = 0.0;
                for (std::size_t k = 0; k < n_osc; ++k) {
                    const double a = omega[k] * static_cast<double>(t) + phase[k];
                    v += mix_sin[c][k] * std::sin(a) + mix_cos[c][k] * std::cos(a);
                }
                file.at(t, c) = 10.0 + 3.0 * v + ar[c];
            }
            double target = 0.0;
            for (std::size_t k = 0; k < n_osc; ++k) {
                target += target_amp[k] * std::sin(omega[k] * static_cast<double>(t) + phase[k]);
            }
            file.at(t, drivers) = 50.0 + 5.0 * target + ar[drivers];
        }
        files.push_back(std::move(file));
    }
    return files;
}

}  // namespace rnnevo

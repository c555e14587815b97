#include "simrf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "simrf/errors.hpp"

namespace simrf {
namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delimiter)) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == delimiter) out.emplace_back();
    return out;
}

bool parse_double(const std::string& text, double& value) {
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') ++begin;
    const auto result = std::from_chars(begin, end, value);
    return result.ec == std::errc() && result.ptr == end && std::isfinite(value);
}

Dataset from_rows(const std::string& name, const std::vector<std::vector<double>>& x,
                  const std::vector<int>& labels, std::vector<std::string> class_names) {
    Dataset data;
    data.name = name;
    data.features = Matrix(x.size(), x.empty() ? 0 : x.front().size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x[i].size(); ++j) data.features(i, j) = x[i][j];
    }
    data.labels = labels;
    data.class_names = std::move(class_names);
    return data;
}

}  // namespace

Matrix Dataset::one_hot() const {
    Matrix out = Matrix::Zero(size(), num_classes());
    for (std::size_t i = 0; i < labels.size(); ++i) out(i, labels[i]) = 1.0;
    return out;
}

Matrix Dataset::rows(const std::vector<std::size_t>& index) const {
    Matrix out(index.size(), features.cols());
    for (std::size_t i = 0; i < index.size(); ++i) out.row(i) = features.row(index[i]);
    return out;
}

Matrix Dataset::one_hot_rows(const std::vector<std::size_t>& index) const {
    Matrix out = Matrix::Zero(index.size(), num_classes());
    for (std::size_t i = 0; i < index.size(); ++i) out(i, labels[index[i]]) = 1.0;
    return out;
}

std::vector<int> Dataset::labels_of(const std::vector<std::size_t>& index) const {
    std::vector<int> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) out[i] = labels[index[i]];
    return out;
}

void Dataset::validate() const {
    if (labels.size() != size()) throw ArgumentError(name + ": label count does not match rows");
    if (num_classes() < 2) throw ArgumentError(name + ": need at least two classes");
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes()) {
            throw ArgumentError(name + ": label index out of range");
        }
    }
    std::vector<char> seen(size(), 0);
    for (const auto* split : {&train, &validation, &test}) {
        for (std::size_t i : *split) {
            if (i >= size()) throw ArgumentError(name + ": split index out of range");
            if (seen[i]++) throw ArgumentError(name + ": splits overlap at row " + std::to_string(i));
        }
    }
}

Dataset parse_dataset(std::istream& in, const std::string& name, const CsvOptions& options) {
    std::vector<std::vector<double>> x;
    std::vector<std::string> raw_labels;
    std::vector<std::string> column_names;
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    std::size_t label_col = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
        const auto fields = split_line(line, options.delimiter);
        if (columns == 0) {
            columns = fields.size();
            if (columns < 2) {
                throw ArgumentError(name + ": line " + std::to_string(line_no) +
                                    ": need at least one feature and a label column");
            }
            const long col = options.label_column < 0
                                 ? static_cast<long>(columns) + options.label_column
                                 : options.label_column;
            if (col < 0 || col >= static_cast<long>(columns)) {
                throw ArgumentError(name + ": label column " + std::to_string(options.label_column) +
                                    " out of range for " + std::to_string(columns) + " columns");
            }
            label_col = static_cast<std::size_t>(col);
            if (options.header) {
                column_names = fields;
                continue;
            }
        }
        if (fields.size() != columns) {
            throw ArgumentError(name + ": line " + std::to_string(line_no) + ": expected " +
                                std::to_string(columns) + " fields, found " +
                                std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(columns - 1);
        for (std::size_t c = 0; c < columns; ++c) {
            if (c == label_col) continue;
            double value = 0.0;
            if (!parse_double(fields[c], value)) {
                const std::string column =
                    column_names.empty() ? "column " + std::to_string(c) : "column '" + column_names[c] + "'";
                throw ArgumentError(name + ": line " + std::to_string(line_no) + ": non-numeric value '" +
                                    fields[c] + "' in " + column);
            }
            row.push_back(value);
        }
        x.push_back(std::move(row));
        raw_labels.push_back(fields[label_col]);
    }
    if (x.empty()) throw ArgumentError(name + ": no data rows");

    std::map<std::string, int> classes;
    for (const auto& label : raw_labels) classes.emplace(label, 0);
    std::vector<std::string> class_names;
    for (auto& [label, index] : classes) {
        index = static_cast<int>(class_names.size());
        class_names.push_back(label);
    }
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const auto& label : raw_labels) labels.push_back(classes.at(label));

    Dataset data = from_rows(name, x, labels, std::move(class_names));
    if (data.num_classes() < 2) throw ArgumentError(name + ": need at least two classes");
    split_dataset(data, options.train_fraction, options.validation_fraction, options.split_seed);
    if (options.standardize) standardize_features(data);
    data.validate();
    return data;
}

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open dataset '" + path.string() + "'");
    return parse_dataset(in, path.stem().string(), options);
}

void split_dataset(Dataset& data, double train_fraction, double validation_fraction,
                   std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(validation_fraction >= 0.0) ||
        !(train_fraction + validation_fraction <= 1.0)) {
        throw ArgumentError("split fractions must satisfy 0 < train, 0 <= validation, sum <= 1");
    }
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto gen = RngStream(seed, 0x5B117).engine();
    // Fisher-Yates with an explicit draw so the permutation does not depend on std::shuffle.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen() % i);
        std::swap(order[i - 1], order[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
    const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * n));
    if (n_train == 0) throw ArgumentError(data.name + ": training split is empty");
    data.train.assign(order.begin(), order.begin() + n_train);
    data.validation.assign(order.begin() + n_train, order.begin() + std::min(n, n_train + n_val));
    data.test.assign(order.begin() + std::min(n, n_train + n_val), order.end());
    for (auto* split : {&data.train, &data.validation, &data.test}) std::sort(split->begin(), split->end());
}

void standardize_features(Dataset& data) {
    const Matrix train = data.rows(data.train);
    const Vector mean = train.colwise().mean().transpose();
    for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
        const double var = train.rows() > 1
                               ? (train.col(c).array() - mean[c]).square().sum() / (train.rows() - 1)
                               : 0.0;
        const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        data.features.col(c) = (data.features.col(c).array() - mean[c]) * scale;
    }
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index c = 0; c < data.features.cols(); ++c) out << data.features(i, c) << ',';
        out << data.class_names[data.labels[i]] << '\n';
    }
}

Dataset zero_pad(const Dataset& data, std::size_t dim) {
    if (dim < data.dim()) throw ArgumentError("zero_pad: target dimension below current");
    Dataset out = data;
    out.features = Matrix::Zero(data.size(), dim);
    out.features.leftCols(data.features.cols()) = data.features;
    return out;
}

Dataset make_banknote_like(const RngStream& rng) {
    // Class-conditional Gaussians with the feature correlation of the original table.
    Matrix corr(4, 4);
    corr << 1.0, 0.26, -0.38, 0.28, 0.26, 1.0, -0.79, -0.53, -0.38, -0.79, 1.0, 0.32, 0.28, -0.53,
        0.32, 1.0;
    const Matrix chol = corr.llt().matrixL();
    const double mean[2][4] = {{2.28, 4.26, 0.80, -1.15}, {-1.87, -0.99, 2.15, -1.25}};
    const double sd[2][4] = {{2.02, 5.14, 3.24, 2.13}, {1.88, 5.40, 5.26, 2.07}};
    const std::size_t counts[2] = {762, 610};
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    for (int c = 0; c < 2; ++c) {
        const Matrix z = sample_gaussian_matrix(counts[c], 4, rng.substream(c)) * chol.transpose();
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            std::vector<double> row(4);
            for (int j = 0; j < 4; ++j) row[j] = mean[c][j] + sd[c][j] * z(i, j);
            x.push_back(row);
            labels.push_back(c);
        }
    }
    Dataset data = from_rows("banknote-like", x, labels, {"0", "1"});
    split_dataset(data, 0.6, 0.2, rng.seed);
    return data;
}

Dataset make_wifi_like(const RngStream& rng) {
    // Log-distance path loss from 7 access points to positions scattered around 4 room centres.
    const double ap[7][2] = {{0, 0}, {10, 0}, {20, 0}, {0, 10}, {20, 10}, {5, 20}, {15, 20}};
    const double room[4][2] = {{4, 4}, {16, 4}, {4, 14}, {16, 14}};
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c) {
        const Matrix pos = sample_gaussian_matrix(500, 2, rng.substream(2 * c));
        const Matrix shadow = sample_gaussian_matrix(500, 7, rng.substream(2 * c + 1));
        for (Eigen::Index i = 0; i < 500; ++i) {
            const double px = room[c][0] + 2.5 * pos(i, 0);
            const double py = room[c][1] + 2.5 * pos(i, 1);
            std::vector<double> row(7);
            for (int a = 0; a < 7; ++a) {
                const double dist = std::max(0.5, std::hypot(px - ap[a][0], py - ap[a][1]));
                const double rssi = -35.0 - 25.0 * std::log10(dist) + 4.0 * shadow(i, a);
                row[a] = std::round(std::clamp(rssi, -100.0, -10.0));
            }
            x.push_back(row);
            labels.push_back(c);
        }
    }
    Dataset data = from_rows("wifi-like", x, labels, {"1", "2", "3", "4"});
    split_dataset(data, 0.6, 0.2, rng.seed);
    return data;
}

Matrix gaussian_points(std::size_t n, std::size_t d, double sigma, const RngStream& rng) {
    return sigma * sample_gaussian_matrix(n, d, rng);
}

}  // namespace simrf

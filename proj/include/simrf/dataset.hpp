#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "simrf/rng.hpp"

namespace simrf {

/// Labelled numeric data with a fixed train / validation / test split.
struct Dataset {
    std::string name;
    Matrix features;                       // n x d
    std::vector<int> labels;               // class index per row
    std::vector<std::string> class_names;  // index -> original label text
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;

    std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t num_classes() const { return class_names.size(); }

    // n x c indicator matrix, rows summing to one.
    Matrix one_hot() const;
    Matrix rows(const std::vector<std::size_t>& index) const;
    Matrix one_hot_rows(const std::vector<std::size_t>& index) const;
    std::vector<int> labels_of(const std::vector<std::size_t>& index) const;

    // Throws ArgumentError on inconsistent shapes, labels or split indices.
    void validate() const;
};

struct CsvOptions {
    int label_column = -1;  // negative counts from the end, -1 is the last column
    char delimiter = ',';
    bool header = false;
    double train_fraction = 0.6;
    double validation_fraction = 0.2;  // the remainder is the test split
    std::uint64_t split_seed = 0;
    // Zero mean / unit variance per column, with statistics taken from the training rows.
    bool standardize = false;
};

Dataset parse_dataset(std::istream& in, const std::string& name, const CsvOptions& options);
Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options);

// Reassigns the three splits from a seeded permutation.
void split_dataset(Dataset& data, double train_fraction, double validation_fraction,
                   std::uint64_t seed);
void standardize_features(Dataset& data);

// Features followed by the label text, comma separated, no header.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

// Appends zero columns up to `dim` features.
Dataset zero_pad(const Dataset& data, std::size_t dim);

/// Synthetic stand-ins with the shape of two small UCI problems.
///
/// banknote-like: 1372 rows, 4 wavelet-statistic style features, 2 classes.
/// wifi-like: 2000 rows, 7 signal-strength style features in dBm, 4 rooms.
Dataset make_banknote_like(const RngStream& rng);
Dataset make_wifi_like(const RngStream& rng);

// n points with i.i.d. N(0, sigma^2) coordinates.
Matrix gaussian_points(std::size_t n, std::size_t d, double sigma, const RngStream& rng);

}  // namespace simrf

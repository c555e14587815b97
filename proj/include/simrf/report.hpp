#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "simrf/stats.hpp"

namespace simrf {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

// Shortest round-trip decimal form ("%.17g"), so reruns give identical bytes.
std::string format_double(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

    // Header line plus data lines, each terminated by '\n'.
    std::string body() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

// First line "# " followed by {"config": ..., "version": ...} on one line, then the table.
void write_csv(const std::filesystem::path& path, const Json& config, const CsvTable& table);

Json stats_json(const SampleStats& s);

/// Seeded, serialisable record of one run. The config and version come
/// first, followed by the statistics and the list of files written.
struct ExperimentReport {
    std::string kind;
    Json config = Json::object();
    Json statistics = Json::array();
    std::vector<std::string> files;

    Json to_json() const;
    void write(const std::filesystem::path& path) const;
};

}  // namespace simrf

#include "simrf/report.hpp"

#include <cstdio>
#include <fstream>

#include "simrf/errors.hpp"

namespace simrf {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) {
        throw ArgumentError("CsvTable: row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(cells));
}

std::string CsvTable::body() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out;
}

void write_csv(const std::filesystem::path& path, const Json& config, const CsvTable& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    Json header = Json::object();
    header["config"] = config;
    header["version"] = kVersion;
    out << "# " << header.dump() << '\n' << table.body();
}

Json stats_json(const SampleStats& s) {
    Json j = Json::object();
    j["trials"] = s.count;
    j["mean"] = s.mean;
    j["sem"] = s.sem;
    j["variance"] = s.variance;
    return j;
}

Json ExperimentReport::to_json() const {
    Json j = Json::object();
    j["config"] = config;
    j["version"] = kVersion;
    j["kind"] = kind;
    j["statistics"] = statistics;
    j["files"] = files;
    return j;
}

void ExperimentReport::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << to_json().dump(2) << '\n';
}

}  // namespace simrf

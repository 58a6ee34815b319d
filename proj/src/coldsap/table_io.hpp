#pragma once

#include "coldsap/units.hpp"

#include <map>
#include <string>
#include <vector>

namespace coldsap {

struct Column {
    std::string name;
    std::string unit; // "1" for dimensionless
};

// Rectangular numeric table; missing values are NaN.
struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;
    std::vector<std::string> labels; // optional per-row text, written as a last column

    void add_row(std::vector<double> row, std::string label = {});
    std::vector<double> column(const std::string& name) const;
    std::size_t index_of(const std::string& name) const;
};

// "# units: <mode>" header, comment lines, "name[unit],..." and rows with 17
// significant digits.
std::string format_table(const Table& t, UnitMode units);
void write_table(const std::string& path, const Table& t, UnitMode units);
Table read_table(const std::string& path);
Table parse_table(const std::string& text);

std::string format_double(double v);

struct RunManifest {
    std::string subcommand;
    std::string config_hash;
    std::string canonical_config;
    std::string units;
    std::string started;
    std::string finished;
    std::string version;
    std::vector<std::string> artifacts;
    std::map<std::string, std::string> notes;
};

std::string manifest_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

// Matplotlib script that plots the y columns of a table file against x.
std::string plot_script(const std::string& table_file, const std::string& x, const std::vector<std::string>& ys,
                        const std::string& title);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

std::string utc_timestamp();

} // namespace coldsap

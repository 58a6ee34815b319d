#include "coldsap/table_io.hpp"

#include "coldsap/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace coldsap {

void Table::add_row(std::vector<double> row, std::string label)
{
    if (row.size() != columns.size()) throw ContractError("table: row width does not match the header");
    rows.push_back(std::move(row));
    if (!label.empty() || !labels.empty()) {
        labels.resize(rows.size() - 1);
        labels.push_back(std::move(label));
    }
}

std::size_t Table::index_of(const std::string& name) const
{
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c].name == name) return c;
    throw ContractError("table: no column named " + name);
}

std::vector<double> Table::column(const std::string& name) const
{
    const std::size_t c = index_of(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_table(const Table& t, UnitMode units)
{
    std::ostringstream out;
    out << "# units: " << to_string(units) << '\n';
    for (const auto& c : t.comments) out << "# " << c << '\n';
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c > 0) out << ',';
        out << t.columns[c].name << '[' << t.columns[c].unit << ']';
    }
    const bool labelled = !t.labels.empty();
    if (labelled) out << ",label[text]";
    out << '\n';
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
            if (c > 0) out << ',';
            out << format_double(t.rows[r][c]);
        }
        if (labelled) out << ",\"" << (r < t.labels.size() ? t.labels[r] : std::string()) << '"';
        out << '\n';
    }
    return out.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IoError("failed writing " + path);
}

std::string read_text(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write_table(const std::string& path, const Table& t, UnitMode units)
{
    write_text(path, format_table(t, units));
}

Table parse_table(const std::string& text)
{
    Table t;
    std::istringstream in(text);
    std::string line;
    bool header = false, labelled = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# units:", 0) != 0) t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') quoted = !quoted;
            else if (ch == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else cell += ch;
        }
        cells.push_back(cell);
        if (!header) {
            for (const auto& c : cells) {
                const auto open = c.find('['), close = c.rfind(']');
                if (open == std::string::npos || close == std::string::npos || close < open)
                    throw IoError("table: header cell '" + c + "' lacks a [unit]");
                Column col{c.substr(0, open), c.substr(open + 1, close - open - 1)};
                if (col.name == "label" && col.unit == "text") labelled = true;
                else t.columns.push_back(col);
            }
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size() + (labelled ? 1 : 0)) throw IoError("table: ragged row: " + line);
        std::vector<double> row;
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            const std::string& s = cells[c];
            if (s == "nan") row.push_back(std::numeric_limits<double>::quiet_NaN());
            else if (s == "inf") row.push_back(std::numeric_limits<double>::infinity());
            else if (s == "-inf") row.push_back(-std::numeric_limits<double>::infinity());
            else {
                char* end = nullptr;
                const double v = std::strtod(s.c_str(), &end);
                if (end == s.c_str() || *end != '\0') throw IoError("table: bad number '" + s + "'");
                row.push_back(v);
            }
        }
        t.rows.push_back(std::move(row));
        if (labelled) t.labels.push_back(cells.back());
    }
    if (!header) throw IoError("table: no header line");
    return t;
}

Table read_table(const std::string& path)
{
    return parse_table(read_text(path));
}

std::string manifest_json(const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["subcommand"] = m.subcommand;
    j["config_hash"] = m.config_hash;
    j["units"] = m.units;
    j["version"] = m.version;
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["artifacts"] = m.artifacts;
    j["notes"] = m.notes;
    j["canonical_config"] = m.canonical_config;
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& m)
{
    write_text(path, manifest_json(m));
}

RunManifest read_manifest(const std::string& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
        RunManifest m;
        m.subcommand = j.at("subcommand").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.canonical_config = j.at("canonical_config").get<std::string>();
        m.units = j.value("units", "");
        m.version = j.value("version", "");
        m.started = j.value("started", "");
        m.finished = j.value("finished", "");
        m.artifacts = j.value("artifacts", std::vector<std::string>{});
        m.notes = j.value("notes", std::map<std::string, std::string>{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("manifest " + path + ": " + e.what());
    }
}

std::string plot_script(const std::string& table_file, const std::string& x, const std::vector<std::string>& ys,
                        const std::string& title)
{
    std::ostringstream s;
    s << "import csv\nimport sys\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n"
      << "path = sys.argv[1] if len(sys.argv) > 1 else \"" << table_file << "\"\n"
      << "with open(path) as f:\n"
      << "    lines = [l for l in f if not l.startswith(\"#\")]\n"
      << "reader = csv.reader(lines)\n"
      << "header = next(reader)\n"
      << "names = [h.split(\"[\")[0] for h in header]\n"
      << "rows = [r for r in reader]\n"
      << "col = lambda n: [float(r[names.index(n)]) for r in rows]\n"
      << "fig, ax = plt.subplots()\n";
    for (const auto& y : ys)
        s << "ax.plot(col(\"" << x << "\"), col(\"" << y << "\"), label=\"" << y << "\")\n";
    s << "ax.set_xlabel(header[names.index(\"" << x << "\")])\n"
      << "ax.set_title(\"" << title << "\")\n"
      << "ax.legend()\n"
      << "fig.savefig(path.rsplit(\".\", 1)[0] + \".png\", dpi=150)\n";
    return s.str();
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace coldsap

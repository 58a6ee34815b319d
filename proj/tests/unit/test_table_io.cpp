#include "coldsap/errors.hpp"
#include "coldsap/table_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace coldsap;

TEST_CASE("tables round-trip exactly")
{
    Table t;
    t.columns = {{"u", "hbar*omega"}, {"fidelity", "1"}};
    t.comments = {"model: continuum"};
    t.add_row({0.1, 1.0 / 3.0}, "first");
    t.add_row({-0.5, std::numeric_limits<double>::quiet_NaN()}, "");
    t.add_row({1e-300, std::numeric_limits<double>::infinity()}, "third");
    const std::string text = format_table(t, UnitMode::natural);
    CHECK(text.find("u[hbar*omega]") != std::string::npos);
    const Table back = parse_table(text);
    REQUIRE(back.rows.size() == 3);
    CHECK(back.columns[0].unit == "hbar*omega");
    CHECK(back.rows[0][1] == 1.0 / 3.0);
    CHECK(std::isnan(back.rows[1][1]));
    CHECK(std::isinf(back.rows[2][1]));
    CHECK(back.rows[2][0] == 1e-300);
    CHECK(back.labels[2] == "third");
    CHECK(format_table(back, UnitMode::natural) == text);
    CHECK(back.column("u") == std::vector<double>{0.1, -0.5, 1e-300});
    CHECK_THROWS_AS(back.column("nope"), ContractError);
}

TEST_CASE("manifest round-trip")
{
    RunManifest m;
    m.subcommand = "scaling";
    m.config_hash = "abc";
    m.canonical_config = "particles = 2\nunits = natural\n";
    m.units = "natural";
    m.started = utc_timestamp();
    m.finished = m.started;
    m.version = "0.1.0";
    m.artifacts = {"scaling.tsv"};
    m.notes["key"] = "value";
    const auto dir = std::filesystem::temp_directory_path() / "coldsap_manifest_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "manifest.json").string();
    write_manifest(path, m);
    const RunManifest r = read_manifest(path);
    CHECK(r.canonical_config == m.canonical_config);
    CHECK(r.artifacts == m.artifacts);
    CHECK(r.notes.at("key") == "value");
    CHECK_THROWS_AS(read_manifest((dir / "missing.json").string()), IoError);
}

#include "coldsap/coldsap.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct Flags {
    std::string config;
    std::string out = "runs";
    int jobs = 1;
    bool dry_run = false;
    std::string seed_manifest;
};

int exit_code(coldsap_status s)
{
    switch (s) {
    case COLDSAP_OK: return 0;
    case COLDSAP_ERR_CONFIG:
    case COLDSAP_ERR_CONTRACT: return 2;
    case COLDSAP_ERR_NUMERICAL:
    case COLDSAP_ERR_DOMAIN: return 3;
    case COLDSAP_ERR_IO: return 4;
    default: return 1;
    }
}

int fail(coldsap_status s)
{
    std::fprintf(stderr, "error (%s): %s\n", coldsap_status_name(s), coldsap_last_error());
    return exit_code(s);
}

int run(const std::string& subcommand, const Flags& f)
{
    coldsap_config* cfg = nullptr;
    coldsap_status s;
    if (!f.seed_manifest.empty()) {
        s = coldsap_config_from_manifest(f.seed_manifest.c_str(), &cfg);
        if (s != COLDSAP_OK) return fail(s);
        if (subcommand != coldsap_config_subcommand(cfg))
            std::fprintf(stderr, "note: manifest was written by '%s', running '%s'\n", coldsap_config_subcommand(cfg),
                         subcommand.c_str());
    } else {
        s = coldsap_config_load(f.config.c_str(), &cfg);
        if (s != COLDSAP_OK) return fail(s);
    }
    coldsap_run_options opts{f.out.c_str(), f.jobs, f.dry_run ? 1 : 0};
    coldsap_run* r = nullptr;
    s = coldsap_run_subcommand(subcommand.c_str(), cfg, &opts, &r);
    coldsap_config_free(cfg);
    if (s != COLDSAP_OK) return fail(s);
    for (size_t i = 0; i < coldsap_run_message_count(r); ++i) std::printf("%s\n", coldsap_run_message(r, i));
    if (!f.dry_run) {
        std::printf("config hash %s\n", coldsap_run_config_hash(r));
        for (size_t i = 0; i < coldsap_run_artifact_count(r); ++i)
            std::printf("wrote %s/%s\n", f.out.c_str(), coldsap_run_artifact(r, i));
        std::printf("wrote %s/manifest.json\n", f.out.c_str());
    }
    coldsap_run_free(r);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spatial adiabatic passage separation simulator"};
    app.set_version_flag("--version", coldsap_version());
    app.require_subcommand(1, 1);

    Flags flags;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (size_t i = 0; i < coldsap_subcommand_count(); ++i) {
        const std::string name = coldsap_subcommand_name(i);
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " driver");
        auto* config = sub->add_option("--config", flags.config, "configuration file");
        auto* seed = sub->add_option("--seed-manifest", flags.seed_manifest, "re-run from a manifest.json");
        config->excludes(seed);
        sub->add_option("--out", flags.out, "output directory")->capture_default_str();
        sub->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_flag("--dry-run", flags.dry_run, "validate the configuration only");
        subs.emplace_back(name, sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (const auto& [name, sub] : subs) {
        if (!sub->parsed()) continue;
        if (flags.config.empty() && flags.seed_manifest.empty()) {
            std::fprintf(stderr, "error: %s needs --config or --seed-manifest\n", name.c_str());
            return 2;
        }
        return run(name, flags);
    }
    return 2;
}

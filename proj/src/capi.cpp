#include "coldsap/coldsap.h"

#include "coldsap/config.hpp"
#include "coldsap/continuum.hpp"
#include "coldsap/drivers.hpp"
#include "coldsap/errors.hpp"

#include <exception>
#include <new>
#include <string>

struct coldsap_config {
    coldsap::ExperimentConfig cfg;
    std::string hash;
    std::string canonical;
    std::string subcommand;
};

struct coldsap_run {
    coldsap::RunSummary summary;
};

namespace {

thread_local std::string last_error;

coldsap_status status_of(coldsap::ErrorKind kind)
{
    switch (kind) {
    case coldsap::ErrorKind::config: return COLDSAP_ERR_CONFIG;
    case coldsap::ErrorKind::numerical: return COLDSAP_ERR_NUMERICAL;
    case coldsap::ErrorKind::io: return COLDSAP_ERR_IO;
    case coldsap::ErrorKind::contract: return COLDSAP_ERR_CONTRACT;
    case coldsap::ErrorKind::domain: return COLDSAP_ERR_DOMAIN;
    }
    return COLDSAP_ERR_INTERNAL;
}

template <class F>
coldsap_status guarded(F&& f)
{
    try {
        f();
        last_error.clear();
        return COLDSAP_OK;
    } catch (const coldsap::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return COLDSAP_ERR_INTERNAL;
}

coldsap_status null_argument(const char* what)
{
    last_error = std::string("null argument: ") + what;
    return COLDSAP_ERR_CONTRACT;
}

coldsap_config* wrap(coldsap::ExperimentConfig cfg, std::string subcommand = {})
{
    auto* h = new coldsap_config{std::move(cfg), {}, {}, std::move(subcommand)};
    h->hash = coldsap::config_hash(h->cfg);
    h->canonical = coldsap::canonical_text(h->cfg);
    return h;
}

} // namespace

extern "C" {

const char* coldsap_version(void) { return "0.1.0"; }

const char* coldsap_last_error(void) { return last_error.c_str(); }

const char* coldsap_status_name(coldsap_status status)
{
    switch (status) {
    case COLDSAP_OK: return "ok";
    case COLDSAP_ERR_CONFIG: return "config error";
    case COLDSAP_ERR_NUMERICAL: return "numerical error";
    case COLDSAP_ERR_IO: return "io error";
    case COLDSAP_ERR_CONTRACT: return "contract error";
    case COLDSAP_ERR_DOMAIN: return "domain error";
    case COLDSAP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

coldsap_status coldsap_config_load(const char* path, coldsap_config** out)
{
    if (!path || !out) return null_argument("path/out");
    *out = nullptr;
    return guarded([&] { *out = wrap(coldsap::load_config(path, coldsap::process_environment())); });
}

coldsap_status coldsap_config_parse(const char* text, coldsap_config** out)
{
    if (!text || !out) return null_argument("text/out");
    *out = nullptr;
    return guarded([&] {
        coldsap::ExperimentConfig cfg = coldsap::parse_config(text);
        const coldsap::ValidationReport report = coldsap::validate_config(cfg);
        if (!report.ok()) throw coldsap::ConfigError(report.describe());
        *out = wrap(std::move(cfg));
    });
}

coldsap_status coldsap_config_from_manifest(const char* path, coldsap_config** out)
{
    if (!path || !out) return null_argument("path/out");
    *out = nullptr;
    return guarded([&] {
        auto [cfg, sub] = coldsap::config_from_manifest(path);
        *out = wrap(std::move(cfg), std::move(sub));
    });
}

void coldsap_config_free(coldsap_config* config) { delete config; }

const char* coldsap_config_hash(const coldsap_config* config) { return config ? config->hash.c_str() : ""; }

const char* coldsap_config_canonical(const coldsap_config* config) { return config ? config->canonical.c_str() : ""; }

const char* coldsap_config_subcommand(const coldsap_config* config)
{
    return config ? config->subcommand.c_str() : "";
}

int coldsap_config_particles(const coldsap_config* config) { return config ? config->cfg.particles : 0; }

size_t coldsap_subcommand_count(void) { return coldsap::subcommand_names().size(); }

const char* coldsap_subcommand_name(size_t index)
{
    const auto& names = coldsap::subcommand_names();
    return index < names.size() ? names[index].c_str() : nullptr;
}

coldsap_status coldsap_run_subcommand(const char* subcommand, const coldsap_config* config,
                                      const coldsap_run_options* options, coldsap_run** out)
{
    if (!subcommand || !config || !out) return null_argument("subcommand/config/out");
    *out = nullptr;
    return guarded([&] {
        coldsap::RunOptions opts;
        if (options) {
            if (options->out_dir) opts.out_dir = options->out_dir;
            opts.jobs = options->jobs < 1 ? 1 : options->jobs;
            opts.dry_run = options->dry_run != 0;
        }
        auto* run = new coldsap_run{};
        try {
            run->summary = coldsap::run_subcommand(subcommand, config->cfg, opts);
        } catch (...) {
            delete run;
            throw;
        }
        *out = run;
    });
}

void coldsap_run_free(coldsap_run* run) { delete run; }

size_t coldsap_run_artifact_count(const coldsap_run* run) { return run ? run->summary.manifest.artifacts.size() : 0; }

const char* coldsap_run_artifact(const coldsap_run* run, size_t index)
{
    if (!run || index >= run->summary.manifest.artifacts.size()) return nullptr;
    return run->summary.manifest.artifacts[index].c_str();
}

size_t coldsap_run_message_count(const coldsap_run* run) { return run ? run->summary.messages.size() : 0; }

const char* coldsap_run_message(const coldsap_run* run, size_t index)
{
    if (!run || index >= run->summary.messages.size()) return nullptr;
    return run->summary.messages[index].c_str();
}

const char* coldsap_run_config_hash(const coldsap_run* run)
{
    return run ? run->summary.manifest.config_hash.c_str() : "";
}

coldsap_status coldsap_busch_coupling(double ground_energy, double* coupling)
{
    if (!coupling) return null_argument("coupling");
    return guarded([&] { *coupling = coldsap::busch_g_from_energy(ground_energy); });
}

} // extern "C"

#include "coldsap/coldsap.h"

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                    \
        }                                                                  \
    } while (0)

static int file_exists(const char* dir, const char* name)
{
    char path[1024];
    snprintf(path, sizeof path, "%s/%s", dir, name);
    FILE* f = fopen(path, "r");
    if (!f) return 0;
    fclose(f);
    return 1;
}

int main(int argc, char** argv)
{
    const char* out = argc > 1 ? argv[1] : "capi_out";
    coldsap_config* cfg = NULL;
    coldsap_run* run = NULL;

    CHECK(strlen(coldsap_version()) > 0);
    CHECK(coldsap_subcommand_count() == 7);
    CHECK(strcmp(coldsap_subcommand_name(0), "spectrum") == 0);
    CHECK(coldsap_subcommand_name(99) == NULL);

    CHECK(coldsap_config_parse("units = natural\nparticles = 2\ntarget_split = 2\n", &cfg) == COLDSAP_ERR_CONFIG);
    CHECK(cfg == NULL);
    CHECK(strstr(coldsap_last_error(), "target_split") != NULL);

    CHECK(coldsap_config_parse("units = natural\nbogus_key = 1\n", &cfg) == COLDSAP_ERR_CONFIG);
    CHECK(strstr(coldsap_last_error(), "bogus_key") != NULL);

    CHECK(coldsap_config_load("/nonexistent/dir/x.cfg", &cfg) != COLDSAP_OK);
    CHECK(coldsap_config_parse(NULL, &cfg) == COLDSAP_ERR_CONTRACT);

    CHECK(coldsap_config_parse("units = natural\nparticles = 3\ntarget_split = 1\nu_max = 1 natural\n", &cfg) ==
          COLDSAP_OK);
    CHECK(strlen(coldsap_last_error()) == 0);
    CHECK(coldsap_config_particles(cfg) == 3);
    CHECK(strlen(coldsap_config_hash(cfg)) == 64);
    CHECK(strstr(coldsap_config_canonical(cfg), "particles = 3") != NULL);

    coldsap_run_options dry = {out, 1, 1};
    CHECK(coldsap_run_subcommand("separation", cfg, &dry, &run) == COLDSAP_ERR_CONFIG);
    CHECK(run == NULL);
    CHECK(coldsap_run_subcommand("no-such-thing", cfg, &dry, &run) == COLDSAP_ERR_CONTRACT);
    CHECK(coldsap_run_subcommand("scaling", cfg, &dry, &run) == COLDSAP_OK);
    CHECK(coldsap_run_artifact_count(run) == 0);
    CHECK(coldsap_run_message_count(run) == 1);
    coldsap_run_free(run);
    run = NULL;

    coldsap_run_options opts = {out, 2, 0};
    CHECK(coldsap_run_subcommand("scaling", cfg, &opts, &run) == COLDSAP_OK);
    CHECK(strcmp(coldsap_run_config_hash(run), coldsap_config_hash(cfg)) == 0);
    for (size_t i = 0; i < coldsap_run_artifact_count(run); ++i) CHECK(file_exists(out, coldsap_run_artifact(run, i)));
    CHECK(file_exists(out, "scaling.tsv"));
    CHECK(file_exists(out, "manifest.json"));
    coldsap_run_free(run);
    run = NULL;

    char manifest[1024];
    snprintf(manifest, sizeof manifest, "%s/manifest.json", out);
    coldsap_config* again = NULL;
    CHECK(coldsap_config_from_manifest(manifest, &again) == COLDSAP_OK);
    CHECK(strcmp(coldsap_config_hash(again), coldsap_config_hash(cfg)) == 0);
    CHECK(strcmp(coldsap_config_subcommand(again), "scaling") == 0);
    coldsap_config_free(again);
    coldsap_config_free(cfg);

    double g = -1.0;
    CHECK(coldsap_busch_coupling(1.0, &g) == COLDSAP_OK);
    CHECK(g == 0.0);
    CHECK(coldsap_busch_coupling(2.0, &g) == COLDSAP_ERR_DOMAIN);
    CHECK(coldsap_busch_coupling(1.5, &g) == COLDSAP_OK);
    CHECK(g > 0.0 && isfinite(g));
    CHECK(coldsap_busch_coupling(0.8, &g) == COLDSAP_OK);
    CHECK(g < 0.0);

    coldsap_config_free(NULL);
    coldsap_run_free(NULL);

    if (failures) {
        fprintf(stderr, "%d C API checks failed\n", failures);
        return 1;
    }
    printf("C API checks passed\n");
    return 0;
}

#ifndef COLDSAP_COLDSAP_H
#define COLDSAP_COLDSAP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(COLDSAP_BUILDING_LIBRARY)
#define COLDSAP_API __attribute__((visibility("default")))
#else
#define COLDSAP_API
#endif

typedef enum coldsap_status {
    COLDSAP_OK = 0,
    COLDSAP_ERR_CONFIG = 2,
    COLDSAP_ERR_NUMERICAL = 3,
    COLDSAP_ERR_IO = 4,
    COLDSAP_ERR_CONTRACT = 5,
    COLDSAP_ERR_DOMAIN = 6,
    COLDSAP_ERR_INTERNAL = 7
} coldsap_status;

typedef struct coldsap_config coldsap_config;
typedef struct coldsap_run coldsap_run;

typedef struct coldsap_run_options {
    const char* out_dir; /* NULL means "." */
    int jobs;            /* values below 1 mean 1 */
    int dry_run;
} coldsap_run_options;

COLDSAP_API const char* coldsap_version(void);

/* Message of the last failed call on this thread; empty after success. */
COLDSAP_API const char* coldsap_last_error(void);

COLDSAP_API const char* coldsap_status_name(coldsap_status status);

/* Loads and validates a config file; COLDSAP_<KEY> environment variables override file values. */
COLDSAP_API coldsap_status coldsap_config_load(const char* path, coldsap_config** out);
COLDSAP_API coldsap_status coldsap_config_parse(const char* text, coldsap_config** out);
/* Config stored in a run manifest; the manifest's subcommand is kept on the handle. */
COLDSAP_API coldsap_status coldsap_config_from_manifest(const char* path, coldsap_config** out);
COLDSAP_API void coldsap_config_free(coldsap_config* config);

/* Strings stay valid until the handle is freed. */
COLDSAP_API const char* coldsap_config_hash(const coldsap_config* config);
COLDSAP_API const char* coldsap_config_canonical(const coldsap_config* config);
COLDSAP_API const char* coldsap_config_subcommand(const coldsap_config* config);
COLDSAP_API int coldsap_config_particles(const coldsap_config* config);

COLDSAP_API size_t coldsap_subcommand_count(void);
COLDSAP_API const char* coldsap_subcommand_name(size_t index);

COLDSAP_API coldsap_status coldsap_run_subcommand(const char* subcommand, const coldsap_config* config,
                                                  const coldsap_run_options* options, coldsap_run** out);
COLDSAP_API void coldsap_run_free(coldsap_run* run);
COLDSAP_API size_t coldsap_run_artifact_count(const coldsap_run* run);
COLDSAP_API const char* coldsap_run_artifact(const coldsap_run* run, size_t index);
COLDSAP_API size_t coldsap_run_message_count(const coldsap_run* run);
COLDSAP_API const char* coldsap_run_message(const coldsap_run* run, size_t index);
COLDSAP_API const char* coldsap_run_config_hash(const coldsap_run* run);

/* Contact strength g for a two-particle ground energy e_g in a harmonic trap. */
COLDSAP_API coldsap_status coldsap_busch_coupling(double ground_energy, double* coupling);

#ifdef __cplusplus
}
#endif

#endif

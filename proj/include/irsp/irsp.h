#ifndef IRSP_IRSP_H
#define IRSP_IRSP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum irsp_status {
  IRSP_OK = 0,
  IRSP_ERR_DOMAIN = 1,
  IRSP_ERR_UNSUPPORTED_ORDER = 2,
  IRSP_ERR_SPEC = 3,
  IRSP_ERR_GEOMETRY = 4,
  IRSP_ERR_SWEEP = 5,
  IRSP_ERR_STATISTICS = 6,
  IRSP_ERR_CONDITIONING = 7,
  IRSP_ERR_UNSUPPORTED = 8,
  IRSP_ERR_CONFIG = 9,
  IRSP_ERR_MISSING_INPUT = 10,
  IRSP_ERR_IO = 11,
  IRSP_ERR_SINGULARITY = 12,
  IRSP_ERR_VALIDATION = 13,
  IRSP_ERR_INVALID_ARGUMENT = 14,
  IRSP_ERR_INTERNAL = 15
} irsp_status;

typedef struct irsp_config irsp_config;
typedef struct irsp_sample irsp_sample;

/* Message of the last failed call on this thread ("" if none). */
const char* irsp_last_error(void);
const char* irsp_status_name(irsp_status status);
const char* irsp_version(void);

/* Strings returned through char** are owned by the caller. */
void irsp_string_free(char* s);

irsp_status irsp_set_threads(int threads);
typedef void (*irsp_warning_fn)(const char* message, void* user);
/* NULL restores the default stderr handler. */
irsp_status irsp_set_warning_handler(irsp_warning_fn fn, void* user);

/* Configuration. */
irsp_status irsp_config_new(irsp_config** out);
irsp_status irsp_config_parse(const char* text, irsp_config** out);
irsp_status irsp_config_load(const char* path, irsp_config** out);
irsp_status irsp_config_set(irsp_config* config, const char* key, const char* value);
irsp_status irsp_config_get(const irsp_config* config, const char* key, char** value);
irsp_status irsp_config_serialize(const irsp_config* config, char** text);
irsp_status irsp_config_hash(const irsp_config* config, uint64_t* hash);
irsp_status irsp_config_validate(const irsp_config* config);
/* Documented keys: name, default and help, one per line separated by tabs. */
irsp_status irsp_config_schema(char** text);
void irsp_config_free(irsp_config* config);

/* Samples. */
irsp_status irsp_sample_create(const irsp_config* config, uint64_t seed, irsp_sample** out);
/* stem names "<stem>.json" plus its data file. */
irsp_status irsp_sample_load(const char* stem, irsp_sample** out);
irsp_status irsp_sample_save(const irsp_sample* sample, const char* stem, int csv);
irsp_status irsp_sample_shape(const irsp_sample* sample, int* dim, int* n, int* components);
/* Borrowed pointer, valid until the sample is freed. */
irsp_status irsp_sample_values(const irsp_sample* sample, int component, const double** values,
                               size_t* count);
void irsp_sample_free(irsp_sample* sample);

/* Fields at x (3 coordinates; z = 0 in 2D). out holds re/im pairs, one per
   component (2 doubles for acoustic fields, 2d for elastic). */
irsp_status irsp_acoustic_field(const irsp_sample* sample, double kappa, const double* x,
                                int truncated, double* out);
irsp_status irsp_elastic_field(const irsp_sample* sample, double omega, double lambda, double mu,
                               const double* x, int truncated, double* out);

/* Special functions; kind 0 = J, 1 = Y. out holds re/im. */
irsp_status irsp_bessel(int kind, int n, double t, double* out);
irsp_status irsp_hankel1(int n, double t, double* out);
irsp_status irsp_hankel1_trunc(int n, int terms, double t, double* out);

/* Commands. run_dir and report (JSON) may be NULL. */
irsp_status irsp_cmd_sample(const irsp_config* config, char** run_dir, char** report);
irsp_status irsp_cmd_forward(const irsp_config* config, char** run_dir, char** report);
irsp_status irsp_cmd_sweep(const irsp_config* config, int seed_given, char** run_dir,
                           char** report);
irsp_status irsp_cmd_invert(const irsp_config* config, char** run_dir, char** report);
/* IRSP_ERR_VALIDATION when any check fails; the report is still returned. */
irsp_status irsp_cmd_validate(const irsp_config* config, const char* suite, char** run_dir,
                              char** report);

#ifdef __cplusplus
}
#endif

#endif

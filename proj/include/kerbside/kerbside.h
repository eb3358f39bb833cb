/* C interface to the kerbside surface-classification pipeline.
 *
 * Every function returns a kb_status. On failure the message and a JSON
 * description ({"error": name, "message": text[, "line", "column"]}) of the
 * most recent error on the calling thread are available from kb_last_error()
 * and kb_last_error_json(). Strings returned through char** out-parameters
 * are owned by the caller and released with kb_string_free().
 */
#ifndef KERBSIDE_H
#define KERBSIDE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define KB_API __declspec(dllexport)
#else
#define KB_API __attribute__((visibility("default")))
#endif

typedef enum kb_status {
  KB_OK = 0,
  KB_ERR_IO = 1,
  KB_ERR_PARSE = 2,
  KB_ERR_UNKNOWN_CLASS = 3,
  KB_ERR_DUPLICATE_FRAME_ID = 4,
  KB_ERR_OVERLAPPING_REGIONS = 5,
  KB_ERR_INVALID_REGION = 6,
  KB_ERR_UNLABELED_FRAMES = 7,
  KB_ERR_EMPTY_SEQUENCE = 8,
  KB_ERR_NOT_PORTRAIT = 9,
  KB_ERR_INVALID_TARGET = 10,
  KB_ERR_WRONG_SIZE = 11,
  KB_ERR_EMPTY_TRAINING_SET = 12,
  KB_ERR_MIXED_DESCRIPTORS = 13,
  KB_ERR_MISSING_IMAGE = 14,
  KB_ERR_UNKNOWN_FRAME_ID = 15,
  KB_ERR_DUPLICATE_PREDICTION = 16,
  KB_ERR_UNKNOWN_REGION = 17,
  KB_ERR_EMPTY_REGION = 18,
  KB_ERR_OVERLAP_VIOLATION = 19,
  KB_ERR_LENGTH_MISMATCH = 20,
  KB_ERR_EMPTY_INPUT = 21,
  KB_ERR_EMPTY_MATRIX = 22,
  KB_ERR_NO_SEGMENTABLE_FRAMES = 23,
  KB_ERR_ONLY_TRANSITIONS = 24,
  KB_ERR_MISSING_PREDICTIONS = 25,
  KB_ERR_RANGE_GAP = 26,
  KB_ERR_RANGE_OVERLAP = 27,
  KB_ERR_UNKNOWN_BATCH = 28,
  KB_ERR_CONFIG = 29,
  KB_ERR_INVALID_ARGUMENT = 30,
  KB_ERR_INTERNAL = 99
} kb_status;

/* Surface classes in canonical order. */
typedef enum kb_surface_class {
  KB_ASPHALT = 0,
  KB_COBBLESTONE = 1,
  KB_GRASS = 2,
  KB_GROUND_UNIMPROVED = 3,
  KB_PAVEMENT = 4,
  KB_TRANSITION = 5
} kb_surface_class;

typedef struct kb_frameset kb_frameset;
typedef struct kb_service kb_service;

KB_API const char* kb_version(void);
KB_API const char* kb_status_name(kb_status status);
KB_API const char* kb_last_error(void);
KB_API const char* kb_last_error_json(void);
KB_API void kb_string_free(char* s);

/* Accepts canonical names and the fixed alias set, case-insensitively. */
KB_API kb_status kb_parse_surface_class(const char* name, int* out_class);
/* NULL for an out-of-range value. */
KB_API const char* kb_surface_class_name(int surface_class);

/* p^k: probability that all k segments of a route are classified correctly. */
KB_API kb_status kb_route_accuracy(double p_segment, int segments_per_route, double* out);

/* Loads a manifest; regions_path may be NULL. */
KB_API kb_status kb_frameset_load(const char* manifest_path, const char* regions_path, kb_frameset** out);
KB_API size_t kb_frameset_size(const kb_frameset* frames);
/* Frames outside every region (0 when loaded without regions). */
KB_API size_t kb_frameset_unassigned(const kb_frameset* frames);
/* Table-1 style distribution CSV. */
KB_API kb_status kb_frameset_distribution_csv(const kb_frameset* frames, char** out_csv);
KB_API void kb_frameset_free(kb_frameset* frames);

/* Runs one batch command described by a run.json document and returns its
 * JSON summary. */
KB_API kb_status kb_run(const char* config_json, char** out_summary);

/* Annotation service from a run.json document with "command": "serve". */
KB_API kb_status kb_service_open(const char* config_json, kb_service** out);
/* port 0 binds a free port; the bound port is stored in *out_port. */
KB_API kb_status kb_service_bind(kb_service* service, const char* host, int port, int* out_port);
/* Blocks until kb_service_stop is called from another thread. */
KB_API kb_status kb_service_listen(kb_service* service);
KB_API void kb_service_stop(kb_service* service);
KB_API void kb_service_free(kb_service* service);

#ifdef __cplusplus
}
#endif

#endif /* KERBSIDE_H */

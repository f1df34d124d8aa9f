/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

/* trackvo: asynchronous monocular visual odometry on feature-track streams.
 *
 * C interface over the C++ core. All handles are opaque; every fallible call
 * returns a tvo_status, with a human-readable detail available from
 * tvo_last_error() on the failing thread. Handles are not thread-safe; a
 * filter consumes one time-ordered message stream.
 */

#ifndef TRACKVO_H
#define TRACKVO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tvo_status {
  TVO_OK = 0,
  TVO_ERROR_INVALID_ARGUMENT = 1,
  TVO_ERROR_CONFIG = 2,
  TVO_ERROR_IO = 3,
  TVO_ERROR_PARSE = 4,
  TVO_ERROR_DATA = 5,
  TVO_ERROR_DIVERGED = 6,
  TVO_ERROR_INTERNAL = 7
} tvo_status;

/* Static name of a status code, e.g. "TVO_ERROR_CONFIG". */
const char* tvo_status_name(tvo_status status);

/* Detail message of the last failing call on this thread; empty if none. */
const char* tvo_last_error(void);

void tvo_version(int* major, int* minor, int* patch);

/* ---- configuration ---------------------------------------------------- */

typedef struct tvo_config tvo_config;

/* Defaults mirror the reference operating point (sigma_a = sigma_w = 2.0,
 * sigma_px = 1.0 px, 240x180 pinhole). Free with tvo_config_free. */
tvo_config* tvo_config_default(void);

/* Loads and schema-validates a JSON config; unknown keys are rejected. */
tvo_status tvo_config_load(const char* path, tvo_config** out);

tvo_status tvo_config_save(const tvo_config* config, const char* path);

/* Seed override shared by the simulator and any randomized defaults. */
tvo_status tvo_config_set_seed(tvo_config* config, uint64_t seed);

void tvo_config_free(tvo_config* config);

/* ---- file pipeline ----------------------------------------------------- */

/* Writes tracks.txt, gt_trajectory.txt and landmarks.txt into out_dir.
 * Deterministic for a fixed config. */
tvo_status tvo_simulate(const tvo_config* config, const char* out_dir);

/* Bootstraps and filters the whole track stream; writes est_trajectory.txt,
 * events.txt, timeline.txt and pose_cov.txt into out_dir. */
tvo_status tvo_run(const tvo_config* config, const char* tracks_path,
                   const char* out_dir);

/* Sim(3)-aligned absolute pose error of est against ref; writes metrics.json
 * and residuals.txt into out_dir. cov_path may be NULL; when it names the
 * run's pose_cov.txt the report also carries NEES. */
tvo_status tvo_evaluate(const char* est_path, const char* ref_path,
                        const char* cov_path, double max_dt,
                        const char* out_dir);

/* ---- incremental filter ------------------------------------------------ */

typedef struct tvo_filter tvo_filter;

/* A filter consuming one time-ordered stream of track updates/deletions. */
tvo_filter* tvo_filter_new(const tvo_config* config);
void tvo_filter_free(tvo_filter* filter);

/* One asynchronous feature observation (undistorted pixels). */
tvo_status tvo_filter_push_update(tvo_filter* filter, double t, int64_t id,
                                  double u, double v);

tvo_status tvo_filter_push_deletion(tvo_filter* filter, double t,
                                    const int64_t* ids, size_t count);

/* 1 once the homography bootstrap has seeded the filter. */
int tvo_filter_is_initialized(const tvo_filter* filter);

/* Latest pose estimate: position, orientation quaternion (x, y, z, w,
 * camera-to-global), velocity. Any output pointer may be NULL. Fails with
 * TVO_ERROR_DATA before the first accepted update. */
tvo_status tvo_filter_get_pose(const tvo_filter* filter, double* t,
                               double position[3], double quaternion_xyzw[4],
                               double velocity[3]);

/* Mapped landmark and pose-clone counts. */
tvo_status tvo_filter_get_dims(const tvo_filter* filter, int* landmarks,
                               int* clones);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TRACKVO_H */

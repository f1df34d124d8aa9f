/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "trackvo.h"

#include <string>

#include "pipeline.hpp"

namespace {

thread_local std::string g_last_error;

tvo_status fail(tvo_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps core exceptions onto status codes at the API boundary.
template <typename Fn>
tvo_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TVO_OK;
  } catch (const tvo::ConfigError& e) {
    return fail(TVO_ERROR_CONFIG, e.what());
  } catch (const tvo::io::ParseError& e) {
    return fail(TVO_ERROR_PARSE, e.what());
  } catch (const tvo::io::IoError& e) {
    return fail(TVO_ERROR_IO, e.what());
  } catch (const tvo::DataError& e) {
    return fail(TVO_ERROR_DATA, e.what());
  } catch (const tvo::FilterDivergence& e) {
    return fail(TVO_ERROR_DIVERGED, e.what());
  } catch (const std::exception& e) {
    return fail(TVO_ERROR_INTERNAL, e.what());
  }
}

}  // namespace

struct tvo_config {
  tvo::RunConfig cfg;
};

struct tvo_filter {
  explicit tvo_filter(const tvo::RunConfig& cfg) : pipeline(cfg) {}
  tvo::Pipeline pipeline;
};

extern "C" {

const char* tvo_status_name(tvo_status status) {
  switch (status) {
    case TVO_OK: return "TVO_OK";
    case TVO_ERROR_INVALID_ARGUMENT: return "TVO_ERROR_INVALID_ARGUMENT";
    case TVO_ERROR_CONFIG: return "TVO_ERROR_CONFIG";
    case TVO_ERROR_IO: return "TVO_ERROR_IO";
    case TVO_ERROR_PARSE: return "TVO_ERROR_PARSE";
    case TVO_ERROR_DATA: return "TVO_ERROR_DATA";
    case TVO_ERROR_DIVERGED: return "TVO_ERROR_DIVERGED";
    case TVO_ERROR_INTERNAL: return "TVO_ERROR_INTERNAL";
  }
  return "TVO_ERROR_UNKNOWN";
}

const char* tvo_last_error(void) { return g_last_error.c_str(); }

void tvo_version(int* major, int* minor, int* patch) {
  if (major) *major = 0;
  if (minor) *minor = 1;
  if (patch) *patch = 0;
}

tvo_config* tvo_config_default(void) {
  return new tvo_config{tvo::default_config()};
}

tvo_status tvo_config_load(const char* path, tvo_config** out) {
  if (!path || !out) return fail(TVO_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new tvo_config{tvo::load_config(path)}; });
}

tvo_status tvo_config_save(const tvo_config* config, const char* path) {
  if (!config || !path)
    return fail(TVO_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { tvo::save_config(config->cfg, path); });
}

tvo_status tvo_config_set_seed(tvo_config* config, uint64_t seed) {
  if (!config) return fail(TVO_ERROR_INVALID_ARGUMENT, "null config");
  config->cfg.seed = seed;
  config->cfg.sync_derived();
  return TVO_OK;
}

void tvo_config_free(tvo_config* config) { delete config; }

tvo_status tvo_simulate(const tvo_config* config, const char* out_dir) {
  if (!config || !out_dir)
    return fail(TVO_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { tvo::simulate_to_files(config->cfg, out_dir); });
}

tvo_status tvo_run(const tvo_config* config, const char* tracks_path,
                   const char* out_dir) {
  if (!config || !tracks_path || !out_dir)
    return fail(TVO_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded(
      [&] { tvo::run_to_files(config->cfg, tracks_path, out_dir); });
}

tvo_status tvo_evaluate(const char* est_path, const char* ref_path,
                        const char* cov_path, double max_dt,
                        const char* out_dir) {
  if (!est_path || !ref_path || !out_dir)
    return fail(TVO_ERROR_INVALID_ARGUMENT, "null argument");
  if (!(max_dt > 0.0))
    return fail(TVO_ERROR_INVALID_ARGUMENT, "max_dt must be > 0");
  return guarded([&] {
    tvo::evaluate_to_files(est_path, ref_path, cov_path ? cov_path : "",
                           max_dt, out_dir);
  });
}

tvo_filter* tvo_filter_new(const tvo_config* config) {
  if (!config) return nullptr;
  try {
    tvo::validate(config->cfg);
    return new tvo_filter(config->cfg);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

void tvo_filter_free(tvo_filter* filter) { delete filter; }

tvo_status tvo_filter_push_update(tvo_filter* filter, double t, int64_t id,
                                  double u, double v) {
  if (!filter) return fail(TVO_ERROR_INVALID_ARGUMENT, "null filter");
  return guarded([&] {
    tvo::TrackUpdate msg;
    msg.t = t;
    msg.id = id;
    msg.u = u;
    msg.v = v;
    filter->pipeline.push(msg);
  });
}

tvo_status tvo_filter_push_deletion(tvo_filter* filter, double t,
                                    const int64_t* ids, size_t count) {
  if (!filter || (!ids && count > 0))
    return fail(TVO_ERROR_INVALID_ARGUMENT, "null argument");
  if (count == 0) return fail(TVO_ERROR_INVALID_ARGUMENT, "empty id list");
  return guarded([&] {
    tvo::TrackDeletion msg;
    msg.t = t;
    msg.ids.assign(ids, ids + count);
    filter->pipeline.push(msg);
  });
}

int tvo_filter_is_initialized(const tvo_filter* filter) {
  return filter && filter->pipeline.initialized() ? 1 : 0;
}

tvo_status tvo_filter_get_pose(const tvo_filter* filter, double* t,
                               double position[3], double quaternion_xyzw[4],
                               double velocity[3]) {
  if (!filter) return fail(TVO_ERROR_INVALID_ARGUMENT, "null filter");
  const auto& estimates = filter->pipeline.estimates();
  if (estimates.empty())
    return fail(TVO_ERROR_DATA, "no pose estimate available yet");
  const auto& rec = estimates.back();
  if (t) *t = rec.t;
  if (position) {
    position[0] = rec.pose.p.x();
    position[1] = rec.pose.p.y();
    position[2] = rec.pose.p.z();
  }
  if (quaternion_xyzw) {
    quaternion_xyzw[0] = rec.pose.q.x();
    quaternion_xyzw[1] = rec.pose.q.y();
    quaternion_xyzw[2] = rec.pose.q.z();
    quaternion_xyzw[3] = rec.pose.q.w();
  }
  if (velocity) {
    velocity[0] = rec.v.x();
    velocity[1] = rec.v.y();
    velocity[2] = rec.v.z();
  }
  return TVO_OK;
}

tvo_status tvo_filter_get_dims(const tvo_filter* filter, int* landmarks,
                               int* clones) {
  if (!filter) return fail(TVO_ERROR_INVALID_ARGUMENT, "null filter");
  if (landmarks) *landmarks = filter->pipeline.filter().states().landmark_count();
  if (clones) *clones = filter->pipeline.filter().states().clone_count();
  return TVO_OK;
}

}  // extern "C"

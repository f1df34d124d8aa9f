/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "config.hpp"

#include <fstream>

#include <json.hpp>

namespace tvo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

void reject_unknown(const json& j, const std::string& scope,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known)
      if (key == k) {
        found = true;
        break;
      }
    if (!found) fail(scope.empty() ? key : scope + "." + key, "unknown key");
  }
}

double get_number(const json& j, const std::string& scope, const char* key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(scope + "." + key, "must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& scope, const char* key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) fail(scope + "." + key, "must be an integer");
  return j[key].get<int>();
}

bool get_bool(const json& j, const std::string& scope, const char* key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) fail(scope + "." + key, "must be a boolean");
  return j[key].get<bool>();
}

void require_positive(double value, const std::string& field) {
  if (!(value > 0.0)) fail(field, "must be > 0");
}

void require_non_negative(double value, const std::string& field) {
  if (!(value >= 0.0)) fail(field, "must be >= 0");
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.sync_derived();
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (!cfg.camera.valid()) fail("camera", "invalid intrinsics");
  // Zero process/measurement noise is legal (ideal-case runs); the filter
  // floors sigma_px internally to keep R invertible.
  require_non_negative(cfg.noise.sigma_a, "noise.sigma_a");
  require_non_negative(cfg.noise.sigma_w, "noise.sigma_w");
  require_non_negative(cfg.noise.sigma_px, "noise.sigma_px");
  require_positive(cfg.noise.gate_threshold, "noise.gate_threshold");
  require_positive(cfg.filter.parallax_threshold_deg,
                   "filter.parallax_threshold_deg");
  if (cfg.filter.max_landmarks < 1) fail("filter.max_landmarks", "must be >= 1");
  if (cfg.filter.min_landmarks < 0) fail("filter.min_landmarks", "must be >= 0");
  require_positive(cfg.filter.failure_window, "filter.failure_window");
  if (cfg.bootstrap.reference_size < 4)
    fail("bootstrap.reference_size", "must be >= 4");
  require_positive(cfg.bootstrap.min_displacement_px,
                   "bootstrap.min_displacement_px");
  if (cfg.bootstrap.min_correspondences < 4)
    fail("bootstrap.min_correspondences", "must be >= 4");
  require_positive(cfg.bootstrap.smoother_accel_px_s2,
                   "bootstrap.smoother_accel_px_s2");
  require_positive(cfg.bootstrap.init_pose_sigma, "bootstrap.init_pose_sigma");
  require_positive(cfg.bootstrap.init_velocity_sigma,
                   "bootstrap.init_velocity_sigma");
  if (cfg.simulator.landmark_count < 1)
    fail("simulator.landmark_count", "must be >= 1");
  require_positive(cfg.simulator.plane_depth, "simulator.plane_depth");
  require_non_negative(cfg.simulator.extent.x(), "simulator.extent");
  require_non_negative(cfg.simulator.extent.y(), "simulator.extent");
  require_non_negative(cfg.simulator.extent.z(), "simulator.extent");
  require_positive(cfg.simulator.lifetime_mean, "simulator.lifetime_mean");
  require_non_negative(cfg.simulator.lifetime_std, "simulator.lifetime_std");
  if (cfg.simulator.waypoints.size() < 2)
    fail("simulator.waypoints", "need at least 2 waypoints");
  require_positive(cfg.simulator.duration, "simulator.duration");
  require_positive(cfg.simulator.tick_rate, "simulator.tick_rate");
  require_non_negative(cfg.simulator.pixel_noise_sigma,
                       "simulator.pixel_noise_sigma");
  require_non_negative(cfg.simulator.min_pixel_motion,
                       "simulator.min_pixel_motion");
  require_positive(cfg.simulator.pan_period, "simulator.pan_period");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }

  RunConfig cfg = default_config();
  reject_unknown(j, "",
                 {"seed", "camera", "noise", "filter", "bootstrap",
                  "simulator"});

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "must be unsigned");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("camera")) {
    const auto& c = j["camera"];
    reject_unknown(c, "camera", {"fx", "fy", "cx", "cy", "width", "height"});
    cfg.camera.fx = get_number(c, "camera", "fx", cfg.camera.fx);
    cfg.camera.fy = get_number(c, "camera", "fy", cfg.camera.fy);
    cfg.camera.cx = get_number(c, "camera", "cx", cfg.camera.cx);
    cfg.camera.cy = get_number(c, "camera", "cy", cfg.camera.cy);
    cfg.camera.width = get_int(c, "camera", "width", cfg.camera.width);
    cfg.camera.height = get_int(c, "camera", "height", cfg.camera.height);
  }

  if (j.contains("noise")) {
    const auto& n = j["noise"];
    reject_unknown(n, "noise",
                   {"sigma_a", "sigma_w", "sigma_px", "gate_threshold",
                    "gating_enabled"});
    cfg.noise.sigma_a = get_number(n, "noise", "sigma_a", cfg.noise.sigma_a);
    cfg.noise.sigma_w = get_number(n, "noise", "sigma_w", cfg.noise.sigma_w);
    cfg.noise.sigma_px = get_number(n, "noise", "sigma_px", cfg.noise.sigma_px);
    cfg.noise.gate_threshold =
        get_number(n, "noise", "gate_threshold", cfg.noise.gate_threshold);
    cfg.noise.gating_enabled =
        get_bool(n, "noise", "gating_enabled", cfg.noise.gating_enabled);
  }

  if (j.contains("filter")) {
    const auto& f = j["filter"];
    reject_unknown(f, "filter",
                   {"parallax_threshold_deg", "max_landmarks", "min_landmarks",
                    "failure_window"});
    cfg.filter.parallax_threshold_deg =
        get_number(f, "filter", "parallax_threshold_deg",
                   cfg.filter.parallax_threshold_deg);
    cfg.filter.max_landmarks =
        get_int(f, "filter", "max_landmarks", cfg.filter.max_landmarks);
    cfg.filter.min_landmarks =
        get_int(f, "filter", "min_landmarks", cfg.filter.min_landmarks);
    cfg.filter.failure_window =
        get_number(f, "filter", "failure_window", cfg.filter.failure_window);
  }

  if (j.contains("bootstrap")) {
    const auto& b = j["bootstrap"];
    reject_unknown(b, "bootstrap",
                   {"reference_size", "min_displacement_px",
                    "min_correspondences", "smoother_accel_px_s2",
                    "init_pose_sigma", "init_velocity_sigma"});
    cfg.bootstrap.reference_size = get_int(b, "bootstrap", "reference_size",
                                           cfg.bootstrap.reference_size);
    cfg.bootstrap.min_displacement_px =
        get_number(b, "bootstrap", "min_displacement_px",
                   cfg.bootstrap.min_displacement_px);
    cfg.bootstrap.min_correspondences =
        get_int(b, "bootstrap", "min_correspondences",
                cfg.bootstrap.min_correspondences);
    cfg.bootstrap.smoother_accel_px_s2 =
        get_number(b, "bootstrap", "smoother_accel_px_s2",
                   cfg.bootstrap.smoother_accel_px_s2);
    cfg.bootstrap.init_pose_sigma = get_number(
        b, "bootstrap", "init_pose_sigma", cfg.bootstrap.init_pose_sigma);
    cfg.bootstrap.init_velocity_sigma =
        get_number(b, "bootstrap", "init_velocity_sigma",
                   cfg.bootstrap.init_velocity_sigma);
  }

  if (j.contains("simulator")) {
    const auto& s = j["simulator"];
    reject_unknown(s, "simulator",
                   {"landmark_count", "scene", "plane_depth", "extent",
                    "lifetime_mean", "lifetime_std", "waypoints", "duration",
                    "pan_amplitude_deg", "pan_period", "tick_rate",
                    "pixel_noise_sigma", "min_pixel_motion"});
    cfg.simulator.landmark_count = get_int(s, "simulator", "landmark_count",
                                           cfg.simulator.landmark_count);
    if (s.contains("scene")) {
      const std::string kind = s["scene"].get<std::string>();
      if (kind == "plane")
        cfg.simulator.scene = sim::SceneKind::kPlane;
      else if (kind == "box")
        cfg.simulator.scene = sim::SceneKind::kBox;
      else
        fail("simulator.scene", "must be 'plane' or 'box'");
    }
    cfg.simulator.plane_depth =
        get_number(s, "simulator", "plane_depth", cfg.simulator.plane_depth);
    if (s.contains("extent")) {
      const auto& e = s["extent"];
      if (!e.is_array() || e.size() != 3)
        fail("simulator.extent", "must be [x, y, z]");
      cfg.simulator.extent =
          geom::Vec3(e[0].get<double>(), e[1].get<double>(),
                     e[2].get<double>());
    }
    cfg.simulator.lifetime_mean = get_number(s, "simulator", "lifetime_mean",
                                             cfg.simulator.lifetime_mean);
    cfg.simulator.lifetime_std = get_number(s, "simulator", "lifetime_std",
                                            cfg.simulator.lifetime_std);
    if (s.contains("waypoints")) {
      const auto& w = s["waypoints"];
      if (!w.is_array() || w.size() < 2)
        fail("simulator.waypoints", "must be an array of >= 2 points");
      cfg.simulator.waypoints.clear();
      for (const auto& p : w) {
        if (!p.is_array() || p.size() != 3)
          fail("simulator.waypoints", "each waypoint must be [x, y, z]");
        cfg.simulator.waypoints.emplace_back(
            p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      }
    }
    cfg.simulator.duration =
        get_number(s, "simulator", "duration", cfg.simulator.duration);
    cfg.simulator.pan_amplitude_deg =
        get_number(s, "simulator", "pan_amplitude_deg",
                   cfg.simulator.pan_amplitude_deg);
    cfg.simulator.pan_period =
        get_number(s, "simulator", "pan_period", cfg.simulator.pan_period);
    cfg.simulator.tick_rate =
        get_number(s, "simulator", "tick_rate", cfg.simulator.tick_rate);
    cfg.simulator.pixel_noise_sigma =
        get_number(s, "simulator", "pixel_noise_sigma",
                   cfg.simulator.pixel_noise_sigma);
    cfg.simulator.min_pixel_motion =
        get_number(s, "simulator", "min_pixel_motion",
                   cfg.simulator.min_pixel_motion);
  }

  cfg.sync_derived();
  validate(cfg);
  return cfg;
}

void save_config(const RunConfig& cfg, const std::string& path) {
  json j;
  j["seed"] = cfg.seed;
  j["camera"] = {{"fx", cfg.camera.fx},     {"fy", cfg.camera.fy},
                 {"cx", cfg.camera.cx},     {"cy", cfg.camera.cy},
                 {"width", cfg.camera.width}, {"height", cfg.camera.height}};
  j["noise"] = {{"sigma_a", cfg.noise.sigma_a},
                {"sigma_w", cfg.noise.sigma_w},
                {"sigma_px", cfg.noise.sigma_px},
                {"gate_threshold", cfg.noise.gate_threshold},
                {"gating_enabled", cfg.noise.gating_enabled}};
  j["filter"] = {{"parallax_threshold_deg", cfg.filter.parallax_threshold_deg},
                 {"max_landmarks", cfg.filter.max_landmarks},
                 {"min_landmarks", cfg.filter.min_landmarks},
                 {"failure_window", cfg.filter.failure_window}};
  j["bootstrap"] = {
      {"reference_size", cfg.bootstrap.reference_size},
      {"min_displacement_px", cfg.bootstrap.min_displacement_px},
      {"min_correspondences", cfg.bootstrap.min_correspondences},
      {"smoother_accel_px_s2", cfg.bootstrap.smoother_accel_px_s2},
      {"init_pose_sigma", cfg.bootstrap.init_pose_sigma},
      {"init_velocity_sigma", cfg.bootstrap.init_velocity_sigma}};
  json waypoints = json::array();
  for (const auto& w : cfg.simulator.waypoints)
    waypoints.push_back({w.x(), w.y(), w.z()});
  j["simulator"] = {
      {"landmark_count", cfg.simulator.landmark_count},
      {"scene", cfg.simulator.scene == sim::SceneKind::kPlane ? "plane"
                                                              : "box"},
      {"plane_depth", cfg.simulator.plane_depth},
      {"extent",
       {cfg.simulator.extent.x(), cfg.simulator.extent.y(),
        cfg.simulator.extent.z()}},
      {"lifetime_mean", cfg.simulator.lifetime_mean},
      {"lifetime_std", cfg.simulator.lifetime_std},
      {"waypoints", waypoints},
      {"duration", cfg.simulator.duration},
      {"pan_amplitude_deg", cfg.simulator.pan_amplitude_deg},
      {"pan_period", cfg.simulator.pan_period},
      {"tick_rate", cfg.simulator.tick_rate},
      {"pixel_noise_sigma", cfg.simulator.pixel_noise_sigma},
      {"min_pixel_motion", cfg.simulator.min_pixel_motion}};

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tvo

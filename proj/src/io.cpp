/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tvo::io {

namespace {

std::FILE* open_for_write(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

bool skippable(const std::string& line) {
  return line.empty() || line[0] == '#';
}

}  // namespace

void write_tracks(const std::string& path,
                  const std::vector<sim::TrackMessage>& messages) {
  std::FILE* f = open_for_write(path);
  for (const auto& msg : messages) {
    if (const auto* u = std::get_if<TrackUpdate>(&msg)) {
      std::fprintf(f, "U %.6f %" PRId64 " %.4f %.4f\n", u->t, u->id, u->u,
                   u->v);
    } else {
      const auto& d = std::get<TrackDeletion>(msg);
      std::fprintf(f, "D %.6f ", d.t);
      for (size_t i = 0; i < d.ids.size(); ++i)
        std::fprintf(f, "%s%" PRId64, i ? "," : "", d.ids[i]);
      std::fprintf(f, "\n");
    }
  }
  std::fclose(f);
}

std::vector<sim::TrackMessage> read_tracks(const std::string& path) {
  auto in = open_for_read(path);
  std::vector<sim::TrackMessage> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream ss(line);
    char kind = 0;
    ss >> kind;
    if (kind == 'U') {
      TrackUpdate u;
      if (!(ss >> u.t >> u.id >> u.u >> u.v))
        parse_fail(path, line_no, "bad track update record");
      if (!std::isfinite(u.t) || !std::isfinite(u.u) || !std::isfinite(u.v))
        parse_fail(path, line_no, "non-finite track update");
      out.emplace_back(u);
    } else if (kind == 'D') {
      TrackDeletion d;
      std::string ids;
      if (!(ss >> d.t >> ids))
        parse_fail(path, line_no, "bad track deletion record");
      std::istringstream idss(ids);
      std::string tok;
      while (std::getline(idss, tok, ',')) {
        try {
          d.ids.push_back(std::stoll(tok));
        } catch (const std::exception&) {
          parse_fail(path, line_no, "bad feature id '" + tok + "'");
        }
      }
      if (d.ids.empty()) parse_fail(path, line_no, "empty deletion list");
      out.emplace_back(d);
    } else {
      parse_fail(path, line_no, "unknown record kind");
    }
  }
  return out;
}

void write_trajectory(const std::string& path, const Trajectory& trajectory) {
  std::FILE* f = open_for_write(path);
  for (const auto& s : trajectory.samples) {
    const auto& q = s.pose.q;
    std::fprintf(f, "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", s.t,
                 s.pose.p.x(), s.pose.p.y(), s.pose.p.z(), q.x(), q.y(), q.z(),
                 q.w());
  }
  std::fclose(f);
}

Trajectory read_trajectory(const std::string& path) {
  auto in = open_for_read(path);
  Trajectory out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream ss(line);
    Trajectory::Sample s;
    double qx, qy, qz, qw;
    if (!(ss >> s.t >> s.pose.p.x() >> s.pose.p.y() >> s.pose.p.z() >> qx >>
          qy >> qz >> qw))
      parse_fail(path, line_no, "bad trajectory record");
    s.pose.q = geom::Quat(qw, qx, qy, qz).normalized();
    if (!out.samples.empty() && s.t <= out.samples.back().t)
      parse_fail(path, line_no, "timestamps must strictly increase");
    out.samples.push_back(s);
  }
  return out;
}

void write_landmarks(const std::string& path,
                     const std::vector<sim::LandmarkTruth>& landmarks) {
  std::FILE* f = open_for_write(path);
  for (const auto& lm : landmarks)
    std::fprintf(f, "%" PRId64 " %.9f %.9f %.9f %.6f %.6f\n", lm.id,
                 lm.position.x(), lm.position.y(), lm.position.z(), lm.birth,
                 lm.death);
  std::fclose(f);
}

std::vector<sim::LandmarkTruth> read_landmarks(const std::string& path) {
  auto in = open_for_read(path);
  std::vector<sim::LandmarkTruth> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream ss(line);
    sim::LandmarkTruth lm;
    if (!(ss >> lm.id >> lm.position.x() >> lm.position.y() >>
          lm.position.z() >> lm.birth >> lm.death))
      parse_fail(path, line_no, "bad landmark record");
    out.push_back(lm);
  }
  return out;
}

void write_pose_covariances(const std::string& path,
                            const std::vector<double>& times,
                            const std::vector<eval::Mat6>& covariances) {
  if (times.size() != covariances.size())
    throw IoError("times/covariances size mismatch");
  std::FILE* f = open_for_write(path);
  for (size_t i = 0; i < times.size(); ++i) {
    std::fprintf(f, "%.6f", times[i]);
    for (int r = 0; r < 6; ++r)
      for (int c = r; c < 6; ++c)
        std::fprintf(f, " %.9e", covariances[i](r, c));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void read_pose_covariances(const std::string& path, std::vector<double>* times,
                           std::vector<eval::Mat6>* covariances) {
  auto in = open_for_read(path);
  times->clear();
  covariances->clear();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream ss(line);
    double t;
    if (!(ss >> t)) parse_fail(path, line_no, "bad covariance record");
    eval::Mat6 cov;
    for (int r = 0; r < 6; ++r)
      for (int c = r; c < 6; ++c) {
        double value;
        if (!(ss >> value)) parse_fail(path, line_no, "bad covariance record");
        cov(r, c) = value;
        cov(c, r) = value;
      }
    times->push_back(t);
    covariances->push_back(cov);
  }
}

void write_residuals(const std::string& path, const std::vector<double>& times,
                     const std::vector<double>& residuals) {
  if (times.size() != residuals.size())
    throw IoError("times/residuals size mismatch");
  std::FILE* f = open_for_write(path);
  for (size_t i = 0; i < times.size(); ++i)
    std::fprintf(f, "%.6f %.9f\n", times[i], residuals[i]);
  std::fclose(f);
}

void write_metrics(const std::string& path, const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["mean_ape_m"] = report.ape.mean;
  j["rmse_ape_m"] = report.ape.rmse;
  j["median_ape_m"] = report.ape.median;
  j["max_ape_m"] = report.ape.max;
  j["matched_samples"] = report.ape.matched;
  j["est_samples"] = report.est_samples;
  j["ref_samples"] = report.ref_samples;
  j["init_time_s"] = report.init_time;
  const auto& a = report.ape.alignment;
  j["alignment"] = {
      {"scale", a.scale},
      {"q_xyzw", {a.q.x(), a.q.y(), a.q.z(), a.q.w()}},
      {"t", {a.t.x(), a.t.y(), a.t.z()}},
  };
  if (report.has_nees) {
    // Gauge-aligned before differencing, so the statistic is optimistic.
    j["nees"] = {
        {"mean", report.nees.mean},
        {"lower95", report.nees.lower95},
        {"upper95", report.nees.upper95},
        {"matched", report.nees.matched},
        {"gauge_aligned", true},
    };
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tvo::io

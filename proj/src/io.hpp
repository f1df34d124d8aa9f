/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "simulator.hpp"
#include "trajectory.hpp"

namespace tvo::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Track stream: one record per line, microsecond timestamps.
//   U <t> <id> <u> <v>
//   D <t> <id>[,<id>...]
void write_tracks(const std::string& path,
                  const std::vector<sim::TrackMessage>& messages);
std::vector<sim::TrackMessage> read_tracks(const std::string& path);

// Trajectory: <t> <px> <py> <pz> <qx> <qy> <qz> <qw> per line.
void write_trajectory(const std::string& path, const Trajectory& trajectory);
Trajectory read_trajectory(const std::string& path);

// Landmark truth table: <id> <x> <y> <z> <birth> <death> per line.
void write_landmarks(const std::string& path,
                     const std::vector<sim::LandmarkTruth>& landmarks);
std::vector<sim::LandmarkTruth> read_landmarks(const std::string& path);

// Per-sample 6x6 pose covariance, upper triangle row-major:
// <t> <p00> <p01> ... <p55> (21 values).
void write_pose_covariances(const std::string& path,
                            const std::vector<double>& times,
                            const std::vector<eval::Mat6>& covariances);
void read_pose_covariances(const std::string& path, std::vector<double>* times,
                           std::vector<eval::Mat6>* covariances);

// Residual table for plotting: <t> <residual_m> per line.
void write_residuals(const std::string& path,
                     const std::vector<double>& times,
                     const std::vector<double>& residuals);

struct MetricsReport {
  eval::ApeReport ape;
  double init_time = 0.0;
  int est_samples = 0;
  int ref_samples = 0;
  bool has_nees = false;
  eval::NeesResult nees;
};
void write_metrics(const std::string& path, const MetricsReport& report);

}  // namespace tvo::io

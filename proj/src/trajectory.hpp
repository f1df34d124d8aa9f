/*
 * Copyright (c) 2026 trackvo contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <vector>

#include "geometry.hpp"

namespace tvo {

// Timestamped pose sequence; timestamps strictly increase.
struct Trajectory {
  struct Sample {
    double t = 0.0;
    geom::Pose pose;
  };
  std::vector<Sample> samples;

  bool empty() const { return samples.empty(); }
  size_t size() const { return samples.size(); }
};

}  // namespace tvo

//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "comove/geometry.hpp"

namespace comove {

// Image points of the still targets seen by both cameras in one frame.
struct FrameDetections {
  std::int64_t frame = 0;
  std::map<int, Vec2> left;
  std::map<int, Vec2> right;

  std::map<int, Vec2>& camera(Side side) {
    return side == Side::kLeft ? left : right;
  }
  const std::map<int, Vec2>& camera(Side side) const {
    return side == Side::kLeft ? left : right;
  }
};

// Matched correspondences for a whole acquisition, ordered by frame.
struct DetectionSet {
  std::vector<FrameDetections> frames;

  // Returns the entry for `frame`, creating it in order if needed.
  FrameDetections& at_frame(std::int64_t frame);

  // Sorted union of target ids over both cameras and all frames.
  std::vector<int> target_ids() const;

  std::size_t size() const { return frames.size(); }
};

}  // namespace comove

//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/detections.hpp"

#include <algorithm>
#include <set>

namespace comove {

FrameDetections& DetectionSet::at_frame(std::int64_t frame) {
  if (frames.empty() || frames.back().frame < frame) {
    frames.push_back(FrameDetections{frame, {}, {}});
    return frames.back();
  }
  auto it = std::lower_bound(
      frames.begin(), frames.end(), frame,
      [](const FrameDetections& f, std::int64_t value) { return f.frame < value; });
  if (it != frames.end() && it->frame == frame) {
    return *it;
  }
  return *frames.insert(it, FrameDetections{frame, {}, {}});
}

std::vector<int> DetectionSet::target_ids() const {
  std::set<int> ids;
  for (const FrameDetections& f : frames) {
    for (const auto& [id, px] : f.left) ids.insert(id);
    for (const auto& [id, px] : f.right) ids.insert(id);
  }
  return {ids.begin(), ids.end()};
}

}  // namespace comove

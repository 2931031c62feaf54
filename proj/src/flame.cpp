#include "facemotion/flame.hpp"

#include <algorithm>
#include <cmath>

#include "facemotion/error.hpp"

namespace facemotion {

bool FlameFrame::is_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

const std::array<std::string, FlameFrame::kDim>& channel_names() {
  static const std::array<std::string, FlameFrame::kDim> names = [] {
    std::array<std::string, FlameFrame::kDim> out;
    for (std::size_t k = 0; k < FlameFrame::kExpressionDim; ++k) {
      out[FlameFrame::kExpressionOffset + k] = "expr_" + std::to_string(k);
    }
    const char* axes[] = {"x", "y", "z"};
    for (std::size_t k = 0; k < 3; ++k) {
      out[FlameFrame::kJawOffset + k] = std::string("jaw_") + axes[k];
      out[FlameFrame::kGlobalOffset + k] = std::string("global_") + axes[k];
    }
    out[FlameFrame::kEyelidOffset + 0] = "eyelid_left";
    out[FlameFrame::kEyelidOffset + 1] = "eyelid_right";
    return out;
  }();
  return names;
}

void MotionSequence::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw ConfigError("motion sequence fps must be positive, got " + std::to_string(fps));
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (!frames[t].is_finite()) {
      throw ConfigError("motion frame " + std::to_string(t) + " has non-finite channels");
    }
  }
}

FlameFrame zero_pose(const FlameFrame& frame) {
  FlameFrame out = frame;
  auto global = out.global_pose();
  std::fill(global.begin(), global.end(), 0.0);
  return out;
}

MotionSequence zero_pose(const MotionSequence& motion) {
  MotionSequence out;
  out.fps = motion.fps;
  out.frames.reserve(motion.frames.size());
  for (const auto& f : motion.frames) out.frames.push_back(zero_pose(f));
  return out;
}

}  // namespace facemotion

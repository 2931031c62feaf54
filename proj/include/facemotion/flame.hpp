#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace facemotion {

// Per-frame facial state. Channel layout in `values`:
//   [0, 50)   expression coefficients
//   [50, 53)  jaw pose, axis-angle about the jaw joint (rad)
//   [53, 56)  global pose, axis-angle about the origin (rad)
//   [56, 58)  eyelid closure, nominally in [0, 1]
struct FlameFrame {
  static constexpr std::size_t kExpressionDim = 50;
  static constexpr std::size_t kJawDim = 3;
  static constexpr std::size_t kGlobalDim = 3;
  static constexpr std::size_t kEyelidDim = 2;
  static constexpr std::size_t kDim = kExpressionDim + kJawDim + kGlobalDim + kEyelidDim;

  static constexpr std::size_t kExpressionOffset = 0;
  static constexpr std::size_t kJawOffset = kExpressionOffset + kExpressionDim;
  static constexpr std::size_t kGlobalOffset = kJawOffset + kJawDim;
  static constexpr std::size_t kEyelidOffset = kGlobalOffset + kGlobalDim;

  std::array<double, kDim> values{};

  std::span<double, kExpressionDim> expression() { return std::span(values).subspan<kExpressionOffset, kExpressionDim>(); }
  std::span<const double, kExpressionDim> expression() const { return std::span(values).subspan<kExpressionOffset, kExpressionDim>(); }
  std::span<double, kJawDim> jaw_pose() { return std::span(values).subspan<kJawOffset, kJawDim>(); }
  std::span<const double, kJawDim> jaw_pose() const { return std::span(values).subspan<kJawOffset, kJawDim>(); }
  std::span<double, kGlobalDim> global_pose() { return std::span(values).subspan<kGlobalOffset, kGlobalDim>(); }
  std::span<const double, kGlobalDim> global_pose() const { return std::span(values).subspan<kGlobalOffset, kGlobalDim>(); }
  std::span<double, kEyelidDim> eyelid() { return std::span(values).subspan<kEyelidOffset, kEyelidDim>(); }
  std::span<const double, kEyelidDim> eyelid() const { return std::span(values).subspan<kEyelidOffset, kEyelidDim>(); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool is_finite() const;

  friend bool operator==(const FlameFrame&, const FlameFrame&) = default;
};

// Human-readable channel names, used as the CSV header.
const std::array<std::string, FlameFrame::kDim>& channel_names();

struct MotionSequence {
  std::vector<FlameFrame> frames;
  double fps = 25.0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  double duration_seconds() const { return static_cast<double>(frames.size()) / fps; }

  // Throws ConfigError if fps is not positive or any frame is non-finite.
  void validate() const;

  friend bool operator==(const MotionSequence&, const MotionSequence&) = default;
};

// Strips global head rotation; jaw, expression and eyelid are kept.
FlameFrame zero_pose(const FlameFrame& frame);
MotionSequence zero_pose(const MotionSequence& motion);

}  // namespace facemotion

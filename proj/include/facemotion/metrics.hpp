#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facemotion/blendshape.hpp"

namespace facemotion {

struct MetricsConfig {
  double fps = 25.0;
  double epsilon = 1e-8;
  double peak_min_prominence = 0.05;  // fraction of the signal range
  std::size_t peak_min_distance = 3;  // frames

  // Throws ConfigError: fps > 0, epsilon > 0, prominence in [0, 1), distance >= 1.
  void validate() const;
};

// Entries left empty are undefined for this input (zero variance, no peaks,
// too short); `undefined` names them.
struct MetricsReport {
  std::optional<double> mod_mm;
  std::optional<double> ufd;
  std::optional<double> ufd_reference;
  std::optional<double> temporal_corr;
  std::optional<double> velocity_corr;
  std::optional<double> lip_width_corr;
  std::optional<double> liveliness_ratio;
  std::optional<double> peak_align_ms;
  std::vector<std::string> undefined;
  MetricsConfig config;
};

// Zero-posed lip aperture and lip-corner distance per frame, in meters.
std::vector<double> mouth_opening_series(const BlendshapeModel& model, const MotionSequence& motion);
std::vector<double> mouth_width_series(const BlendshapeModel& model, const MotionSequence& motion);

// Mean absolute mouth-opening difference in millimeters.
double mod_metric(const BlendshapeModel& model, const MotionSequence& pred, const MotionSequence& gt);

// Mean frame-to-frame change of upper-face displacement from the neutral face, x 1e5.
double ufd(const BlendshapeModel& model, const MotionSequence& motion);

// Two-pass Pearson correlation, clamped to [-1, 1]. Empty on zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

std::optional<double> temporal_corr(std::span<const double> o_pred, std::span<const double> o_gt);
std::optional<double> velocity_corr(std::span<const double> o_pred, std::span<const double> o_gt);
std::optional<double> lip_width_corr(std::span<const double> w_pred, std::span<const double> w_gt);

// sigma(diff(o_pred)) / (sigma(diff(o_gt)) + epsilon), population deviations.
double liveliness(std::span<const double> o_pred, std::span<const double> o_gt, double epsilon);

// Local maxima (plateaus resolve to their middle sample) whose prominence is at
// least min_prominence * (max - min). Closer than min_distance, the higher peak
// survives; equal heights keep the earlier one. Sorted by index.
std::vector<std::size_t> find_peaks(std::span<const double> x, double min_prominence, std::size_t min_distance);

// Median over gt peaks of the distance to the nearest pred peak, in ms.
// Empty when either series has no peaks.
std::optional<double> peak_align(std::span<const double> o_pred, std::span<const double> o_gt,
                                 const MetricsConfig& cfg);

// All metrics in zero-pose space. Throws DimensionError on misaligned inputs;
// metrics that cannot be evaluated are reported as undefined.
MetricsReport full_report(const BlendshapeModel& model, const MotionSequence& pred, const MotionSequence& gt,
                          const MetricsConfig& cfg = {});

}  // namespace facemotion

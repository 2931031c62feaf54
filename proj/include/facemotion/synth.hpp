#pragma once

#include <cstddef>
#include <cstdint>

#include "facemotion/audio_features.hpp"
#include "facemotion/blendshape.hpp"
#include "facemotion/flame.hpp"

namespace facemotion {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t num_vertices = 200;
  std::size_t duration_frames = 250;
  double fps = 25.0;
  double speech_rate_hz = 4.0;
  double expression_amplitude = 1.0;
  double expression_decay = 0.55;   // channel k has std amplitude * decay^k
  double noise_std = 0.002;
  double jaw_amplitude = 0.2;       // rad, peak jaw opening
  double blink_interval_s = 3.5;    // mean spacing between blinks
  double blink_duration_s = 0.25;

  // Throws ConfigError unless N >= 10, T >= 1, fps > 0 and amplitudes >= 0.
  void validate() const;
};

// Mini face on the front half of an ellipsoid. Vertices 0..3 are the
// upper_lip, lower_lip, left_corner and right_corner landmarks. Expression
// column 0 is a smile (lip corners out and up), column 1 a brow raise; the rest
// are smooth random bumps. All 50 columns are orthogonal with equal norm.
BlendshapeModel make_model(const SynthConfig& cfg);

// Talking-style motion: rectified-sinusoid jaw opening at speech_rate_hz,
// smooth multi-sine expression drift (channel k scaled by amplitude * decay^k),
// head sway scaled by expression_amplitude, raised-cosine blinks, additive
// Gaussian noise on every channel.
MotionSequence make_motion(const SynthConfig& cfg);

// Stand-in for audio-aligned hidden states: a seeded random linear read-out of
// the motion channels plus noise, one feature row per motion frame.
AudioFeatureSequence make_features(const MotionSequence& motion, std::size_t feature_dim, std::uint64_t seed,
                                   double noise_std = 0.01);

}  // namespace facemotion

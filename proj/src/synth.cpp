#include "facemotion/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facemotion/error.hpp"
#include "facemotion/random.hpp"

namespace facemotion {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ellipsoid semi-axes of the mini face (meters).
constexpr double kAxisX = 0.075;
constexpr double kAxisY = 0.105;
constexpr double kAxisZ = 0.085;

constexpr double kJawSplitY = -0.045;   // jaw region: y below this
constexpr double kUpperFaceY = 0.01;    // upper face: y above this
constexpr double kMouthCenterY = -0.046;

// RMS per-entry displacement of one unit expression coefficient (meters).
constexpr double kExpressionRms = 0.002;

enum Stream : std::uint64_t { kModel = 1, kJaw, kExpression, kPose, kBlink, kNoise, kFeatures };

Eigen::Vector3d on_surface(double x, double y) {
  const double s = 1.0 - (x * x) / (kAxisX * kAxisX) - (y * y) / (kAxisY * kAxisY);
  return {x, y, kAxisZ * std::sqrt(std::max(0.0, s))};
}

double gaussian_weight(const Eigen::Vector3d& p, const Eigen::Vector3d& center, double sigma) {
  return std::exp(-(p - center).squaredNorm() / (2.0 * sigma * sigma));
}

// Zero-mean multi-sine with unit variance.
struct MultiSine {
  std::vector<double> freq;
  std::vector<double> phase;

  MultiSine(Rng& rng, int components, double f_lo, double f_hi) {
    for (int m = 0; m < components; ++m) {
      freq.push_back(rng.uniform(f_lo, f_hi));
      phase.push_back(rng.uniform(0.0, kTwoPi));
    }
  }

  double operator()(double t) const {
    double s = 0.0;
    for (std::size_t m = 0; m < freq.size(); ++m) s += std::sin(kTwoPi * freq[m] * t + phase[m]);
    return s * std::sqrt(2.0 / static_cast<double>(freq.size()));
  }
};

void orthogonalize_columns(Eigen::MatrixXd& basis, double column_norm) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    for (Eigen::Index p = 0; p < c; ++p) {
      const double pn = basis.col(p).squaredNorm();
      if (pn > 0.0) basis.col(c) -= (basis.col(p).dot(basis.col(c)) / pn) * basis.col(p);
    }
    const double norm = basis.col(c).norm();
    // When 3N < 50 the later columns fall into the span of earlier ones.
    if (norm < 1e-9) {
      basis.col(c).setZero();
    } else {
      basis.col(c) *= column_norm / norm;
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (num_vertices < 10) throw ConfigError("synth: num_vertices must be >= 10");
  if (duration_frames < 1) throw ConfigError("synth: duration_frames must be >= 1");
  if (!(fps > 0.0)) throw ConfigError("synth: fps must be positive");
  if (!(speech_rate_hz > 0.0)) throw ConfigError("synth: speech_rate_hz must be positive");
  if (expression_amplitude < 0.0 || noise_std < 0.0 || jaw_amplitude < 0.0) {
    throw ConfigError("synth: amplitudes and noise_std must be nonnegative");
  }
  if (!(expression_decay > 0.0 && expression_decay <= 1.0)) throw ConfigError("synth: expression_decay must lie in (0, 1]");
  if (!(blink_interval_s > 0.0) || !(blink_duration_s > 0.0)) {
    throw ConfigError("synth: blink interval and duration must be positive");
  }
}

BlendshapeModel make_model(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kModel));
  const std::size_t n = cfg.num_vertices;

  BlendshapeModel model;
  model.template_vertices.resize(static_cast<Eigen::Index>(n), 3);

  // Fixed anchors: four lip landmarks, two eye centers, chin.
  const Eigen::Vector3d anchors[] = {
      on_surface(0.0, -0.040),  on_surface(0.0, -0.052),  on_surface(-0.025, -0.044), on_surface(0.025, -0.044),
      on_surface(-0.030, 0.025), on_surface(0.030, 0.025), on_surface(0.0, -0.085),
  };
  constexpr std::size_t kAnchors = std::size(anchors);
  for (std::size_t i = 0; i < kAnchors; ++i) model.template_vertices.row(static_cast<Eigen::Index>(i)) = anchors[i];
  for (std::size_t i = kAnchors; i < n; ++i) {
    double x;
    double y;
    do {
      x = rng.uniform(-kAxisX, kAxisX);
      y = rng.uniform(-kAxisY, kAxisY);
    } while ((x * x) / (kAxisX * kAxisX) + (y * y) / (kAxisY * kAxisY) > 0.95);
    model.template_vertices.row(static_cast<Eigen::Index>(i)) = on_surface(x, y);
  }

  model.landmarks = {{landmark::kUpperLip, 0}, {landmark::kLowerLip, 1}, {landmark::kLeftCorner, 2},
                     {landmark::kRightCorner, 3}};
  model.jaw_joint = Eigen::Vector3d(0.0, -0.01, -0.04);

  std::vector<std::size_t> face;
  std::vector<std::size_t> lips;
  std::vector<std::size_t> upper;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p = model.template_vertices.row(static_cast<Eigen::Index>(i)).transpose();
    face.push_back(i);
    const double lx = p.x() / 0.032;
    const double ly = (p.y() - kMouthCenterY) / 0.014;
    if (i < 4 || lx * lx + ly * ly <= 1.0) lips.push_back(i);
    else if (p.y() > kUpperFaceY) upper.push_back(i);
    if (p.y() < kJawSplitY) model.jaw_region.push_back(i);
  }
  model.regions = {{region::kFace, face}, {region::kLips, lips}, {region::kUpperFace, upper}};

  const auto rows = static_cast<Eigen::Index>(3 * n);
  model.expression_basis = Eigen::MatrixXd::Zero(rows, FlameFrame::kExpressionDim);
  const Eigen::Vector3d corners[] = {anchors[2], anchors[3]};
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p = model.template_vertices.row(static_cast<Eigen::Index>(i)).transpose();
    const auto r = static_cast<Eigen::Index>(3 * i);
    // smile
    const double w = std::max(gaussian_weight(p, corners[0], 0.012), gaussian_weight(p, corners[1], 0.012));
    const double side = p.x() > 0.0 ? 1.0 : (p.x() < 0.0 ? -1.0 : 0.0);
    model.expression_basis(r + 0, 0) = 0.8 * side * w;
    model.expression_basis(r + 1, 0) = 0.6 * w;
    // brow raise
    if (p.y() > 0.03) {
      const double dy = (p.y() - 0.05) / 0.015;
      const double b = std::exp(-0.5 * dy * dy);
      model.expression_basis(r + 1, 1) = b;
      model.expression_basis(r + 2, 1) = 0.2 * b;
    }
  }
  for (Eigen::Index c = 2; c < static_cast<Eigen::Index>(FlameFrame::kExpressionDim); ++c) {
    for (int bump = 0; bump < 3; ++bump) {
      const auto center_idx = static_cast<Eigen::Index>(rng.below(n));
      const Eigen::Vector3d center = model.template_vertices.row(center_idx).transpose();
      Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
      dir.normalize();
      const double sigma = rng.uniform(0.015, 0.035);
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d p = model.template_vertices.row(static_cast<Eigen::Index>(i)).transpose();
        const double w = gaussian_weight(p, center, sigma);
        for (int k = 0; k < 3; ++k) model.expression_basis(static_cast<Eigen::Index>(3 * i) + k, c) += w * dir[k];
      }
    }
  }
  orthogonalize_columns(model.expression_basis, kExpressionRms * std::sqrt(static_cast<double>(rows)));

  model.eyelid_basis = Eigen::MatrixXd::Zero(rows, FlameFrame::kEyelidDim);
  for (std::size_t i : upper) {
    const Eigen::Vector3d p = model.template_vertices.row(static_cast<Eigen::Index>(i)).transpose();
    for (int eye = 0; eye < 2; ++eye) {
      const double w = gaussian_weight(p, anchors[4 + eye], 0.012);
      model.eyelid_basis(static_cast<Eigen::Index>(3 * i) + 1, eye) = -0.008 * w;
    }
  }
  model.validate();
  return model;
}

MotionSequence make_motion(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t frames = cfg.duration_frames;
  MotionSequence motion;
  motion.fps = cfg.fps;
  motion.frames.resize(frames);

  Rng jaw_rng(derive_seed(cfg.seed, kJaw));
  const double jaw_phase = jaw_rng.uniform(0.0, kTwoPi);
  const double env_freq = jaw_rng.uniform(0.15, 0.35);
  const double env_phase = jaw_rng.uniform(0.0, kTwoPi);
  const double side_phase = jaw_rng.uniform(0.0, kTwoPi);
  const double twist_phase = jaw_rng.uniform(0.0, kTwoPi);

  Rng expr_rng(derive_seed(cfg.seed, kExpression));
  std::vector<MultiSine> expression;
  for (std::size_t k = 0; k < FlameFrame::kExpressionDim; ++k) expression.emplace_back(expr_rng, 4, 0.1, 0.8);

  Rng pose_rng(derive_seed(cfg.seed, kPose));
  std::vector<MultiSine> pose;
  for (std::size_t k = 0; k < FlameFrame::kGlobalDim; ++k) pose.emplace_back(pose_rng, 3, 0.05, 0.3);

  Rng blink_rng(derive_seed(cfg.seed, kBlink));
  const double duration = static_cast<double>(frames) / cfg.fps;
  std::vector<double> blinks;
  for (double t = blink_rng.uniform(0.3, cfg.blink_interval_s); t < duration;
       t += cfg.blink_interval_s * blink_rng.uniform(0.6, 1.4)) {
    blinks.push_back(t);
  }

  const double f = cfg.speech_rate_hz;
  for (std::size_t i = 0; i < frames; ++i) {
    const double t = static_cast<double>(i) / cfg.fps;
    FlameFrame& x = motion.frames[i];

    const double envelope = 0.75 + 0.25 * std::sin(kTwoPi * env_freq * t + env_phase);
    x.jaw_pose()[0] = cfg.jaw_amplitude * envelope * std::max(0.0, std::sin(kTwoPi * f * t + jaw_phase));
    x.jaw_pose()[1] = 0.05 * cfg.jaw_amplitude * std::sin(kTwoPi * 0.5 * f * t + side_phase);
    x.jaw_pose()[2] = 0.03 * cfg.jaw_amplitude * std::sin(kTwoPi * 0.35 * f * t + twist_phase);

    if (cfg.expression_amplitude > 0.0) {
      for (std::size_t k = 0; k < FlameFrame::kExpressionDim; ++k) {
        x.expression()[k] = cfg.expression_amplitude * std::pow(cfg.expression_decay, static_cast<double>(k)) * expression[k](t);
      }
      for (std::size_t k = 0; k < FlameFrame::kGlobalDim; ++k) {
        x.global_pose()[k] = 0.04 * cfg.expression_amplitude * pose[k](t);
      }
    }

    double lid = 0.0;
    for (double start : blinks) {
      const double u = (t - start) / cfg.blink_duration_s;
      if (u > 0.0 && u < 1.0) lid = std::max(lid, 0.5 * (1.0 - std::cos(kTwoPi * u)));
    }
    x.eyelid()[0] = lid;
    x.eyelid()[1] = lid;
  }

  if (cfg.noise_std > 0.0) {
    Rng noise_rng(derive_seed(cfg.seed, kNoise));
    for (auto& x : motion.frames) {
      for (double& v : x.values) v += cfg.noise_std * noise_rng.normal();
    }
  }
  return motion;
}

AudioFeatureSequence make_features(const MotionSequence& motion, std::size_t feature_dim, std::uint64_t seed,
                                   double noise_std) {
  if (feature_dim == 0) throw ConfigError("make_features: feature_dim must be positive");
  Rng rng(derive_seed(seed, kFeatures));
  const auto d = static_cast<Eigen::Index>(feature_dim);
  const auto dim = static_cast<Eigen::Index>(FlameFrame::kDim);
  Eigen::MatrixXd readout(d, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) readout(r, c) = scale * rng.normal();
  }
  AudioFeatureSequence out;
  out.fps = motion.fps;
  out.features.resize(static_cast<Eigen::Index>(motion.size()), d);
  for (std::size_t t = 0; t < motion.size(); ++t) {
    const Eigen::Map<const Eigen::VectorXd> x(motion.frames[t].values.data(), dim);
    Eigen::VectorXd h = readout * x;
    if (noise_std > 0.0) {
      for (Eigen::Index r = 0; r < d; ++r) h[r] += noise_std * rng.normal();
    }
    out.features.row(static_cast<Eigen::Index>(t)) = h.transpose();
  }
  return out;
}

}  // namespace facemotion

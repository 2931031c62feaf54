#include "facemotion/losses.hpp"

#include "facemotion/error.hpp"

namespace facemotion {

std::string to_string(Reduction r) {
  switch (r) {
    case Reduction::kMeanOverFramesAndDims:
      return "mean_over_frames_and_dims";
  }
  return "unknown";
}

void LossWeights::validate() const {
  if (w_param < 0.0 || w_geo < 0.0 || w_dyn < 0.0 || gamma < 0.0 || lambda_vq < 0.0) {
    throw ConfigError("loss weights must be nonnegative");
  }
}

namespace {

void require_aligned(const MotionSequence& a, const MotionSequence& b) {
  if (a.size() != b.size()) {
    throw DimensionError("sequence lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.fps != b.fps) throw DimensionError("sequence frame rates differ");
}

void require_same_frames(std::span<const VertexFrame> a, std::span<const VertexFrame> b) {
  if (a.size() != b.size()) throw DimensionError("vertex sequences have different lengths");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].vertices.rows() != b[t].vertices.rows()) throw DimensionError("vertex frames have different sizes");
  }
}

}  // namespace

double param_loss(const MotionSequence& truth, const MotionSequence& predicted) {
  require_aligned(truth, predicted);
  if (truth.empty()) throw ComputationError("param_loss: empty sequences");
  double sum = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t c = 0; c < FlameFrame::kDim; ++c) {
      const double d = truth.frames[t].values[c] - predicted.frames[t].values[c];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(truth.size() * FlameFrame::kDim);
}

double region_loss(std::span<const VertexFrame> truth, std::span<const VertexFrame> predicted,
                   const std::vector<std::size_t>& indices) {
  require_same_frames(truth, predicted);
  if (truth.empty() || indices.empty()) throw ComputationError("region_loss: no frames or empty region");
  double sum = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (auto i : indices) {
      const auto r = static_cast<Eigen::Index>(i);
      sum += (truth[t].vertices.row(r) - predicted[t].vertices.row(r)).squaredNorm();
    }
  }
  return sum / static_cast<double>(truth.size() * indices.size() * 3);
}

GeoLoss geo_loss(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted) {
  require_aligned(truth, predicted);
  const auto& lips = model.region(region::kLips);
  const auto& face = model.region(region::kFace);
  const auto v_true = sequence_vertices(model, truth, true);
  const auto v_pred = sequence_vertices(model, predicted, true);
  return {region_loss(v_true, v_pred, lips), region_loss(v_true, v_pred, face)};
}

double velocity_loss(std::span<const VertexFrame> truth, std::span<const VertexFrame> predicted) {
  require_same_frames(truth, predicted);
  if (truth.size() < 2) throw ComputationError("velocity loss needs at least 2 frames");
  double sum = 0.0;
  for (std::size_t t = 1; t < truth.size(); ++t) {
    const Vertices dv_true = truth[t].vertices - truth[t - 1].vertices;
    const Vertices dv_pred = predicted[t].vertices - predicted[t - 1].vertices;
    sum += (dv_true - dv_pred).squaredNorm();
  }
  return sum / static_cast<double>((truth.size() - 1) * truth[0].size() * 3);
}

double acceleration_loss(std::span<const VertexFrame> truth, std::span<const VertexFrame> predicted) {
  require_same_frames(truth, predicted);
  if (truth.size() < 3) throw ComputationError("acceleration loss needs at least 3 frames");
  double sum = 0.0;
  for (std::size_t t = 2; t < truth.size(); ++t) {
    const Vertices a_true = truth[t].vertices - 2.0 * truth[t - 1].vertices + truth[t - 2].vertices;
    const Vertices a_pred = predicted[t].vertices - 2.0 * predicted[t - 1].vertices + predicted[t - 2].vertices;
    sum += (a_true - a_pred).squaredNorm();
  }
  return sum / static_cast<double>((truth.size() - 2) * truth[0].size() * 3);
}

DynLoss dyn_loss(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted) {
  require_aligned(truth, predicted);
  if (truth.size() < 3) throw ComputationError("dyn_loss needs at least 3 frames");
  const auto v_true = sequence_vertices(model, truth, true);
  const auto v_pred = sequence_vertices(model, predicted, true);
  return {velocity_loss(v_true, v_pred), acceleration_loss(v_true, v_pred)};
}

double reconstruction_total(double l_param, double l_lips, double l_face, double l_vel, double l_acc,
                            const LossWeights& weights) {
  return weights.w_param * l_param + weights.w_geo * (l_lips + l_face) + weights.w_dyn * (l_vel + l_acc);
}

LossReport total_losses(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted,
                        const LossWeights& weights) {
  weights.validate();
  LossReport r;
  r.weights = weights;
  r.l_param = param_loss(truth, predicted);
  const GeoLoss geo = geo_loss(model, truth, predicted);
  r.l_lips = geo.lips;
  r.l_face = geo.face;
  const DynLoss dyn = dyn_loss(model, truth, predicted);
  r.l_vel = dyn.velocity;
  r.l_acc = dyn.acceleration;
  r.l_rec = reconstruction_total(r.l_param, r.l_lips, r.l_face, r.l_vel, r.l_acc, weights);
  r.l_vqvae = r.l_rec;
  return r;
}

LossReport total_losses(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted,
                        const LatentSequence& z, const LatentSequence& q, const LossWeights& weights) {
  LossReport r = total_losses(model, truth, predicted, weights);
  const CommitmentLoss c = commitment_loss(z, q, weights.gamma);
  r.codebook_term = c.codebook_term;
  r.commit_term = c.commit_term;
  r.l_vqvae = r.l_rec + weights.lambda_vq * (r.codebook_term + r.commit_term);
  return r;
}

}  // namespace facemotion

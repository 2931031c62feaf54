#pragma once

#include <span>
#include <string>
#include <vector>

#include "facemotion/blendshape.hpp"
#include "facemotion/rvq.hpp"

namespace facemotion {

// Every squared-error term is averaged over all contributing elements
// (frames x dims, or frames x vertices x 3).
enum class Reduction { kMeanOverFramesAndDims };

std::string to_string(Reduction r);

struct LossWeights {
  double w_param = 1.0;
  double w_geo = 1e5;   // lips and face
  double w_dyn = 1e2;   // velocity and acceleration
  double gamma = 0.25;
  double lambda_vq = 1.0;
  Reduction reduction = Reduction::kMeanOverFramesAndDims;

  void validate() const;
};

struct GeoLoss {
  double lips = 0.0;
  double face = 0.0;
};

struct DynLoss {
  double velocity = 0.0;
  double acceleration = 0.0;
};

struct LossReport {
  double l_param = 0.0;
  double l_lips = 0.0;
  double l_face = 0.0;
  double l_vel = 0.0;
  double l_acc = 0.0;
  double l_rec = 0.0;
  double codebook_term = 0.0;
  double commit_term = 0.0;  // already gamma-weighted
  double l_vqvae = 0.0;
  LossWeights weights;
};

double param_loss(const MotionSequence& truth, const MotionSequence& predicted);

// Mean squared vertex difference over `indices` across all frames.
double region_loss(std::span<const VertexFrame> truth, std::span<const VertexFrame> predicted,
                   const std::vector<std::size_t>& indices);

GeoLoss geo_loss(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted);

// Forward differences of length T-1 (velocity) and T-2 (acceleration) over
// the full zero-posed vertex set. Needs T >= 2 and T >= 3 respectively.
double velocity_loss(std::span<const VertexFrame> truth, std::span<const VertexFrame> predicted);
double acceleration_loss(std::span<const VertexFrame> truth, std::span<const VertexFrame> predicted);
DynLoss dyn_loss(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted);

// w_param * l_param + w_geo * (l_lips + l_face) + w_dyn * (l_vel + l_acc)
double reconstruction_total(double l_param, double l_lips, double l_face, double l_vel, double l_acc,
                            const LossWeights& weights);

// l_vqvae = l_rec + lambda_vq * (codebook_term + commit_term), with the
// commitment term weighted by weights.gamma.
LossReport total_losses(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted,
                        const LatentSequence& z, const LatentSequence& q, const LossWeights& weights);
// Without latents: codebook_term = commit_term = 0 and l_vqvae = l_rec.
LossReport total_losses(const BlendshapeModel& model, const MotionSequence& truth, const MotionSequence& predicted,
                        const LossWeights& weights);

}  // namespace facemotion

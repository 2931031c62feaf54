#pragma once

#include <span>
#include <vector>

#include "facemotion/rvq.hpp"

namespace facemotion {

// PCA window maps. Rows of encode_map are the top-d_z principal directions of
// the centered flattened windows (eigenvalues descending, sign fixed so the
// first non-negligible component is positive); decode_map is its transpose and
// decode_bias the window mean. Directions with eigenvalue at most 1e-12 of
// the largest are left as zero rows. For d_z >= G*58 the identity-extended maps are
// returned instead, which reconstruct exactly.
WindowProjection fit_projections(std::span<const MotionSequence> corpus, const QuantizerConfig& cfg);

// Per-iteration mean squared assignment distortion of each level, recorded
// before the codeword update of that iteration.
struct TrainingTrace {
  std::vector<std::vector<double>> distortion;
  std::vector<double> final_distortion;  // after the closing centroid refresh
  std::vector<std::size_t> reseeded;      // dead-code re-seeds per level
};

// Level-by-level EMA k-means on residuals. Each level starts from seeded
// k-means++ and runs Lloyd iterations whose codewords are bias-corrected EMA
// averages of the assigned sums; codewords whose EMA usage drops below
// dead_code_threshold move to the residual farthest from its codeword. A final
// exact Lloyd polish ends each run. Each level keeps the best of cfg.restarts
// seeded runs. Deterministic for a fixed seed.
Codebook train_codebooks(const RowMatrix& latents, const QuantizerConfig& cfg, TrainingTrace* trace = nullptr);
Codebook train_codebooks(std::span<const LatentSequence> batch, const QuantizerConfig& cfg,
                         TrainingTrace* trace = nullptr);

// Stacks the latent rows of a batch.
RowMatrix stack_latents(std::span<const LatentSequence> batch);

}  // namespace facemotion

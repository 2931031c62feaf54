#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "facemotion/audio_features.hpp"
#include "facemotion/flame.hpp"

namespace facemotion {

struct QuantizerConfig {
  std::size_t group_size = 5;      // G: motion frames per latent
  std::size_t num_levels = 6;      // N_q
  std::size_t codebook_size = 256; // K
  std::size_t latent_dim = 256;    // d_z
  double gamma = 0.25;             // commitment weight
  double ema_decay = 0.99;
  double dead_code_threshold = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 200;
  double tolerance = 1e-6;         // relative distortion improvement
  std::size_t restarts = 8;        // k-means++ starts per level; the best is kept

  std::size_t window_dim() const { return group_size * FlameFrame::kDim; }

  // Throws ConfigError: sizes positive, K <= 65535, gamma >= 0, decay in (0,1).
  void validate() const;
};

// Hierarchical codebooks. levels[j] is K x d_z, one codeword per row.
struct Codebook {
  std::vector<RowMatrix> levels;
  std::vector<Eigen::VectorXd> usage;  // EMA assignment counts per level

  std::size_t num_levels() const { return levels.size(); }
  std::size_t codebook_size() const { return levels.empty() ? 0 : static_cast<std::size_t>(levels[0].rows()); }
  std::size_t latent_dim() const { return levels.empty() ? 0 : static_cast<std::size_t>(levels[0].cols()); }

  // Throws ConfigError on empty levels, ragged shapes or NaN entries.
  void validate() const;
};

// Linear stand-in for the windowed encoder/decoder:
//   z = encode_map * w + encode_bias,  w' = decode_map * z + decode_bias
// where w is a G x 58 window flattened frame-major.
struct WindowProjection {
  RowMatrix encode_map;          // d_z x (G*58)
  Eigen::VectorXd encode_bias;   // d_z
  RowMatrix decode_map;          // (G*58) x d_z
  Eigen::VectorXd decode_bias;   // G*58

  std::size_t latent_dim() const { return static_cast<std::size_t>(encode_map.rows()); }
  std::size_t window_dim() const { return static_cast<std::size_t>(encode_map.cols()); }

  // [I; 0] encoder and [I 0] decoder with zero biases; needs d_z >= window_dim.
  static WindowProjection identity(std::size_t window_dim, std::size_t latent_dim);

  void validate() const;
};

struct LatentSequence {
  RowMatrix vectors;  // positions x d_z
  double fps = 5.0;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
};

// (positions x N_q) grid of codeword indices, row-major.
struct TokenSequence {
  std::vector<std::uint16_t> indices;
  std::size_t num_levels = 0;
  std::size_t codebook_size = 0;
  std::size_t group_size = 0;
  double fps = 5.0;

  std::size_t positions() const { return num_levels == 0 ? 0 : indices.size() / num_levels; }
  std::uint16_t at(std::size_t position, std::size_t level) const { return indices[position * num_levels + level]; }
  std::uint16_t& at(std::size_t position, std::size_t level) { return indices[position * num_levels + level]; }

  // Positions [begin, begin + count), clamped to the end.
  TokenSequence slice(std::size_t begin, std::size_t count) const;
  void append(const TokenSequence& other);

  // Throws ConfigError if any index >= codebook_size or the grid is ragged.
  void validate() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

struct RvqEncoding {
  TokenSequence tokens;
  std::vector<double> residual_norms;  // mean |r_j| over vectors, j = 1..N_q
};

struct CommitmentLoss {
  double codebook_term = 0.0;  // mean |sg[z] - q|^2
  double commit_term = 0.0;    // gamma * mean |z - sg[q]|^2
  double total = 0.0;
};

// Index of the codeword nearest to `v` in squared L2; ties go to the lowest
// index. `distance_sq` receives the winning squared distance.
std::size_t nearest_codeword(const RowMatrix& codewords, const Eigen::Ref<const Eigen::RowVectorXd>& v,
                             double* distance_sq = nullptr);

// Pads to a multiple of G by repeating the final frame, then maps each window.
LatentSequence window_encode(const MotionSequence& motion, const WindowProjection& proj, const QuantizerConfig& cfg);

// Greedy residual quantization, level by level.
RvqEncoding rvq_encode(const LatentSequence& latents, const Codebook& codebook);

// Sum over levels of the selected codewords.
LatentSequence rvq_decode(const TokenSequence& tokens, const Codebook& codebook);

// Inverse of window_encode, truncated to `original_frames`.
MotionSequence window_decode(const LatentSequence& latents, const WindowProjection& proj, const QuantizerConfig& cfg,
                             std::size_t original_frames);

// Value-only evaluation; the stop-gradients only matter for differentiation.
CommitmentLoss commitment_loss(const LatentSequence& z, const LatentSequence& q, double gamma);

// Flattens motion into padded G-frame windows, one row per window.
RowMatrix motion_windows(const MotionSequence& motion, std::size_t group_size);

}  // namespace facemotion

#include "facemotion/rvq.hpp"

#include <cmath>
#include <limits>

#include "facemotion/error.hpp"

namespace facemotion {

void QuantizerConfig::validate() const {
  if (group_size == 0 || num_levels == 0 || codebook_size == 0 || latent_dim == 0) {
    throw ConfigError("quantizer: G, N_q, K and d_z must be positive");
  }
  if (codebook_size > 65535) throw ConfigError("quantizer: codebook_size must be <= 65535");
  if (!(gamma >= 0.0)) throw ConfigError("quantizer: gamma must be nonnegative");
  if (!(ema_decay > 0.0 && ema_decay < 1.0)) throw ConfigError("quantizer: ema_decay must lie in (0, 1)");
  if (!(dead_code_threshold >= 0.0)) throw ConfigError("quantizer: dead_code_threshold must be nonnegative");
  if (max_iterations == 0) throw ConfigError("quantizer: max_iterations must be positive");
  if (restarts == 0) throw ConfigError("quantizer: restarts must be positive");
}

void Codebook::validate() const {
  if (levels.empty()) throw ConfigError("codebook has no levels");
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (levels[j].rows() == 0) throw ConfigError("codebook level " + std::to_string(j) + " is empty");
    if (levels[j].rows() != levels[0].rows() || levels[j].cols() != levels[0].cols()) {
      throw ConfigError("codebook level " + std::to_string(j) + " shape differs from level 0");
    }
    if (levels[j].hasNaN()) throw ConfigError("codebook level " + std::to_string(j) + " contains NaN");
  }
}

WindowProjection WindowProjection::identity(std::size_t window_dim, std::size_t latent_dim) {
  if (latent_dim < window_dim) throw ConfigError("identity projection needs latent_dim >= window_dim");
  const auto d = static_cast<Eigen::Index>(latent_dim);
  const auto w = static_cast<Eigen::Index>(window_dim);
  WindowProjection p;
  p.encode_map = RowMatrix::Identity(d, w);
  p.encode_bias = Eigen::VectorXd::Zero(d);
  p.decode_map = RowMatrix::Identity(w, d);
  p.decode_bias = Eigen::VectorXd::Zero(w);
  return p;
}

void WindowProjection::validate() const {
  if (encode_map.rows() == 0 || encode_map.cols() == 0) throw ConfigError("projection: empty encode map");
  if (encode_bias.size() != encode_map.rows()) throw ConfigError("projection: encode bias length mismatch");
  if (decode_map.rows() != encode_map.cols() || decode_map.cols() != encode_map.rows()) {
    throw ConfigError("projection: decode map must be the transpose shape of the encode map");
  }
  if (decode_bias.size() != decode_map.rows()) throw ConfigError("projection: decode bias length mismatch");
  if (!encode_map.allFinite() || !decode_map.allFinite() || !encode_bias.allFinite() || !decode_bias.allFinite()) {
    throw ConfigError("projection: non-finite entries");
  }
}

TokenSequence TokenSequence::slice(std::size_t begin, std::size_t count) const {
  TokenSequence out = *this;
  const std::size_t n = positions();
  const std::size_t b = std::min(begin, n);
  const std::size_t e = std::min(n, b + count);
  out.indices.assign(indices.begin() + static_cast<std::ptrdiff_t>(b * num_levels),
                     indices.begin() + static_cast<std::ptrdiff_t>(e * num_levels));
  return out;
}

void TokenSequence::append(const TokenSequence& other) {
  if (positions() == 0 && num_levels == 0) {
    *this = other;
    return;
  }
  if (other.num_levels != num_levels || other.codebook_size != codebook_size) {
    throw DimensionError("cannot append token sequences with different (N_q, K)");
  }
  indices.insert(indices.end(), other.indices.begin(), other.indices.end());
}

void TokenSequence::validate() const {
  if (num_levels == 0 || codebook_size == 0) throw ConfigError("token sequence has no level/codebook config");
  if (indices.size() % num_levels != 0) throw ConfigError("token grid is not a whole number of positions");
  for (auto k : indices) {
    if (k >= codebook_size) {
      throw ConfigError("token index " + std::to_string(k) + " outside [0, " + std::to_string(codebook_size) + ")");
    }
  }
}

std::size_t nearest_codeword(const RowMatrix& codewords, const Eigen::Ref<const Eigen::RowVectorXd>& v,
                             double* distance_sq) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const Eigen::Index dim = codewords.cols();
  for (Eigen::Index k = 0; k < codewords.rows(); ++k) {
    const double* c = codewords.data() + k * dim;
    double d = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double diff = v[i] - c[i];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(k);
    }
  }
  if (distance_sq) *distance_sq = best_d;
  return best;
}

RowMatrix motion_windows(const MotionSequence& motion, std::size_t group_size) {
  if (motion.empty()) throw DimensionError("cannot window an empty motion sequence");
  const std::size_t t = motion.size();
  const std::size_t windows = (t + group_size - 1) / group_size;
  RowMatrix out(static_cast<Eigen::Index>(windows), static_cast<Eigen::Index>(group_size * FlameFrame::kDim));
  for (std::size_t w = 0; w < windows; ++w) {
    for (std::size_t g = 0; g < group_size; ++g) {
      const std::size_t src = std::min(w * group_size + g, t - 1);
      for (std::size_t c = 0; c < FlameFrame::kDim; ++c) {
        out(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(g * FlameFrame::kDim + c)) =
            motion.frames[src].values[c];
      }
    }
  }
  return out;
}

LatentSequence window_encode(const MotionSequence& motion, const WindowProjection& proj, const QuantizerConfig& cfg) {
  if (proj.window_dim() != cfg.window_dim()) {
    throw DimensionError("projection window width " + std::to_string(proj.window_dim()) + " != G*58 = " +
                         std::to_string(cfg.window_dim()));
  }
  const RowMatrix windows = motion_windows(motion, cfg.group_size);
  LatentSequence out;
  out.fps = motion.fps / static_cast<double>(cfg.group_size);
  out.vectors.resize(windows.rows(), proj.encode_map.rows());
  Eigen::VectorXd window;
  for (Eigen::Index w = 0; w < windows.rows(); ++w) {
    window = windows.row(w).transpose();
    out.vectors.row(w) = (proj.encode_map * window + proj.encode_bias).transpose();
  }
  return out;
}

RvqEncoding rvq_encode(const LatentSequence& latents, const Codebook& codebook) {
  codebook.validate();
  if (latents.size() > 0 && latents.dim() != codebook.latent_dim()) {
    throw DimensionError("latent width " + std::to_string(latents.dim()) + " != codebook width " +
                         std::to_string(codebook.latent_dim()));
  }
  const std::size_t levels = codebook.num_levels();
  RvqEncoding out;
  out.tokens.num_levels = levels;
  out.tokens.codebook_size = codebook.codebook_size();
  out.tokens.fps = latents.fps;
  out.tokens.indices.resize(latents.size() * levels);
  out.residual_norms.assign(levels, 0.0);

  Eigen::RowVectorXd residual;
  for (std::size_t p = 0; p < latents.size(); ++p) {
    residual = latents.vectors.row(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < levels; ++j) {
      const std::size_t k = nearest_codeword(codebook.levels[j], residual);
      out.tokens.at(p, j) = static_cast<std::uint16_t>(k);
      residual -= codebook.levels[j].row(static_cast<Eigen::Index>(k));
      out.residual_norms[j] += residual.norm();
    }
  }
  if (latents.size() > 0) {
    for (double& r : out.residual_norms) r /= static_cast<double>(latents.size());
  }
  return out;
}

LatentSequence rvq_decode(const TokenSequence& tokens, const Codebook& codebook) {
  codebook.validate();
  if (tokens.num_levels != codebook.num_levels()) {
    throw DimensionError("token levels " + std::to_string(tokens.num_levels) + " != codebook levels " +
                         std::to_string(codebook.num_levels()));
  }
  const std::size_t k_max = codebook.codebook_size();
  LatentSequence out;
  out.fps = tokens.fps;
  out.vectors = RowMatrix::Zero(static_cast<Eigen::Index>(tokens.positions()),
                                static_cast<Eigen::Index>(codebook.latent_dim()));
  for (std::size_t p = 0; p < tokens.positions(); ++p) {
    for (std::size_t j = 0; j < tokens.num_levels; ++j) {
      const std::size_t k = tokens.at(p, j);
      if (k >= k_max) {
        throw ConfigError("token index " + std::to_string(k) + " outside codebook of size " + std::to_string(k_max));
      }
      out.vectors.row(static_cast<Eigen::Index>(p)) += codebook.levels[j].row(static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

MotionSequence window_decode(const LatentSequence& latents, const WindowProjection& proj, const QuantizerConfig& cfg,
                             std::size_t original_frames) {
  if (proj.window_dim() != cfg.window_dim()) throw DimensionError("projection window width != G*58");
  if (latents.size() > 0 && latents.dim() != proj.latent_dim()) {
    throw DimensionError("latent width " + std::to_string(latents.dim()) + " != projection width " +
                         std::to_string(proj.latent_dim()));
  }
  const std::size_t capacity = latents.size() * cfg.group_size;
  if (original_frames > capacity) {
    throw DimensionError("requested " + std::to_string(original_frames) + " frames but latents decode to " +
                         std::to_string(capacity));
  }
  MotionSequence out;
  out.fps = latents.fps * static_cast<double>(cfg.group_size);
  out.frames.resize(original_frames);
  // Each window goes through its own aligned copy so the product does not
  // depend on where the latent row sits in memory.
  Eigen::VectorXd latent;
  Eigen::VectorXd window;
  for (std::size_t w = 0; w * cfg.group_size < original_frames; ++w) {
    latent = latents.vectors.row(static_cast<Eigen::Index>(w)).transpose();
    window = proj.decode_map * latent + proj.decode_bias;
    for (std::size_t g = 0; g < cfg.group_size; ++g) {
      const std::size_t t = w * cfg.group_size + g;
      if (t >= original_frames) break;
      for (std::size_t c = 0; c < FlameFrame::kDim; ++c) {
        out.frames[t].values[c] = window[static_cast<Eigen::Index>(g * FlameFrame::kDim + c)];
      }
    }
  }
  return out;
}

CommitmentLoss commitment_loss(const LatentSequence& z, const LatentSequence& q, double gamma) {
  if (z.vectors.rows() != q.vectors.rows() || z.vectors.cols() != q.vectors.cols()) {
    throw DimensionError("commitment loss needs equal latent shapes");
  }
  CommitmentLoss out;
  if (z.size() == 0) return out;
  const double mean_sq = (z.vectors - q.vectors).rowwise().squaredNorm().mean();
  out.codebook_term = mean_sq;
  out.commit_term = gamma * mean_sq;
  out.total = out.codebook_term + out.commit_term;
  return out;
}

}  // namespace facemotion

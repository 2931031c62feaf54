#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "facemotion/error.hpp"
#include "facemotion/random.hpp"
#include "facemotion/training.hpp"

namespace facemotion {

namespace {

// Splits [0, n) into contiguous chunks across hardware threads. Every index is
// written by exactly one worker, so results match the sequential loop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n / 64 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Assignment {
  std::vector<std::size_t> index;
  std::vector<double> distance_sq;
  double mean_distortion = 0.0;
};

Assignment assign(const RowMatrix& data, const RowMatrix& centers) {
  const auto n = static_cast<std::size_t>(data.rows());
  Assignment a;
  a.index.resize(n);
  a.distance_sq.resize(n);
  parallel_for(n, [&](std::size_t i) {
    a.index[i] = nearest_codeword(centers, data.row(static_cast<Eigen::Index>(i)), &a.distance_sq[i]);
  });
  double total = 0.0;
  for (double d : a.distance_sq) total += d;
  a.mean_distortion = n ? total / static_cast<double>(n) : 0.0;
  return a;
}

RowMatrix kmeans_plus_plus(const RowMatrix& data, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(data.rows());
  RowMatrix centers(static_cast<Eigen::Index>(k), data.cols());
  centers.row(0) = data.row(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (data.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();

  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick;
    if (total <= 0.0) {
      // Every point already coincides with a center; surplus centers are
      // duplicates and get handled by dead-code re-seeding.
      pick = rng.below(n);
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (data.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
      d2[i] = std::min(d2[i], d);
    }
  }
  return centers;
}

// Exact cluster means, shifted by each cluster's first member so a cluster of
// identical points reproduces that point bit for bit.
void refresh_centroids(const RowMatrix& data, const Assignment& a, RowMatrix& centers) {
  const auto k = static_cast<std::size_t>(centers.rows());
  std::vector<Eigen::Index> first(k, -1);
  std::vector<std::size_t> count(k, 0);
  RowMatrix shifted_sum = RowMatrix::Zero(centers.rows(), centers.cols());
  for (std::size_t i = 0; i < a.index.size(); ++i) {
    const std::size_t c = a.index[i];
    const auto row = static_cast<Eigen::Index>(i);
    if (first[c] < 0) first[c] = row;
    shifted_sum.row(static_cast<Eigen::Index>(c)) += data.row(row) - data.row(first[c]);
    ++count[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    const auto r = static_cast<Eigen::Index>(c);
    centers.row(r) = data.row(first[c]) + shifted_sum.row(r) / static_cast<double>(count[c]);
  }
}

struct LevelResult {
  RowMatrix centers;
  Eigen::VectorXd usage;
  std::vector<double> curve;
  std::size_t reseeded = 0;
  double distortion = 0.0;
};

LevelResult train_once(const RowMatrix& data, const QuantizerConfig& cfg, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  const std::size_t k = cfg.codebook_size;
  const auto kk = static_cast<Eigen::Index>(k);
  Rng rng(seed);

  LevelResult out;
  out.centers = kmeans_plus_plus(data, k, rng);
  RowMatrix ema_sum = RowMatrix::Zero(kk, data.cols());
  Eigen::VectorXd ema_count = Eigen::VectorXd::Zero(kk);
  double weight = 0.0;  // 1 - decay^t, the EMA bias correction
  const double decay = cfg.ema_decay;
  const double dead_below = cfg.dead_code_threshold * (1.0 - 1e-9);

  std::vector<double> curve;
  std::size_t reseeded = 0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const Assignment a = assign(data, out.centers);
    curve.push_back(a.mean_distortion);
    if (a.mean_distortion == 0.0) break;
    if (it > 0 && (previous - a.mean_distortion) / previous < cfg.tolerance) break;
    previous = a.mean_distortion;

    RowMatrix batch_sum = RowMatrix::Zero(kk, data.cols());
    Eigen::VectorXd batch_count = Eigen::VectorXd::Zero(kk);
    for (std::size_t i = 0; i < n; ++i) {
      batch_sum.row(static_cast<Eigen::Index>(a.index[i])) += data.row(static_cast<Eigen::Index>(i));
      batch_count[static_cast<Eigen::Index>(a.index[i])] += 1.0;
    }
    ema_count = decay * ema_count + (1.0 - decay) * batch_count;
    ema_sum = decay * ema_sum + (1.0 - decay) * batch_sum;
    weight = decay * weight + (1.0 - decay);
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (ema_count[c] > 0.0) out.centers.row(c) = ema_sum.row(c) / ema_count[c];
    }

    // Dead codes take the farthest residuals, one distinct point each.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a.distance_sq[x] > a.distance_sq[y]; });
    std::size_t next = 0;
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (ema_count[c] / weight >= dead_below) continue;
      if (next >= n || a.distance_sq[order[next]] <= 0.0) break;
      const auto row = static_cast<Eigen::Index>(order[next++]);
      out.centers.row(c) = data.row(row);
      ema_count[c] = weight;
      ema_sum.row(c) = data.row(row) * weight;
      ++reseeded;
    }
  }

  // Exact Lloyd polish until the assignment stops changing.
  Assignment final_assign = assign(data, out.centers);
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    refresh_centroids(data, final_assign, out.centers);
    Assignment next = assign(data, out.centers);
    const bool stable = next.index == final_assign.index;
    final_assign = std::move(next);
    if (stable) break;
  }
  out.usage = weight > 0.0 ? Eigen::VectorXd(ema_count / weight) : Eigen::VectorXd(Eigen::VectorXd::Zero(kk));
  if (weight == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.usage[static_cast<Eigen::Index>(final_assign.index[i])] += 1.0;
  }

  out.curve = std::move(curve);
  out.reseeded = reseeded;
  out.distortion = assign(data, out.centers).mean_distortion;
  return out;
}

// Best of cfg.restarts independent starts; ties keep the earliest.
LevelResult train_level(const RowMatrix& data, const QuantizerConfig& cfg, std::size_t level, TrainingTrace* trace) {
  const std::uint64_t level_seed = derive_seed(cfg.seed, 100 + level);
  LevelResult best = train_once(data, cfg, level_seed);
  for (std::size_t r = 1; r < cfg.restarts && best.distortion > 0.0; ++r) {
    LevelResult other = train_once(data, cfg, derive_seed(level_seed, r));
    if (other.distortion < best.distortion) best = std::move(other);
  }
  if (trace) {
    trace->distortion.push_back(best.curve);
    trace->final_distortion.push_back(best.distortion);
    trace->reseeded.push_back(best.reseeded);
  }
  return best;
}

}  // namespace

RowMatrix stack_latents(std::span<const LatentSequence> batch) {
  Eigen::Index rows = 0;
  Eigen::Index cols = -1;
  for (const auto& z : batch) {
    if (z.size() == 0) continue;
    if (cols >= 0 && z.vectors.cols() != cols) throw DimensionError("latent batch has mixed widths");
    cols = z.vectors.cols();
    rows += z.vectors.rows();
  }
  RowMatrix out(rows, std::max<Eigen::Index>(cols, 0));
  Eigen::Index at = 0;
  for (const auto& z : batch) {
    if (z.size() == 0) continue;
    out.middleRows(at, z.vectors.rows()) = z.vectors;
    at += z.vectors.rows();
  }
  return out;
}

Codebook train_codebooks(const RowMatrix& latents, const QuantizerConfig& cfg, TrainingTrace* trace) {
  cfg.validate();
  if (latents.rows() == 0) throw ComputationError("train_codebooks: empty latent batch");
  if (static_cast<std::size_t>(latents.cols()) != cfg.latent_dim) {
    throw DimensionError("train_codebooks: latent width " + std::to_string(latents.cols()) + " != d_z " +
                         std::to_string(cfg.latent_dim));
  }

  Codebook cb;
  RowMatrix residual = latents;
  for (std::size_t j = 0; j < cfg.num_levels; ++j) {
    LevelResult level = train_level(residual, cfg, j, trace);
    const Assignment a = assign(residual, level.centers);
    for (Eigen::Index i = 0; i < residual.rows(); ++i) {
      residual.row(i) -= level.centers.row(static_cast<Eigen::Index>(a.index[static_cast<std::size_t>(i)]));
    }
    cb.levels.push_back(std::move(level.centers));
    cb.usage.push_back(std::move(level.usage));
  }
  return cb;
}

Codebook train_codebooks(std::span<const LatentSequence> batch, const QuantizerConfig& cfg, TrainingTrace* trace) {
  return train_codebooks(stack_latents(batch), cfg, trace);
}

}  // namespace facemotion

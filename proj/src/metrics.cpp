#include "facemotion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "facemotion/error.hpp"

namespace facemotion {

void MetricsConfig::validate() const {
  if (!(fps > 0.0)) throw ConfigError("metrics fps must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("metrics epsilon must be positive");
  if (!(peak_min_prominence >= 0.0 && peak_min_prominence < 1.0)) {
    throw ConfigError("peak_min_prominence must be in [0, 1)");
  }
  if (peak_min_distance == 0) throw ConfigError("peak_min_distance must be at least 1");
}

namespace {

void require_equal_length(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionError("series lengths differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

std::vector<double> diff(std::span<const double> x) {
  std::vector<double> out;
  for (std::size_t t = 1; t < x.size(); ++t) out.push_back(x[t] - x[t - 1]);
  return out;
}

double population_std(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

template <typename F>
std::vector<double> landmark_series(const BlendshapeModel& model, const MotionSequence& motion, F measure) {
  std::vector<double> out;
  out.reserve(motion.size());
  for (const auto& frame : motion.frames) out.push_back(measure(model, forward_vertices(model, zero_pose(frame))));
  return out;
}

}  // namespace

std::vector<double> mouth_opening_series(const BlendshapeModel& model, const MotionSequence& motion) {
  return landmark_series(model, motion, mouth_opening);
}

std::vector<double> mouth_width_series(const BlendshapeModel& model, const MotionSequence& motion) {
  return landmark_series(model, motion, mouth_width);
}

double mod_metric(const BlendshapeModel& model, const MotionSequence& pred, const MotionSequence& gt) {
  require_equal_length(pred.size(), gt.size());
  if (gt.empty()) throw ComputationError("MOD of an empty sequence");
  const auto h_pred = mouth_opening_series(model, pred);
  const auto h_gt = mouth_opening_series(model, gt);
  double sum = 0.0;
  for (std::size_t t = 0; t < h_gt.size(); ++t) sum += std::abs(h_pred[t] - h_gt[t]);
  return sum / static_cast<double>(h_gt.size()) * 1000.0;
}

double ufd(const BlendshapeModel& model, const MotionSequence& motion) {
  const auto& upper = model.region(region::kUpperFace);
  if (upper.empty()) throw ComputationError("UFD needs a nonempty upper_face region");
  if (motion.size() < 2) throw ComputationError("UFD needs at least 2 frames");
  const VertexFrame neutral = forward_vertices(model, FlameFrame{});
  std::vector<double> prev(upper.size());
  double total = 0.0;
  for (std::size_t t = 0; t < motion.size(); ++t) {
    const VertexFrame v = forward_vertices(model, zero_pose(motion.frames[t]));
    double frame_sum = 0.0;
    for (std::size_t j = 0; j < upper.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(upper[j]);
      const double d = (v.vertices.row(r) - neutral.vertices.row(r)).norm();
      if (t > 0) frame_sum += std::abs(d - prev[j]);
      prev[j] = d;
    }
    if (t > 0) total += frame_sum / static_cast<double>(upper.size());
  }
  return total / static_cast<double>(motion.size() - 1) * 1e5;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  require_equal_length(a.size(), b.size());
  if (a.size() < 2) throw ComputationError("correlation needs at least 2 samples");
  // A constant series is zero-variance even when its mean rounds off the value.
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  if (*amin == *amax || *bmin == *bmax) return std::nullopt;
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> temporal_corr(std::span<const double> o_pred, std::span<const double> o_gt) {
  return pearson(o_pred, o_gt);
}

std::optional<double> velocity_corr(std::span<const double> o_pred, std::span<const double> o_gt) {
  require_equal_length(o_pred.size(), o_gt.size());
  if (o_gt.size() < 3) throw ComputationError("velocity correlation needs at least 3 samples");
  return pearson(diff(o_pred), diff(o_gt));
}

std::optional<double> lip_width_corr(std::span<const double> w_pred, std::span<const double> w_gt) {
  return pearson(w_pred, w_gt);
}

double liveliness(std::span<const double> o_pred, std::span<const double> o_gt, double epsilon) {
  require_equal_length(o_pred.size(), o_gt.size());
  if (o_gt.size() < 2) throw ComputationError("liveliness needs at least 2 samples");
  return population_std(diff(o_pred)) / (population_std(diff(o_gt)) + epsilon);
}

std::vector<std::size_t> find_peaks(std::span<const double> x, double min_prominence, std::size_t min_distance) {
  const std::size_t n = x.size();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n;) {
    if (x[i - 1] < x[i]) {
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) maxima.push_back((i + j) / 2);
      i = j + 1;
      continue;
    }
    ++i;
  }
  if (maxima.empty()) return maxima;

  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double threshold = min_prominence * (*hi - *lo);
  std::vector<std::size_t> prominent;
  for (auto p : maxima) {
    const double h = x[p];
    double left_min = h;
    for (std::size_t i = p + 1; i-- > 0 && x[i] <= h;) left_min = std::min(left_min, x[i]);
    double right_min = h;
    for (std::size_t i = p; i < n && x[i] <= h; ++i) right_min = std::min(right_min, x[i]);
    const double prominence = h - std::max(left_min, right_min);
    if (prominence > 0.0 && prominence >= threshold) prominent.push_back(p);
  }

  std::vector<std::size_t> order(prominent.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[prominent[a]] > x[prominent[b]]; });
  std::vector<bool> removed(prominent.size(), false);
  for (auto k : order) {
    if (removed[k]) continue;
    for (std::size_t m = 0; m < prominent.size(); ++m) {
      if (m == k || removed[m]) continue;
      const std::size_t gap = prominent[m] > prominent[k] ? prominent[m] - prominent[k] : prominent[k] - prominent[m];
      if (gap < min_distance) removed[m] = true;
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < prominent.size(); ++k) {
    if (!removed[k]) kept.push_back(prominent[k]);
  }
  return kept;
}

std::optional<double> peak_align(std::span<const double> o_pred, std::span<const double> o_gt,
                                 const MetricsConfig& cfg) {
  cfg.validate();
  const auto p_pred = find_peaks(o_pred, cfg.peak_min_prominence, cfg.peak_min_distance);
  const auto p_gt = find_peaks(o_gt, cfg.peak_min_prominence, cfg.peak_min_distance);
  if (p_pred.empty() || p_gt.empty()) return std::nullopt;
  std::vector<double> gaps;
  for (auto g : p_gt) {
    std::size_t best = SIZE_MAX;
    for (auto p : p_pred) best = std::min(best, g > p ? g - p : p - g);
    gaps.push_back(static_cast<double>(best));
  }
  std::sort(gaps.begin(), gaps.end());
  const std::size_t m = gaps.size();
  const double median = m % 2 == 1 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
  return median * 1000.0 / cfg.fps;
}

MetricsReport full_report(const BlendshapeModel& model, const MotionSequence& pred, const MotionSequence& gt,
                          const MetricsConfig& cfg) {
  cfg.validate();
  require_equal_length(pred.size(), gt.size());
  MetricsReport r;
  r.config = cfg;
  const auto o_pred = mouth_opening_series(model, pred);
  const auto o_gt = mouth_opening_series(model, gt);
  const auto w_pred = mouth_width_series(model, pred);
  const auto w_gt = mouth_width_series(model, gt);

  auto attempt = [&](const char* name, std::optional<double>& slot, auto compute) {
    try {
      slot = compute();
    } catch (const ComputationError&) {
      slot.reset();
    }
    if (!slot) r.undefined.emplace_back(name);
  };
  attempt("mod_mm", r.mod_mm, [&]() -> std::optional<double> { return mod_metric(model, pred, gt); });
  attempt("ufd", r.ufd, [&]() -> std::optional<double> { return ufd(model, pred); });
  attempt("ufd_reference", r.ufd_reference, [&]() -> std::optional<double> { return ufd(model, gt); });
  attempt("temporal_corr", r.temporal_corr, [&] { return temporal_corr(o_pred, o_gt); });
  attempt("velocity_corr", r.velocity_corr, [&] { return velocity_corr(o_pred, o_gt); });
  attempt("lip_width_corr", r.lip_width_corr, [&] { return lip_width_corr(w_pred, w_gt); });
  attempt("liveliness_ratio", r.liveliness_ratio,
          [&]() -> std::optional<double> { return liveliness(o_pred, o_gt, cfg.epsilon); });
  attempt("peak_align_ms", r.peak_align_ms, [&] { return peak_align(o_pred, o_gt, cfg); });
  return r;
}

}  // namespace facemotion

// Acceptance gate: acceptance [--out DIR]. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails. Reports land in DIR/run_a and
// DIR/run_b; the second run exists to check byte-identical repeats.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "facemotion/codec.hpp"
#include "facemotion/losses.hpp"
#include "facemotion/metrics.hpp"
#include "facemotion/motion_io.hpp"
#include "facemotion/random.hpp"
#include "facemotion/reports.hpp"
#include "facemotion/streamsim.hpp"
#include "facemotion/synth.hpp"
#include "oracles/oracles.hpp"

using namespace facemotion;
using nlohmann::json;

namespace {

RowMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  }
  return m;
}

oracle::Mat to_mat(const RowMatrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

SynthConfig synth(std::uint64_t seed, std::size_t frames) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.duration_frames = frames;
  return cfg;
}

// Shortest round-trip decimal.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Outcome {
  bool pass = false;
  std::string summary;
  json report;
};

// d_z = G*58 identity maps and a level-0 codebook holding every window
// latent exactly; deeper levels are zero rows.
Outcome codec_round_trip() {
  QuantizerConfig cfg;
  cfg.latent_dim = cfg.window_dim();
  const MotionSequence m = round_to_f32(make_motion(synth(0, 250)));
  Codec codec;
  codec.config = cfg;
  codec.projection = WindowProjection::identity(cfg.window_dim(), cfg.latent_dim);
  const LatentSequence z = window_encode(m, codec.projection, cfg);
  const auto k = static_cast<Eigen::Index>(cfg.codebook_size);
  for (std::size_t j = 0; j < cfg.num_levels; ++j) {
    RowMatrix level = RowMatrix::Zero(k, static_cast<Eigen::Index>(cfg.latent_dim));
    if (j == 0) level.topRows(z.vectors.rows()) = z.vectors;
    codec.codebook.levels.push_back(level);
    codec.codebook.usage.push_back(Eigen::VectorXd::Ones(k));
  }
  codec.round_to_f32();
  const MotionSequence back = round_to_f32(codec.decode(codec.encode(m), m.size()));
  const bool exact = encode_motion(back) == encode_motion(m);
  double max_abs = 0.0;
  for (std::size_t t = 0; t < m.size(); ++t) {
    for (std::size_t c = 0; c < FlameFrame::kDim; ++c) max_abs = std::max(max_abs, std::abs(back.frames[t][c] - m.frames[t][c]));
  }
  return {exact, "bit_exact=" + std::string(exact ? "true" : "false"),
          {{"frames", m.size()}, {"bit_exact", exact}, {"max_abs_error", max_abs}}};
}

Outcome greedy_optimality() {
  QuantizerConfig cfg;
  cfg.codebook_size = 32;
  cfg.num_levels = 3;
  cfg.latent_dim = 8;
  const RowMatrix x = gaussian(1000, 8, 2);
  const Codebook cb = train_codebooks(x, cfg);
  LatentSequence z;
  z.vectors = x;
  const RvqEncoding enc = rvq_encode(z, cb);
  std::vector<oracle::Mat> levels;
  for (const auto& l : cb.levels) levels.push_back(to_mat(l));
  const auto expect = oracle::rvq_indices(levels, to_mat(x));
  std::size_t agree = 0, total = 0;
  for (std::size_t p = 0; p < expect.size(); ++p) {
    for (std::size_t j = 0; j < 3; ++j, ++total) agree += enc.tokens.at(p, j) == expect[p][j];
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " indices agree",
          {{"agree", agree}, {"total", total}}};
}

Outcome training_quality() {
  QuantizerConfig cfg;
  cfg.codebook_size = 4;
  cfg.num_levels = 1;
  cfg.latent_dim = 4;
  cfg.seed = 0;
  const RowMatrix x = gaussian(100, 4, 0);
  const Codebook cb = train_codebooks(x, cfg);
  const double ours = oracle::kmeans_distortion(to_mat(x), to_mat(cb.levels[0]));
  const double best = oracle::lloyd_best(to_mat(x), 4, 50, 0);
  const double ratio = ours / best;
  char buf[96];
  std::snprintf(buf, sizeof buf, "distortion %.6g vs Lloyd best %.6g (ratio %.4f)", ours, best, ratio);
  return {ratio <= 1.05, buf, {{"distortion", ours}, {"lloyd_best", best}, {"ratio", ratio}}};
}

Outcome loss_arithmetic() {
  const double l = reconstruction_total(1, 2, 3, 4, 5, LossWeights{});
  return {l == 500901.0, "l_rec=" + fmt(l), {{"l_rec", l}}};
}

Outcome commitment_anchor() {
  LatentSequence z, q;
  z.vectors = RowMatrix(6, 4);
  q.vectors = RowMatrix(6, 4);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) z.vectors(i, j) = static_cast<double>((i * 7 + j * 3) % 11) / 8.0;
    q.vectors.row(i) = z.vectors.row(i);
    q.vectors(i, i % 4) += (i % 2 ? -1.0 : 1.0);
  }
  const CommitmentLoss c = commitment_loss(z, q, 0.25);
  return {c.total == 1.25, "total=" + fmt(c.total),
          {{"codebook_term", c.codebook_term}, {"commit_term", c.commit_term}, {"total", c.total}}};
}

Outcome identity_suite() {
  bool ok = true;
  json seeds = json::array();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BlendshapeModel model = make_model(synth(seed, 250));
    const MotionSequence m = make_motion(synth(seed, 250));
    const MetricsReport r = full_report(model, m, m);
    bool good = r.mod_mm && *r.mod_mm == 0.0;
    for (const auto& c : {r.temporal_corr, r.velocity_corr, r.lip_width_corr}) {
      if (c) good = good && std::abs(*c - 1.0) <= 1e-9;
    }
    good = good && r.liveliness_ratio && *r.liveliness_ratio >= 1.0 - 1e-3 && *r.liveliness_ratio <= 1.0;
    good = good && r.peak_align_ms && *r.peak_align_ms == 0.0;
    ok = ok && good;
    seeds.push_back({{"seed", seed}, {"pass", good}, {"metrics", to_json(r)}});
  }
  return {ok, "20 seeds", {{"seeds", seeds}}};
}

std::vector<double> bumps(std::size_t n, const std::vector<double>& centres) {
  std::vector<double> x(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (double c : centres) x[t] += std::exp(-0.5 * std::pow((static_cast<double>(t) - c) / 2.0, 2));
  }
  return x;
}

Outcome peak_anchor() {
  const MetricsConfig cfg;
  const auto lag = peak_align(bumps(64, {13, 52}), bumps(64, {10, 50}), cfg);
  const bool ok = lag && *lag == 100.0;
  return {ok, "median=" + (lag ? fmt(*lag) : std::string("undefined")) + " ms",
          {{"peak_align_ms", lag ? json(*lag) : json(nullptr)}}};
}

Outcome ce_anchor() {
  TokenSequence targets;
  targets.num_levels = 6;
  targets.codebook_size = 256;
  Rng rng(0);
  for (std::size_t i = 0; i < 50 * 6; ++i) targets.indices.push_back(static_cast<std::uint16_t>(rng.below(256)));
  const CrossEntropy ce = hierarchical_ce(TokenDistributions::uniform(50, 6, 256), targets);
  const double expect = 6.0 * std::log(256.0);
  const double err = std::abs(ce.value - expect);
  return {!ce.infinite && err <= 1e-6, "ce=" + fmt(ce.value) + " |err|=" + fmt(err),
          {{"ce", ce.value}, {"closed_form", expect}, {"abs_error", err}}};
}

Outcome stream_equivalence() {
  const QuantizerConfig cfg;
  const MotionSequence m = make_motion(synth(0, 250));
  const std::vector<MotionSequence> corpus = {m};
  Codec codec = fit_codec(corpus, cfg);
  codec.round_to_f32();
  const TokenSequence gt = codec.encode(m);
  PredictorSpec p;
  p.kind = PredictorKind::kOracle;
  p.gt_tokens = std::make_shared<const TokenSequence>(gt);
  SimulatedClock clock;
  const StreamResult s = run_stream(make_features(m, 16, 0), p, codec, StreamConfig{}, clock);
  const bool same = encode_motion(s.motion) == encode_motion(codec.decode(gt, m.size())) && s.tokens == gt;
  return {same && s.segments == 10, std::to_string(s.segments) + " segments, bit_identical=" + (same ? "true" : "false"),
          {{"segments", s.segments}, {"bit_identical", same}, {"events", s.log.to_text()}}};
}

Outcome rtf_anchor() {
  StreamEventLog log;
  log.record(0.0, EventKind::kInputEnd);
  log.record(7030.0, EventKind::kStreamDone, "frames=250 fps=25");
  const LatencyReport r = latency_report(StreamEventLog::from_text(log.to_text()));
  return {r.rtf == 0.703, "rtf=" + fmt(r.rtf), to_json(r)};
}

Outcome compression_quality() {
  const std::vector<MotionSequence> corpus = {round_to_f32(make_motion(synth(0, 2000)))};
  const QuantizerConfig cfg;
  Codec codec = fit_codec(corpus, cfg);
  codec.round_to_f32();
  const MotionSequence held = round_to_f32(make_motion(synth(1, 250)));
  const MotionSequence rec = codec.decode(codec.encode(held), held.size());
  const double mse = param_loss(held, rec);
  MotionSequence mean = held;
  for (std::size_t c = 0; c < FlameFrame::kDim; ++c) {
    double s = 0.0;
    for (const auto& f : held.frames) s += f[c];
    for (auto& f : mean.frames) f[c] = s / static_cast<double>(held.size());
  }
  const double baseline = param_loss(held, mean);
  const double ratio = mse / baseline;
  char buf[96];
  std::snprintf(buf, sizeof buf, "mse %.4g vs mean-predictor %.4g (ratio %.4f)", mse, baseline, ratio);
  return {ratio <= 0.10, buf, {{"mse", mse}, {"baseline_mse", baseline}, {"ratio", ratio}}};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 means untimed
  std::function<Outcome()> run;
};

std::vector<Criterion> criteria() {
  return {{1, "codec round-trip exactness", 1.0, codec_round_trip},
          {2, "greedy-optimality oracle", 5.0, greedy_optimality},
          {3, "codebook training quality", 10.0, training_quality},
          {4, "loss weight arithmetic", 0.0, loss_arithmetic},
          {5, "commitment loss anchor", 0.0, commitment_anchor},
          {6, "metric identity suite", 0.0, identity_suite},
          {7, "peak-alignment anchor", 0.0, peak_anchor},
          {8, "hierarchical CE anchor", 0.0, ce_anchor},
          {9, "streaming/offline equivalence", 1.0, stream_equivalence},
          {10, "RTF arithmetic anchor", 0.0, rtf_anchor},
          {11, "trained-codec compression quality", 60.0, compression_quality}};
}

// Runs criteria 1-11 once, writing one report per criterion into `dir`.
bool run_all(const std::filesystem::path& dir, bool print) {
  std::filesystem::create_directories(dir);
  bool all = true;
  for (const auto& c : criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what(), {{"error", e.what()}}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0.0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    all = all && pass;
    write_report(dir / ("criterion_" + std::to_string(c.id) + ".json"),
                 {{"criterion", c.id}, {"name", c.name}, {"pass", o.pass}, {"results", o.report}});
    if (print) {
      char timing[64];
      if (c.limit_s > 0.0) {
        std::snprintf(timing, sizeof timing, "%.3f s, limit %.0f s", secs, c.limit_s);
      } else {
        std::snprintf(timing, sizeof timing, "%.3f s", secs);
      }
      std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.summary << " (" << timing
                << ")" << std::endl;
    }
  }
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out = (std::filesystem::temp_directory_path() / "facemotion_acceptance").string();
  app.add_option("--out", out, "report directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path root(out);
  std::filesystem::remove_all(root);
  const bool first = run_all(root / "run_a", true);
  run_all(root / "run_b", false);

  std::size_t identical = 0, total = 0;
  std::string mismatched;
  for (const auto& c : criteria()) {
    const std::string name = "criterion_" + std::to_string(c.id) + ".json";
    ++total;
    if (read_file_bytes(root / "run_a" / name) == read_file_bytes(root / "run_b" / name)) {
      ++identical;
    } else {
      mismatched += " " + name;
    }
  }
  const bool deterministic = identical == total;
  std::cout << (deterministic ? "PASS" : "FAIL") << " 12 determinism: " << identical << "/" << total
            << " report files byte-identical across repeated runs" << mismatched << std::endl;
  return first && deterministic ? 0 : 1;
}

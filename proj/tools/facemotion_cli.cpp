// facemotion: data generation, codec fitting, encode/decode, evaluation and
// stream simulation. Exit codes are listed in docs/cli.md.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "facemotion/codec.hpp"
#include "facemotion/error.hpp"
#include "facemotion/losses.hpp"
#include "facemotion/metrics.hpp"
#include "facemotion/motion_io.hpp"
#include "facemotion/reports.hpp"
#include "facemotion/streamsim.hpp"
#include "facemotion/synth.hpp"

namespace fs = std::filesystem;
using namespace facemotion;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kIoError = 1, kUsage = 2, kFormat = 3, kUndefined = 4 };

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_flag("--quiet,-q", c.quiet, "Suppress progress output");
}

fs::path output_path(const Common& c, const std::string& file) {
  fs::create_directories(c.out);
  return fs::path(c.out) / file;
}

void finish(const Common& c, const RunManifest& m, const std::string& name) {
  const fs::path path = output_path(c, name + ".manifest.json");
  write_report(path, to_json(m));
  if (!c.quiet) {
    for (const auto& [role, file] : m.outputs) std::cout << role << ": " << file << "\n";
    std::cout << "manifest: " << path.string() << "\n";
  }
}

MotionSequence load_motion(const std::string& path) { return load_motion_any(path); }

// ---- gen-data ---------------------------------------------------------------

struct GenDataArgs {
  Common common;
  SynthConfig synth;
  std::size_t feature_dim = 16;
  double feature_noise = 0.01;
  std::string prefix = "data";
  bool csv = false;
};

int run_gen_data(GenDataArgs& a) {
  a.synth.seed = a.common.seed;
  a.synth.validate();
  const BlendshapeModel model = make_model(a.synth);
  const MotionSequence motion = round_to_f32(make_motion(a.synth));

  RunManifest m;
  m.command = "gen-data";
  m.seed = a.common.seed;
  const auto model_path = output_path(a.common, a.prefix + "_model.json");
  const auto motion_path = output_path(a.common, a.prefix + "_motion.a2mo");
  write_model(model_path, model);
  write_motion(motion_path, motion);
  m.outputs = {{"model", model_path.string()}, {"motion", motion_path.string()}};
  if (a.csv) {
    const auto csv_path = output_path(a.common, a.prefix + "_motion.csv");
    write_motion_csv(csv_path, motion);
    m.outputs.emplace_back("motion_csv", csv_path.string());
  }
  if (a.feature_dim > 0) {
    const auto features = make_features(motion, a.feature_dim, a.common.seed, a.feature_noise);
    const auto features_path = output_path(a.common, a.prefix + "_features.a2ft");
    write_features(features_path, features);
    m.outputs.emplace_back("features", features_path.string());
  }
  m.config = {{"synth", to_json(a.synth)},
              {"feature_dim", a.feature_dim},
              {"feature_noise", a.feature_noise},
              {"prefix", a.prefix},
              {"csv", a.csv}};
  m.results = {{"frames", motion.size()}, {"vertices", model.num_vertices()}};
  finish(a.common, m, a.prefix + "_gen-data");
  return kOk;
}

// ---- fit-codec -------------------------------------------------------------

struct FitArgs {
  Common common;
  QuantizerConfig quant;
  std::vector<std::string> motions;
  std::string name = "codec";
};

int run_fit_codec(FitArgs& a) {
  a.quant.seed = a.common.seed;
  a.quant.validate();
  std::vector<MotionSequence> corpus;
  for (const auto& p : a.motions) corpus.push_back(load_motion(p));
  std::size_t total_frames = 0;
  for (const auto& c : corpus) total_frames += c.size();
  if (total_frames == 0) throw ComputationError("training corpus has no frames");

  TrainingTrace trace;
  Codec codec = fit_codec(corpus, a.quant, &trace);
  codec.round_to_f32();
  const auto codec_path = output_path(a.common, a.name + ".a2cb");
  write_codec(codec_path, codec);

  // Diagnostics on the stored (f32) codec over the whole corpus.
  std::vector<LatentSequence> latents;
  for (const auto& c : corpus) {
    if (!c.empty()) latents.push_back(window_encode(c, codec.projection, codec.config));
  }
  LatentSequence z;
  z.vectors = stack_latents(latents);
  const RvqEncoding enc = rvq_encode(z, codec.codebook);
  const LatentSequence q = rvq_decode(enc.tokens, codec.codebook);
  const CommitmentLoss commit = commitment_loss(z, q, codec.config.gamma);
  double sq = 0.0;
  for (const auto& c : corpus) {
    if (c.empty()) continue;
    const MotionSequence rec = codec.decode(codec.encode(c), c.size());
    sq += param_loss(c, rec) * static_cast<double>(c.size());
  }

  std::vector<std::size_t> iterations;
  for (const auto& d : trace.distortion) iterations.push_back(d.size());
  RunManifest m;
  m.command = "fit-codec";
  m.seed = a.common.seed;
  for (const auto& p : a.motions) m.inputs.emplace_back("motion:" + std::to_string(m.inputs.size()), p);
  m.outputs = {{"codec", codec_path.string()}};
  m.config = {{"quantizer", to_json(a.quant)}};
  m.results = {{"windows", z.size()},
               {"frames", total_frames},
               {"residual_norms", enc.residual_norms},
               {"final_distortion", trace.final_distortion},
               {"iterations", iterations},
               {"reseeded", trace.reseeded},
               {"codebook_term", commit.codebook_term},
               {"commit_term", commit.commit_term},
               {"commitment_total", commit.total},
               {"reconstruction_mse", sq / static_cast<double>(total_frames)}};
  if (!a.common.quiet) {
    std::cout << "windows " << z.size() << ", reconstruction mse "
              << m.results["reconstruction_mse"].get<double>() << "\n";
  }
  finish(a.common, m, a.name);
  return kOk;
}

// ---- encode / decode ---------------------------------------------------------

struct EncodeArgs {
  Common common;
  std::string codec;
  std::string motion;
  std::string name = "tokens";
};

int run_encode(EncodeArgs& a) {
  const Codec codec = read_codec(a.codec);
  const MotionSequence motion = load_motion(a.motion);
  if (motion.empty()) throw ComputationError("cannot encode an empty motion");
  const TokenSequence tokens = codec.encode(motion);
  const auto path = output_path(a.common, a.name + ".a2tk");
  write_tokens(path, tokens);
  RunManifest m;
  m.command = "encode";
  m.seed = a.common.seed;
  m.inputs = {{"codec", a.codec}, {"motion", a.motion}};
  m.outputs = {{"tokens", path.string()}};
  m.results = {{"frames", motion.size()}, {"positions", tokens.positions()}, {"num_levels", tokens.num_levels}};
  finish(a.common, m, a.name);
  return kOk;
}

struct DecodeArgs {
  Common common;
  std::string codec;
  std::string tokens;
  std::size_t frames = 0;  // 0: positions * G
  std::string name = "decoded";
  bool csv = false;
};

int run_decode(DecodeArgs& a) {
  const Codec codec = read_codec(a.codec);
  TokenSequence tokens = read_tokens(a.tokens);
  tokens.group_size = codec.config.group_size;
  if (tokens.num_levels != codec.codebook.num_levels() || tokens.codebook_size != codec.codebook.codebook_size()) {
    throw DimensionError("token file (N_q, K) does not match the codec");
  }
  const MotionSequence motion = a.frames > 0 ? codec.decode(tokens, a.frames) : codec.decode(tokens);
  const auto path = output_path(a.common, a.name + ".a2mo");
  write_motion(path, motion);
  RunManifest m;
  m.command = "decode";
  m.seed = a.common.seed;
  m.inputs = {{"codec", a.codec}, {"tokens", a.tokens}};
  m.outputs = {{"motion", path.string()}};
  if (a.csv) {
    const auto csv_path = output_path(a.common, a.name + ".csv");
    write_motion_csv(csv_path, motion);
    m.outputs.emplace_back("motion_csv", csv_path.string());
  }
  m.config = {{"frames", a.frames}};
  m.results = {{"frames", motion.size()}};
  finish(a.common, m, a.name);
  return kOk;
}

// ---- eval-recon ---------------------------------------------------------------

struct ReconArgs {
  Common common;
  LossWeights weights;
  std::string model;
  std::string gt;
  std::string pred;
  std::string codec;  // optional, enables commitment diagnostics
  std::string name = "recon";
};

int run_eval_recon(ReconArgs& a) {
  a.weights.validate();
  const BlendshapeModel model = read_model(a.model);
  const MotionSequence gt = load_motion(a.gt);
  const MotionSequence pred = load_motion(a.pred);
  LossReport report;
  if (a.codec.empty()) {
    report = total_losses(model, gt, pred, a.weights);
  } else {
    const Codec codec = read_codec(a.codec);
    const LatentSequence z = window_encode(gt, codec.projection, codec.config);
    const LatentSequence q = rvq_decode(rvq_encode(z, codec.codebook).tokens, codec.codebook);
    report = total_losses(model, gt, pred, z, q, a.weights);
  }
  json doc = to_json(report);
  doc["commitment_evaluated"] = !a.codec.empty();
  const auto path = output_path(a.common, a.name + ".losses.json");
  write_report(path, doc);
  RunManifest m;
  m.command = "eval-recon";
  m.seed = a.common.seed;
  m.inputs = {{"model", a.model}, {"gt", a.gt}, {"pred", a.pred}};
  if (!a.codec.empty()) m.inputs.emplace_back("codec", a.codec);
  m.outputs = {{"losses", path.string()}};
  m.config = {{"weights", to_json(a.weights)}};
  m.results = {{"l_rec", report.l_rec}, {"l_vqvae", report.l_vqvae}};
  if (!a.common.quiet) std::cout << "l_rec " << report.l_rec << ", l_vqvae " << report.l_vqvae << "\n";
  finish(a.common, m, a.name);
  return kOk;
}

// ---- eval-metrics / compare -------------------------------------------------

void add_metrics_options(CLI::App* cmd, MetricsConfig& cfg) {
  cmd->add_option("--metrics-fps", cfg.fps, "Frame rate used for ms conversion")->capture_default_str();
  cmd->add_option("--epsilon", cfg.epsilon, "Liveliness denominator guard")->capture_default_str();
  cmd->add_option("--peak-prominence", cfg.peak_min_prominence, "Minimum peak prominence, fraction of range")
      ->capture_default_str();
  cmd->add_option("--peak-distance", cfg.peak_min_distance, "Minimum peak spacing in frames")->capture_default_str();
}

struct MetricsArgs {
  Common common;
  MetricsConfig cfg;
  std::string model;
  std::string gt;
  std::string pred;
  std::string name = "metrics";
};

void print_report(const std::string& label, const MetricsReport& r) {
  auto show = [](const std::optional<double>& v) {
    if (!v) return std::string("undefined");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return std::string(buf);
  };
  std::cout << label << ": mod_mm " << show(r.mod_mm) << ", ufd " << show(r.ufd) << ", temporal_corr "
            << show(r.temporal_corr) << ", velocity_corr " << show(r.velocity_corr) << ", lip_width_corr "
            << show(r.lip_width_corr) << ", liveliness " << show(r.liveliness_ratio) << ", peak_align_ms "
            << show(r.peak_align_ms) << "\n";
}

int run_eval_metrics(MetricsArgs& a) {
  a.cfg.validate();
  const BlendshapeModel model = read_model(a.model);
  const MotionSequence gt = load_motion(a.gt);
  const MotionSequence pred = load_motion(a.pred);
  const MetricsReport report = full_report(model, pred, gt, a.cfg);
  const auto path = output_path(a.common, a.name + ".metrics.json");
  write_report(path, to_json(report));
  RunManifest m;
  m.command = "eval-metrics";
  m.seed = a.common.seed;
  m.inputs = {{"model", a.model}, {"gt", a.gt}, {"pred", a.pred}};
  m.outputs = {{"metrics", path.string()}};
  m.config = {{"metrics", to_json(a.cfg)}};
  m.results = {{"undefined", report.undefined}};
  if (!a.common.quiet) print_report(a.pred, report);
  finish(a.common, m, a.name);
  return kOk;
}

struct CompareArgs {
  Common common;
  MetricsConfig cfg;
  std::string model;
  std::string reference;
  std::vector<std::string> candidates;
  std::string name = "compare";
};

// Score per metric, lower is better. Correlations rank by value, liveliness
// and UFD by distance from the reference profile.
struct Criterion {
  const char* metric;
  std::function<std::optional<double>(const MetricsReport&)> score;
};

std::vector<Criterion> criteria() {
  auto neg = [](const std::optional<double>& v) { return v ? std::optional<double>(-*v) : std::nullopt; };
  return {
      {"mod_mm", [](const MetricsReport& r) { return r.mod_mm; }},
      {"ufd",
       [](const MetricsReport& r) -> std::optional<double> {
         if (!r.ufd || !r.ufd_reference) return std::nullopt;
         return std::abs(*r.ufd - *r.ufd_reference);
       }},
      {"temporal_corr", [neg](const MetricsReport& r) { return neg(r.temporal_corr); }},
      {"velocity_corr", [neg](const MetricsReport& r) { return neg(r.velocity_corr); }},
      {"lip_width_corr", [neg](const MetricsReport& r) { return neg(r.lip_width_corr); }},
      {"liveliness_ratio",
       [](const MetricsReport& r) -> std::optional<double> {
         if (!r.liveliness_ratio) return std::nullopt;
         return std::abs(*r.liveliness_ratio - 1.0);
       }},
      {"peak_align_ms", [](const MetricsReport& r) { return r.peak_align_ms; }},
  };
}

int run_compare(CompareArgs& a) {
  a.cfg.validate();
  const BlendshapeModel model = read_model(a.model);
  const MotionSequence reference = load_motion(a.reference);
  std::vector<MetricsReport> reports;
  for (const auto& c : a.candidates) reports.push_back(full_report(model, load_motion(c), reference, a.cfg));

  json doc;
  doc["reference"] = a.reference;
  doc["config"] = to_json(a.cfg);
  doc["candidates"] = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    doc["candidates"].push_back({{"path", a.candidates[i]}, {"report", to_json(reports[i])}});
  }
  // Competition ranking: 1 + number of strictly better candidates; undefined
  // scores get a null rank.
  json ranking = json::object();
  for (const auto& crit : criteria()) {
    json column = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto s = crit.score(reports[i]);
      json rank;
      if (s) {
        std::size_t better = 0;
        for (const auto& other : reports) {
          const auto t = crit.score(other);
          if (t && *t < *s) ++better;
        }
        rank = better + 1;
      }
      column.push_back({{"path", a.candidates[i]}, {"rank", rank}});
    }
    ranking[crit.metric] = column;
  }
  doc["ranking"] = ranking;

  const auto path = output_path(a.common, a.name + ".compare.json");
  write_report(path, doc);
  RunManifest m;
  m.command = "compare";
  m.seed = a.common.seed;
  m.inputs = {{"model", a.model}, {"reference", a.reference}};
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    m.inputs.emplace_back("candidate:" + std::to_string(i), a.candidates[i]);
  }
  m.outputs = {{"compare", path.string()}};
  m.config = {{"metrics", to_json(a.cfg)}};
  if (!a.common.quiet) {
    for (std::size_t i = 0; i < reports.size(); ++i) print_report(a.candidates[i], reports[i]);
  }
  finish(a.common, m, a.name);
  return kOk;
}

// ---- simulate-stream --------------------------------------------------------

struct StreamArgs {
  Common common;
  StreamConfig stream;
  TimingModel timing;
  std::string features;
  std::string codec;
  std::string predictor = "hold_last";
  std::string gt_tokens;
  std::vector<std::string> corpus_features;
  std::vector<std::string> corpus_tokens;
  std::string clock = "simulated";
  std::string name = "stream";
};

int run_simulate_stream(StreamArgs& a) {
  a.stream.validate();
  const Codec codec = read_codec(a.codec);
  const AudioFeatureSequence features = read_features(a.features);
  PredictorSpec spec;
  spec.kind = parse_predictor_kind(a.predictor);
  spec.seed = a.common.seed;
  if (!a.gt_tokens.empty()) spec.gt_tokens = std::make_shared<const TokenSequence>(read_tokens(a.gt_tokens));
  if (a.corpus_features.size() != a.corpus_tokens.size()) {
    throw ConfigError("--corpus-features and --corpus-tokens must be given in pairs");
  }
  if (!a.corpus_features.empty()) {
    auto corpus = std::make_shared<RetrievalCorpus>();
    for (std::size_t i = 0; i < a.corpus_features.size(); ++i) {
      const auto pooled = downsample_features(read_features(a.corpus_features[i]), codec.config.group_size,
                                              a.stream.downsample);
      corpus->add_stream(pooled, read_tokens(a.corpus_tokens[i]), a.stream.segment_len);
    }
    spec.corpus = corpus;
  }
  spec.validate();

  std::unique_ptr<Clock> clock;
  if (a.clock == "simulated") {
    clock = std::make_unique<SimulatedClock>();
  } else if (a.clock == "wall") {
    clock = std::make_unique<WallClock>();
  } else {
    throw ConfigError("--clock must be simulated or wall");
  }
  const StreamResult result = run_stream(features, spec, codec, a.stream, *clock, a.timing);
  const LatencyReport latency = latency_report(result.log);

  const auto tokens_path = output_path(a.common, a.name + ".a2tk");
  const auto motion_path = output_path(a.common, a.name + ".a2mo");
  const auto events_path = output_path(a.common, a.name + ".events.txt");
  const auto latency_path = output_path(a.common, a.name + ".latency.json");
  write_tokens(tokens_path, result.tokens);
  write_motion(motion_path, result.motion);
  write_event_log(events_path, result.log);
  write_report(latency_path, to_json(latency));

  RunManifest m;
  m.command = "simulate-stream";
  m.seed = a.common.seed;
  m.inputs = {{"features", a.features}, {"codec", a.codec}};
  if (!a.gt_tokens.empty()) m.inputs.emplace_back("gt_tokens", a.gt_tokens);
  for (std::size_t i = 0; i < a.corpus_features.size(); ++i) {
    m.inputs.emplace_back("corpus_features:" + std::to_string(i), a.corpus_features[i]);
    m.inputs.emplace_back("corpus_tokens:" + std::to_string(i), a.corpus_tokens[i]);
  }
  m.outputs = {{"tokens", tokens_path.string()},
               {"motion", motion_path.string()},
               {"events", events_path.string()},
               {"latency", latency_path.string()}};
  m.config = {{"predictor", to_string(spec.kind)},
              {"stream", to_json(a.stream)},
              {"timing", to_json(a.timing)},
              {"clock", a.clock}};
  m.results = {{"segments", result.segments}, {"positions", result.tokens.positions()}, {"rtf", latency.rtf}};
  if (!a.common.quiet) {
    std::cout << result.segments << " segments, rtf " << latency.rtf << "\n";
  }
  finish(a.common, m, a.name);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facial motion codec toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  // Values go in a [<subcommand>] section; flags given on the line win.
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.fallthrough();

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic model, motion and feature files");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--frames", gen.synth.duration_frames, "Motion length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--vertices", gen.synth.num_vertices, "Model vertex count")
      ->check(CLI::Range(std::size_t{10}, std::size_t{1000000}))
      ->capture_default_str();
  gen_cmd->add_option("--fps", gen.synth.fps, "Frame rate")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--speech-rate", gen.synth.speech_rate_hz, "Jaw opening rate (Hz)")->capture_default_str();
  gen_cmd->add_option("--expression-amplitude", gen.synth.expression_amplitude)->capture_default_str();
  gen_cmd->add_option("--expression-decay", gen.synth.expression_decay)->capture_default_str();
  gen_cmd->add_option("--noise", gen.synth.noise_std, "Additive noise std")->capture_default_str();
  gen_cmd->add_option("--jaw-amplitude", gen.synth.jaw_amplitude, "Peak jaw opening (rad)")->capture_default_str();
  gen_cmd->add_option("--feature-dim", gen.feature_dim, "Feature width, 0 skips features")->capture_default_str();
  gen_cmd->add_option("--feature-noise", gen.feature_noise)->capture_default_str();
  gen_cmd->add_option("--prefix", gen.prefix, "Output file prefix")->capture_default_str();
  gen_cmd->add_flag("--csv", gen.csv, "Also write the motion as CSV");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-codec", "Fit window maps and RVQ codebooks");
  add_common(fit_cmd, fit.common);
  fit_cmd->add_option("--motion,motion", fit.motions, "Training motion files")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--group-size", fit.quant.group_size, "Frames per latent (G)")->capture_default_str();
  fit_cmd->add_option("--levels", fit.quant.num_levels, "RVQ levels (N_q)")->capture_default_str();
  fit_cmd->add_option("--codebook-size", fit.quant.codebook_size, "Codewords per level (K)")->capture_default_str();
  fit_cmd->add_option("--latent-dim", fit.quant.latent_dim, "Latent width (d_z)")->capture_default_str();
  fit_cmd->add_option("--gamma", fit.quant.gamma, "Commitment weight")->capture_default_str();
  fit_cmd->add_option("--ema-decay", fit.quant.ema_decay)->capture_default_str();
  fit_cmd->add_option("--dead-code-threshold", fit.quant.dead_code_threshold)->capture_default_str();
  fit_cmd->add_option("--max-iterations", fit.quant.max_iterations)->capture_default_str();
  fit_cmd->add_option("--tolerance", fit.quant.tolerance)->capture_default_str();
  fit_cmd->add_option("--restarts", fit.quant.restarts, "k-means++ starts per level")->capture_default_str();
  fit_cmd->add_option("--name", fit.name, "Output base name")->capture_default_str();

  EncodeArgs enc;
  auto* enc_cmd = app.add_subcommand("encode", "Encode a motion file to tokens");
  add_common(enc_cmd, enc.common);
  enc_cmd->add_option("--codec", enc.codec)->required()->check(CLI::ExistingFile);
  enc_cmd->add_option("--motion", enc.motion)->required()->check(CLI::ExistingFile);
  enc_cmd->add_option("--name", enc.name)->capture_default_str();

  DecodeArgs dec;
  auto* dec_cmd = app.add_subcommand("decode", "Decode tokens to a motion file");
  add_common(dec_cmd, dec.common);
  dec_cmd->add_option("--codec", dec.codec)->required()->check(CLI::ExistingFile);
  dec_cmd->add_option("--tokens", dec.tokens)->required()->check(CLI::ExistingFile);
  dec_cmd->add_option("--frames", dec.frames, "Output length, 0 for positions * G")->capture_default_str();
  dec_cmd->add_option("--name", dec.name)->capture_default_str();
  dec_cmd->add_flag("--csv", dec.csv, "Also write CSV");

  ReconArgs recon;
  auto* recon_cmd = app.add_subcommand("eval-recon", "Reconstruction loss report");
  add_common(recon_cmd, recon.common);
  recon_cmd->add_option("--model", recon.model)->required()->check(CLI::ExistingFile);
  recon_cmd->add_option("--gt", recon.gt)->required()->check(CLI::ExistingFile);
  recon_cmd->add_option("--pred", recon.pred)->required()->check(CLI::ExistingFile);
  recon_cmd->add_option("--codec", recon.codec, "Codec for commitment diagnostics")->check(CLI::ExistingFile);
  recon_cmd->add_option("--w-param", recon.weights.w_param)->capture_default_str();
  recon_cmd->add_option("--w-geo", recon.weights.w_geo)->capture_default_str();
  recon_cmd->add_option("--w-dyn", recon.weights.w_dyn)->capture_default_str();
  recon_cmd->add_option("--gamma", recon.weights.gamma)->capture_default_str();
  recon_cmd->add_option("--lambda-vq", recon.weights.lambda_vq)->capture_default_str();
  recon_cmd->add_option("--name", recon.name)->capture_default_str();

  MetricsArgs met;
  auto* met_cmd = app.add_subcommand("eval-metrics", "Evaluation metrics of a prediction against ground truth");
  add_common(met_cmd, met.common);
  met_cmd->add_option("--model", met.model)->required()->check(CLI::ExistingFile);
  met_cmd->add_option("--gt", met.gt)->required()->check(CLI::ExistingFile);
  met_cmd->add_option("--pred", met.pred)->required()->check(CLI::ExistingFile);
  add_metrics_options(met_cmd, met.cfg);
  met_cmd->add_option("--name", met.name)->capture_default_str();

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Rank candidate motions against a reference");
  add_common(cmp_cmd, cmp.common);
  cmp_cmd->add_option("--model", cmp.model)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--reference", cmp.reference)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--candidate,candidate", cmp.candidates)->required()->check(CLI::ExistingFile);
  add_metrics_options(cmp_cmd, cmp.cfg);
  cmp_cmd->add_option("--name", cmp.name)->capture_default_str();

  StreamArgs st;
  auto* st_cmd = app.add_subcommand("simulate-stream", "Segment-wise streaming decode with latency accounting");
  add_common(st_cmd, st.common);
  st_cmd->add_option("--features", st.features)->required()->check(CLI::ExistingFile);
  st_cmd->add_option("--codec", st.codec)->required()->check(CLI::ExistingFile);
  st_cmd->add_option("--predictor", st.predictor)
      ->check(CLI::IsMember({"hold_last", "retrieval", "oracle", "uniform"}))
      ->capture_default_str();
  st_cmd->add_option("--gt-tokens", st.gt_tokens, "Ground-truth tokens (oracle)")->check(CLI::ExistingFile);
  st_cmd->add_option("--corpus-features", st.corpus_features, "Retrieval corpus features")->check(CLI::ExistingFile);
  st_cmd->add_option("--corpus-tokens", st.corpus_tokens, "Retrieval corpus tokens")->check(CLI::ExistingFile);
  st_cmd->add_option("--segment-len", st.stream.segment_len, "Token positions per segment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  st_cmd->add_option("--clock", st.clock, "simulated or wall")
      ->check(CLI::IsMember({"simulated", "wall"}))
      ->capture_default_str();
  st_cmd->add_option("--first-text-ms", st.timing.first_text_ms)->capture_default_str();
  st_cmd->add_option("--first-audio-ms", st.timing.first_audio_ms)->capture_default_str();
  st_cmd->add_option("--segment-ms", st.timing.segment_ms)->capture_default_str();
  st_cmd->add_option("--name", st.name)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*fit_cmd) return run_fit_codec(fit);
    if (*enc_cmd) return run_encode(enc);
    if (*dec_cmd) return run_decode(dec);
    if (*recon_cmd) return run_eval_recon(recon);
    if (*met_cmd) return run_eval_metrics(met);
    if (*cmp_cmd) return run_compare(cmp);
    if (*st_cmd) return run_simulate_stream(st);
  } catch (const FormatError& e) {
    std::cerr << "facemotion: format error: " << e.what() << "\n";
    return kFormat;
  } catch (const ComputationError& e) {
    std::cerr << "facemotion: undefined: " << e.what() << "\n";
    return kUndefined;
  } catch (const ConfigError& e) {
    std::cerr << "facemotion: invalid configuration: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    std::cerr << "facemotion: incompatible inputs: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "facemotion: error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsage;
}

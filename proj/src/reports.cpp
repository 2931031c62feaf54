#include "facemotion/reports.hpp"

#include "facemotion/motion_io.hpp"

namespace facemotion {

namespace {

nlohmann::json optional_value(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json path_list(const std::vector<std::pair<std::string, std::string>>& items) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [role, path] : items) out[role] = path;
  return out;
}

}  // namespace

nlohmann::json to_json(const SynthConfig& cfg) {
  return {{"seed", cfg.seed},
          {"num_vertices", cfg.num_vertices},
          {"duration_frames", cfg.duration_frames},
          {"fps", cfg.fps},
          {"speech_rate_hz", cfg.speech_rate_hz},
          {"expression_amplitude", cfg.expression_amplitude},
          {"expression_decay", cfg.expression_decay},
          {"noise_std", cfg.noise_std},
          {"jaw_amplitude", cfg.jaw_amplitude},
          {"blink_interval_s", cfg.blink_interval_s},
          {"blink_duration_s", cfg.blink_duration_s}};
}

nlohmann::json to_json(const QuantizerConfig& cfg) {
  return {{"group_size", cfg.group_size},
          {"num_levels", cfg.num_levels},
          {"codebook_size", cfg.codebook_size},
          {"latent_dim", cfg.latent_dim},
          {"gamma", cfg.gamma},
          {"ema_decay", cfg.ema_decay},
          {"dead_code_threshold", cfg.dead_code_threshold},
          {"seed", cfg.seed},
          {"max_iterations", cfg.max_iterations},
          {"tolerance", cfg.tolerance},
          {"restarts", cfg.restarts}};
}

nlohmann::json to_json(const LossWeights& w) {
  return {{"w_param", w.w_param}, {"w_geo", w.w_geo},         {"w_dyn", w.w_dyn},
          {"gamma", w.gamma},     {"lambda_vq", w.lambda_vq}, {"reduction", to_string(w.reduction)}};
}

nlohmann::json to_json(const LossReport& r) {
  return {{"l_param", r.l_param},
          {"l_lips", r.l_lips},
          {"l_face", r.l_face},
          {"l_vel", r.l_vel},
          {"l_acc", r.l_acc},
          {"l_rec", r.l_rec},
          {"codebook_term", r.codebook_term},
          {"commit_term", r.commit_term},
          {"l_vqvae", r.l_vqvae},
          {"weights", to_json(r.weights)}};
}

nlohmann::json to_json(const MetricsConfig& cfg) {
  return {{"fps", cfg.fps},
          {"epsilon", cfg.epsilon},
          {"peak_min_prominence", cfg.peak_min_prominence},
          {"peak_min_distance", cfg.peak_min_distance},
          {"std_convention", "population"}};
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"mod_mm", optional_value(r.mod_mm)},
          {"ufd", optional_value(r.ufd)},
          {"ufd_reference", optional_value(r.ufd_reference)},
          {"temporal_corr", optional_value(r.temporal_corr)},
          {"velocity_corr", optional_value(r.velocity_corr)},
          {"lip_width_corr", optional_value(r.lip_width_corr)},
          {"liveliness_ratio", optional_value(r.liveliness_ratio)},
          {"peak_align_ms", optional_value(r.peak_align_ms)},
          {"undefined", r.undefined},
          {"config", to_json(r.config)}};
}

nlohmann::json to_json(const StreamConfig& cfg) {
  return {{"segment_len", cfg.segment_len},
          {"downsample", cfg.downsample.empty() ? "mean_pool" : "mean_pool_affine"}};
}

nlohmann::json to_json(const TimingModel& t) {
  return {{"first_text_ms", t.first_text_ms}, {"first_audio_ms", t.first_audio_ms}, {"segment_ms", t.segment_ms}};
}

nlohmann::json to_json(const LatencyReport& r) {
  return {{"ttft_ms", optional_value(r.ttft_ms)},
          {"ttfa_ms", optional_value(r.ttfa_ms)},
          {"rtf", r.rtf},
          {"content_duration_ms", r.content_duration_ms},
          {"generation_time_ms", r.generation_time_ms}};
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"tool_version", kToolVersion},
          {"seed", m.seed},
          {"inputs", path_list(m.inputs)},
          {"outputs", path_list(m.outputs)},
          {"config", m.config},
          {"results", m.results}};
}

std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_report(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_text(path, dump_report(j));
}

}  // namespace facemotion

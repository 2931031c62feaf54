#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facemotion/audio_features.hpp"
#include "facemotion/codec.hpp"

namespace facemotion {

// Affine map applied after mean-pooling. An empty map is the identity.
struct DownsampleMap {
  RowMatrix weight;       // d_out x d_in
  Eigen::VectorXd bias;   // d_out

  bool empty() const { return weight.size() == 0; }
};

// Pads to a multiple of G by repeating the last row, mean-pools each group and
// applies `map`. Output has ceil(T / G) rows at fps / G.
AudioFeatureSequence downsample_features(const AudioFeatureSequence& h, std::size_t group_size,
                                         const DownsampleMap& map = {});

enum class PredictorKind { kHoldLast, kRetrieval, kOracle, kUniform };

std::string to_string(PredictorKind kind);
// Accepts hold_last, retrieval, oracle, uniform; throws ConfigError otherwise.
PredictorKind parse_predictor_kind(std::string_view name);

struct RetrievalEntry {
  Eigen::VectorXd key;  // mean of the segment's downsampled features
  TokenSequence tokens;
};

struct RetrievalCorpus {
  std::vector<RetrievalEntry> entries;

  // Cuts an aligned (downsampled features, tokens) pair into segments of
  // `segment_len` positions and appends one entry per segment.
  void add_stream(const AudioFeatureSequence& pooled, const TokenSequence& tokens, std::size_t segment_len);
};

struct PredictorSpec {
  PredictorKind kind = PredictorKind::kHoldLast;
  std::shared_ptr<const RetrievalCorpus> corpus;   // retrieval
  std::shared_ptr<const TokenSequence> gt_tokens;  // oracle
  std::uint64_t seed = 0;                          // uniform

  // Throws ConfigError when the chosen kind lacks its handle.
  void validate() const;
};

struct StreamConfig {
  std::size_t segment_len = 5;  // token positions per segment
  DownsampleMap downsample;

  void validate() const;
};

// Everything the next step may condition on: the previous segment's tokens
// and where the stream stands.
struct SegmentState {
  TokenSequence history;        // empty at stream start
  std::size_t segment_index = 0;
  std::size_t position = 0;     // token positions emitted so far
  std::size_t num_levels = 0;
  std::size_t codebook_size = 0;
  std::size_t segment_len = 0;

  static SegmentState start(const Codec& codec, const StreamConfig& cfg);
};

struct StepResult {
  TokenSequence tokens;
  MotionSequence motion;
  SegmentState next;
};

// One segment: `segment_features` holds one downsampled row per token position.
StepResult step(const SegmentState& state, const AudioFeatureSequence& segment_features,
                const PredictorSpec& predictor, const Codec& codec);

enum class EventKind { kInputEnd, kFirstTextToken, kFirstAudioToken, kFirstMotionFrame, kSegmentDone, kStreamDone };

std::string to_string(EventKind kind);
EventKind parse_event_kind(std::string_view name);

struct StreamEvent {
  double timestamp_ms = 0.0;
  EventKind kind = EventKind::kInputEnd;
  std::string payload;

  friend bool operator==(const StreamEvent&, const StreamEvent&) = default;
};

// One event per line: `<timestamp_ms> <kind> [payload]`.
struct StreamEventLog {
  std::vector<StreamEvent> events;

  void record(double timestamp_ms, EventKind kind, std::string payload = {});
  // First event of `kind`, or nullptr.
  const StreamEvent* find(EventKind kind) const;
  // Throws FormatError: timestamps decrease, or a generation event precedes input_end.
  void validate() const;

  std::string to_text() const;
  static StreamEventLog from_text(std::string_view text);

  friend bool operator==(const StreamEventLog&, const StreamEventLog&) = default;
};

void write_event_log(const std::filesystem::path& path, const StreamEventLog& log);
StreamEventLog read_event_log(const std::filesystem::path& path);

struct LatencyReport {
  std::optional<double> ttft_ms;
  std::optional<double> ttfa_ms;
  double rtf = 0.0;
  double content_duration_ms = 0.0;
  double generation_time_ms = 0.0;
};

// Needs input_end and a stream_done whose payload carries `frames=<n> fps=<f>`.
LatencyReport latency_report(const StreamEventLog& log);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() const = 0;
  // Simulated cost of a stage; real clocks let time pass on their own.
  virtual void charge(double ms) = 0;
};

class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(double start_ms = 0.0) : now_(start_ms) {}
  double now_ms() const override { return now_; }
  void charge(double ms) override { now_ += ms; }

 private:
  double now_;
};

class WallClock final : public Clock {
 public:
  WallClock() : origin_(std::chrono::steady_clock::now()) {}
  double now_ms() const override {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - origin_).count();
  }
  void charge(double) override {}

 private:
  std::chrono::steady_clock::time_point origin_;
};

// Stage costs charged to the clock by run_stream.
struct TimingModel {
  double first_text_ms = 40.0;    // input_end -> first text token
  double first_audio_ms = 20.0;   // first text token -> first audio token
  double segment_ms = 70.0;       // per decoded segment
};

struct StreamResult {
  TokenSequence tokens;
  MotionSequence motion;  // truncated to the input frame count
  StreamEventLog log;
  std::size_t segments = 0;
};

// Downsamples `features` (one row per motion frame) and steps through
// ceil(T / (G * segment_len)) segments.
StreamResult run_stream(const AudioFeatureSequence& features, const PredictorSpec& predictor, const Codec& codec,
                        const StreamConfig& cfg, Clock& clock, const TimingModel& timing = {});

// probs[(p * N_q + level) * K + k]
struct TokenDistributions {
  std::size_t positions = 0;
  std::size_t num_levels = 0;
  std::size_t codebook_size = 0;
  std::vector<double> probs;

  static TokenDistributions uniform(std::size_t positions, std::size_t num_levels, std::size_t codebook_size);
  double& at(std::size_t p, std::size_t level, std::size_t k) {
    return probs[(p * num_levels + level) * codebook_size + k];
  }
  double at(std::size_t p, std::size_t level, std::size_t k) const {
    return probs[(p * num_levels + level) * codebook_size + k];
  }
};

struct CrossEntropy {
  double value = 0.0;
  bool infinite = false;  // some target had probability zero
};

// Sum over levels of the mean over positions of -ln p(target). Throws
// ComputationError when a distribution is off unit mass by more than 1e-6.
CrossEntropy hierarchical_ce(const TokenDistributions& dists, const TokenSequence& targets);

// lambda * l_motion
double weighted_total(double l_motion, double lambda);

}  // namespace facemotion

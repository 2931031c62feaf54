#include "facemotion/streamsim.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "facemotion/error.hpp"
#include "facemotion/motion_io.hpp"
#include "facemotion/random.hpp"

namespace facemotion {

AudioFeatureSequence downsample_features(const AudioFeatureSequence& h, std::size_t group_size,
                                         const DownsampleMap& map) {
  if (group_size == 0) throw ConfigError("group size must be positive");
  if (h.size() == 0) throw DimensionError("cannot downsample an empty feature sequence");
  if (!map.empty() && (static_cast<std::size_t>(map.weight.cols()) != h.dim() || map.bias.size() != map.weight.rows())) {
    throw DimensionError("downsample map does not match feature width");
  }
  const std::size_t n = (h.size() + group_size - 1) / group_size;
  RowMatrix pooled(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(h.dim()));
  for (std::size_t g = 0; g < n; ++g) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(h.dim()));
    for (std::size_t i = 0; i < group_size; ++i) {
      const std::size_t t = std::min(g * group_size + i, h.size() - 1);
      sum += h.features.row(static_cast<Eigen::Index>(t));
    }
    pooled.row(static_cast<Eigen::Index>(g)) = sum / static_cast<double>(group_size);
  }
  AudioFeatureSequence out;
  out.fps = h.fps / static_cast<double>(group_size);
  if (map.empty()) {
    out.features = std::move(pooled);
  } else {
    out.features = (pooled * map.weight.transpose()).rowwise() + map.bias.transpose();
  }
  return out;
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kHoldLast:
      return "hold_last";
    case PredictorKind::kRetrieval:
      return "retrieval";
    case PredictorKind::kOracle:
      return "oracle";
    case PredictorKind::kUniform:
      return "uniform";
  }
  return "unknown";
}

PredictorKind parse_predictor_kind(std::string_view name) {
  for (auto kind : {PredictorKind::kHoldLast, PredictorKind::kRetrieval, PredictorKind::kOracle,
                    PredictorKind::kUniform}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown predictor '" + std::string(name) + "'");
}

namespace {

Eigen::VectorXd mean_row(const RowMatrix& m) { return m.colwise().mean().transpose(); }

}  // namespace

void RetrievalCorpus::add_stream(const AudioFeatureSequence& pooled, const TokenSequence& tokens,
                                 std::size_t segment_len) {
  if (segment_len == 0) throw ConfigError("segment length must be positive");
  if (pooled.size() != tokens.positions()) {
    throw DimensionError("retrieval stream has " + std::to_string(pooled.size()) + " feature rows but " +
                         std::to_string(tokens.positions()) + " token positions");
  }
  for (std::size_t begin = 0; begin < pooled.size(); begin += segment_len) {
    const auto seg = pooled.slice(begin, segment_len);
    entries.push_back({mean_row(seg.features), tokens.slice(begin, segment_len)});
  }
}

void PredictorSpec::validate() const {
  if (kind == PredictorKind::kOracle && !gt_tokens) throw ConfigError("oracle predictor needs ground-truth tokens");
  if (kind == PredictorKind::kRetrieval && (!corpus || corpus->entries.empty())) {
    throw ConfigError("retrieval predictor needs a nonempty corpus");
  }
}

void StreamConfig::validate() const {
  if (segment_len == 0) throw ConfigError("segment length must be positive");
  if (!downsample.empty() && downsample.bias.size() != downsample.weight.rows()) {
    throw ConfigError("downsample bias length mismatch");
  }
}

SegmentState SegmentState::start(const Codec& codec, const StreamConfig& cfg) {
  SegmentState s;
  s.num_levels = codec.codebook.num_levels();
  s.codebook_size = codec.codebook.codebook_size();
  s.segment_len = cfg.segment_len;
  s.history.num_levels = s.num_levels;
  s.history.codebook_size = s.codebook_size;
  s.history.group_size = codec.config.group_size;
  return s;
}

namespace {

TokenSequence empty_tokens(const SegmentState& state, const Codec& codec, double fps) {
  TokenSequence t;
  t.num_levels = state.num_levels;
  t.codebook_size = state.codebook_size;
  t.group_size = codec.config.group_size;
  t.fps = fps;
  return t;
}

TokenSequence predict(const SegmentState& state, const AudioFeatureSequence& features, const PredictorSpec& predictor,
                      const Codec& codec) {
  const std::size_t n = features.size();
  TokenSequence out = empty_tokens(state, codec, features.fps);
  out.indices.assign(n * state.num_levels, 0);
  switch (predictor.kind) {
    case PredictorKind::kHoldLast: {
      const std::size_t h = state.history.positions();
      if (h == 0) break;
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t l = 0; l < state.num_levels; ++l) out.at(p, l) = state.history.at(p % h, l);
      }
      break;
    }
    case PredictorKind::kOracle: {
      const auto& gt = *predictor.gt_tokens;
      if (gt.num_levels != state.num_levels || gt.codebook_size != state.codebook_size) {
        throw DimensionError("oracle tokens do not match the codebook (N_q, K)");
      }
      if (state.position + n > gt.positions()) {
        throw DimensionError("oracle tokens end at position " + std::to_string(gt.positions()) +
                             " but the stream needs " + std::to_string(state.position + n));
      }
      out.indices = gt.slice(state.position, n).indices;
      break;
    }
    case PredictorKind::kRetrieval: {
      const Eigen::VectorXd query = mean_row(features.features);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < predictor.corpus->entries.size(); ++e) {
        const auto& key = predictor.corpus->entries[e].key;
        if (key.size() != query.size()) throw DimensionError("retrieval key width differs from features");
        const double d = (key - query).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = e;
        }
      }
      const auto& hit = predictor.corpus->entries[best].tokens;
      if (hit.num_levels != state.num_levels || hit.codebook_size != state.codebook_size) {
        throw DimensionError("retrieval tokens do not match the codebook (N_q, K)");
      }
      const std::size_t h = hit.positions();
      for (std::size_t p = 0; p < n && h > 0; ++p) {
        for (std::size_t l = 0; l < state.num_levels; ++l) out.at(p, l) = hit.at(std::min(p, h - 1), l);
      }
      break;
    }
    case PredictorKind::kUniform: {
      Rng rng(derive_seed(predictor.seed, state.segment_index));
      for (auto& k : out.indices) k = static_cast<std::uint16_t>(rng.below(state.codebook_size));
      break;
    }
  }
  return out;
}

}  // namespace

StepResult step(const SegmentState& state, const AudioFeatureSequence& segment_features,
                const PredictorSpec& predictor, const Codec& codec) {
  predictor.validate();
  if (state.num_levels != codec.codebook.num_levels() || state.codebook_size != codec.codebook.codebook_size()) {
    throw DimensionError("segment state does not match the codebook");
  }
  if (segment_features.size() == 0) throw DimensionError("empty segment");
  StepResult r;
  r.tokens = predict(state, segment_features, predictor, codec);
  r.motion = codec.decode(r.tokens);
  r.next = state;
  r.next.history = r.tokens;
  r.next.segment_index = state.segment_index + 1;
  r.next.position = state.position + r.tokens.positions();
  return r;
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kInputEnd:
      return "input_end";
    case EventKind::kFirstTextToken:
      return "first_text_token";
    case EventKind::kFirstAudioToken:
      return "first_audio_token";
    case EventKind::kFirstMotionFrame:
      return "first_motion_frame";
    case EventKind::kSegmentDone:
      return "segment_done";
    case EventKind::kStreamDone:
      return "stream_done";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view name) {
  for (auto kind : {EventKind::kInputEnd, EventKind::kFirstTextToken, EventKind::kFirstAudioToken,
                    EventKind::kFirstMotionFrame, EventKind::kSegmentDone, EventKind::kStreamDone}) {
    if (to_string(kind) == name) return kind;
  }
  throw FormatError("unknown event kind '" + std::string(name) + "'");
}

void StreamEventLog::record(double timestamp_ms, EventKind kind, std::string payload) {
  events.push_back({timestamp_ms, kind, std::move(payload)});
}

const StreamEvent* StreamEventLog::find(EventKind kind) const {
  for (const auto& e : events) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

void StreamEventLog::validate() const {
  bool seen_input_end = false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!std::isfinite(events[i].timestamp_ms)) throw FormatError("event log: non-finite timestamp");
    if (i > 0 && events[i].timestamp_ms < events[i - 1].timestamp_ms) {
      throw FormatError("event log: timestamps decrease at event " + std::to_string(i));
    }
    if (events[i].kind == EventKind::kInputEnd) {
      seen_input_end = true;
    } else if (!seen_input_end) {
      throw FormatError("event log: " + to_string(events[i].kind) + " precedes input_end");
    }
  }
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw FormatError(what + ": cannot parse '" + std::string(s) + "' as a number");
  }
  return v;
}

// Value of `key=` in a space-separated payload.
std::optional<std::string_view> payload_field(std::string_view payload, std::string_view key) {
  std::size_t pos = 0;
  while (pos < payload.size()) {
    std::size_t end = payload.find(' ', pos);
    if (end == std::string_view::npos) end = payload.size();
    const auto item = payload.substr(pos, end - pos);
    if (item.size() > key.size() && item.substr(0, key.size()) == key && item[key.size()] == '=') {
      return item.substr(key.size() + 1);
    }
    pos = end + 1;
  }
  return std::nullopt;
}

}  // namespace

std::string StreamEventLog::to_text() const {
  std::string out;
  for (const auto& e : events) {
    out += format_double(e.timestamp_ms);
    out += ' ';
    out += to_string(e.kind);
    if (!e.payload.empty()) {
      out += ' ';
      out += e.payload;
    }
    out += '\n';
  }
  return out;
}

StreamEventLog StreamEventLog::from_text(std::string_view text) {
  StreamEventLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "event log line " + std::to_string(line_no);
    const auto sp1 = line.find(' ');
    if (sp1 == std::string_view::npos) throw FormatError(where + ": expected '<timestamp_ms> <kind>'");
    const auto sp2 = line.find(' ', sp1 + 1);
    const auto kind = line.substr(sp1 + 1, sp2 == std::string_view::npos ? std::string_view::npos : sp2 - sp1 - 1);
    StreamEvent e;
    e.timestamp_ms = parse_double(line.substr(0, sp1), where);
    e.kind = parse_event_kind(kind);
    if (sp2 != std::string_view::npos) e.payload = std::string(line.substr(sp2 + 1));
    log.events.push_back(std::move(e));
  }
  log.validate();
  return log;
}

void write_event_log(const std::filesystem::path& path, const StreamEventLog& log) {
  write_file_text(path, log.to_text());
}

StreamEventLog read_event_log(const std::filesystem::path& path) {
  try {
    return StreamEventLog::from_text(read_file_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

LatencyReport latency_report(const StreamEventLog& log) {
  log.validate();
  const auto* input_end = log.find(EventKind::kInputEnd);
  const auto* done = log.find(EventKind::kStreamDone);
  if (!input_end) throw ComputationError("event log has no input_end");
  if (!done) throw ComputationError("event log has no stream_done");
  const auto frames = payload_field(done->payload, "frames");
  const auto fps = payload_field(done->payload, "fps");
  if (!frames || !fps) throw FormatError("stream_done payload needs frames=<n> fps=<f>");
  LatencyReport r;
  r.content_duration_ms = parse_double(*frames, "stream_done frames") / parse_double(*fps, "stream_done fps") * 1000.0;
  if (!(r.content_duration_ms > 0.0) || !std::isfinite(r.content_duration_ms)) {
    throw ComputationError("stream produced no content");
  }
  r.generation_time_ms = done->timestamp_ms - input_end->timestamp_ms;
  r.rtf = r.generation_time_ms / r.content_duration_ms;
  if (const auto* audio = log.find(EventKind::kFirstAudioToken)) r.ttft_ms = audio->timestamp_ms - input_end->timestamp_ms;
  if (const auto* motion = log.find(EventKind::kFirstMotionFrame)) {
    r.ttfa_ms = motion->timestamp_ms - input_end->timestamp_ms;
  }
  return r;
}

StreamResult run_stream(const AudioFeatureSequence& features, const PredictorSpec& predictor, const Codec& codec,
                        const StreamConfig& cfg, Clock& clock, const TimingModel& timing) {
  cfg.validate();
  predictor.validate();
  const std::size_t group = codec.config.group_size;
  const AudioFeatureSequence pooled = downsample_features(features, group, cfg.downsample);

  StreamResult result;
  result.log.record(clock.now_ms(), EventKind::kInputEnd);
  clock.charge(timing.first_text_ms);
  result.log.record(clock.now_ms(), EventKind::kFirstTextToken);
  clock.charge(timing.first_audio_ms);
  result.log.record(clock.now_ms(), EventKind::kFirstAudioToken);

  SegmentState state = SegmentState::start(codec, cfg);
  result.tokens = empty_tokens(state, codec, pooled.fps);
  result.motion.fps = pooled.fps * static_cast<double>(group);
  for (std::size_t begin = 0; begin < pooled.size(); begin += cfg.segment_len) {
    StepResult r = step(state, pooled.slice(begin, cfg.segment_len), predictor, codec);
    clock.charge(timing.segment_ms);
    if (state.segment_index == 0) result.log.record(clock.now_ms(), EventKind::kFirstMotionFrame);
    result.log.record(clock.now_ms(), EventKind::kSegmentDone,
                      "index=" + std::to_string(state.segment_index) +
                          " positions=" + std::to_string(r.tokens.positions()));
    result.tokens.append(r.tokens);
    result.motion.frames.insert(result.motion.frames.end(), r.motion.frames.begin(), r.motion.frames.end());
    state = std::move(r.next);
    ++result.segments;
  }
  result.motion.frames.resize(std::min(result.motion.frames.size(), features.size()));
  result.log.record(clock.now_ms(), EventKind::kStreamDone,
                    "frames=" + std::to_string(result.motion.size()) + " fps=" + format_double(result.motion.fps));
  return result;
}

TokenDistributions TokenDistributions::uniform(std::size_t positions, std::size_t num_levels,
                                               std::size_t codebook_size) {
  TokenDistributions d;
  d.positions = positions;
  d.num_levels = num_levels;
  d.codebook_size = codebook_size;
  d.probs.assign(positions * num_levels * codebook_size, 1.0 / static_cast<double>(codebook_size));
  return d;
}

CrossEntropy hierarchical_ce(const TokenDistributions& dists, const TokenSequence& targets) {
  if (dists.probs.size() != dists.positions * dists.num_levels * dists.codebook_size) {
    throw DimensionError("distribution tensor size does not match its shape");
  }
  if (targets.positions() != dists.positions || targets.num_levels != dists.num_levels) {
    throw DimensionError("targets do not match the distribution shape");
  }
  if (dists.positions == 0) throw ComputationError("cross-entropy over zero positions");
  CrossEntropy ce;
  for (std::size_t l = 0; l < dists.num_levels; ++l) {
    double level_sum = 0.0;
    for (std::size_t p = 0; p < dists.positions; ++p) {
      double mass = 0.0;
      for (std::size_t k = 0; k < dists.codebook_size; ++k) {
        const double v = dists.at(p, l, k);
        if (!(v >= 0.0)) throw ComputationError("negative or NaN probability");
        mass += v;
      }
      if (std::abs(mass - 1.0) > 1e-6) {
        throw ComputationError("distribution at position " + std::to_string(p) + ", level " + std::to_string(l) +
                               " sums to " + format_double(mass));
      }
      const std::size_t target = targets.at(p, l);
      if (target >= dists.codebook_size) throw DimensionError("target index outside the distribution");
      const double prob = dists.at(p, l, target);
      if (prob == 0.0) {
        ce.infinite = true;
      } else {
        level_sum -= std::log(prob);
      }
    }
    ce.value += level_sum / static_cast<double>(dists.positions);
  }
  if (ce.infinite) ce.value = std::numeric_limits<double>::infinity();
  return ce;
}

double weighted_total(double l_motion, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  return lambda * l_motion;
}

}  // namespace facemotion

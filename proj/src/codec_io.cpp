#include "facemotion/codec.hpp"

#include "binary_io.hpp"
#include "facemotion/error.hpp"
#include "facemotion/motion_io.hpp"

namespace facemotion {

TokenSequence Codec::encode(const MotionSequence& motion) const {
  TokenSequence tokens = rvq_encode(window_encode(motion, projection, config), codebook).tokens;
  tokens.group_size = config.group_size;
  return tokens;
}

MotionSequence Codec::decode(const TokenSequence& tokens, std::size_t frames) const {
  return window_decode(rvq_decode(tokens, codebook), projection, config, frames);
}

MotionSequence Codec::decode(const TokenSequence& tokens) const {
  return decode(tokens, tokens.positions() * config.group_size);
}

void Codec::round_to_f32() {
  auto round = [](auto& m) { m = m.template cast<float>().template cast<double>(); };
  for (auto& level : codebook.levels) round(level);
  round(projection.encode_map);
  round(projection.encode_bias);
  round(projection.decode_map);
  round(projection.decode_bias);
  config.gamma = static_cast<float>(config.gamma);
}

Codec fit_codec(std::span<const MotionSequence> corpus, const QuantizerConfig& cfg, TrainingTrace* trace) {
  Codec codec;
  codec.config = cfg;
  codec.projection = fit_projections(corpus, cfg);
  std::vector<LatentSequence> latents;
  for (const auto& m : corpus) {
    if (!m.empty()) latents.push_back(window_encode(m, codec.projection, cfg));
  }
  codec.codebook = train_codebooks(std::span<const LatentSequence>(latents), cfg, trace);
  return codec;
}

namespace {

constexpr std::uint32_t kVersion = 1;

void put_matrix(detail::ByteWriter& w, const RowMatrix& m, const Eigen::VectorXd& bias) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f32(static_cast<float>(m(r, c)));
  }
  w.u32(static_cast<std::uint32_t>(bias.size()));
  for (Eigen::Index i = 0; i < bias.size(); ++i) w.f32(static_cast<float>(bias[i]));
}

void get_matrix(detail::ByteReader& r, RowMatrix& m, Eigen::VectorXd& bias) {
  const auto rows = r.u32();
  const auto cols = r.u32();
  if (static_cast<std::size_t>(rows) * cols * 4 > r.remaining()) throw FormatError("A2CB: truncated projection");
  m.resize(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = r.f32();
  }
  const auto len = r.u32();
  if (static_cast<std::size_t>(len) * 4 > r.remaining()) throw FormatError("A2CB: truncated projection bias");
  bias.resize(len);
  for (std::uint32_t i = 0; i < len; ++i) bias[i] = r.f32();
}

}  // namespace

std::vector<std::uint8_t> encode_codec(const Codec& codec) {
  codec.codebook.validate();
  detail::ByteWriter w;
  w.magic("A2CB");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(codec.codebook.num_levels()));
  w.u32(static_cast<std::uint32_t>(codec.codebook.codebook_size()));
  w.u32(static_cast<std::uint32_t>(codec.codebook.latent_dim()));
  w.u32(static_cast<std::uint32_t>(codec.config.group_size));
  w.f32(static_cast<float>(codec.config.gamma));
  for (const auto& level : codec.codebook.levels) {
    for (Eigen::Index k = 0; k < level.rows(); ++k) {
      for (Eigen::Index i = 0; i < level.cols(); ++i) w.f32(static_cast<float>(level(k, i)));
    }
  }
  put_matrix(w, codec.projection.encode_map, codec.projection.encode_bias);
  put_matrix(w, codec.projection.decode_map, codec.projection.decode_bias);
  return w.take();
}

Codec decode_codec(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "A2CB");
  r.expect_magic("A2CB");
  const auto version = r.u32();
  if (version != kVersion) throw FormatError("A2CB: unsupported version " + std::to_string(version));
  Codec codec;
  const auto levels = r.u32();
  const auto k = r.u32();
  const auto d = r.u32();
  codec.config.num_levels = levels;
  codec.config.codebook_size = k;
  codec.config.latent_dim = d;
  codec.config.group_size = r.u32();
  codec.config.gamma = r.f32();
  if (levels == 0 || k == 0 || d == 0 || codec.config.group_size == 0 || k > 65535) {
    throw FormatError("A2CB: invalid header sizes");
  }
  if (static_cast<std::size_t>(levels) * k * d * 4 > r.remaining()) throw FormatError("A2CB: truncated codewords");
  for (std::uint32_t j = 0; j < levels; ++j) {
    RowMatrix level(k, d);
    for (std::uint32_t c = 0; c < k; ++c) {
      for (std::uint32_t i = 0; i < d; ++i) level(c, i) = r.f32();
    }
    codec.codebook.levels.push_back(std::move(level));
    codec.codebook.usage.push_back(Eigen::VectorXd::Zero(k));
  }
  get_matrix(r, codec.projection.encode_map, codec.projection.encode_bias);
  get_matrix(r, codec.projection.decode_map, codec.projection.decode_bias);
  r.expect_end();
  try {
    codec.projection.validate();
    codec.codebook.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("A2CB: ") + e.what());
  }
  if (codec.projection.latent_dim() != d || codec.projection.window_dim() != codec.config.window_dim()) {
    throw FormatError("A2CB: projection shape does not match header");
  }
  return codec;
}

void write_codec(const std::filesystem::path& path, const Codec& codec) { write_file_bytes(path, encode_codec(codec)); }

Codec read_codec(const std::filesystem::path& path) {
  try {
    return decode_codec(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_tokens(const TokenSequence& tokens) {
  tokens.validate();
  detail::ByteWriter w;
  w.magic("A2TK");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(tokens.positions()));
  w.u32(static_cast<std::uint32_t>(tokens.num_levels));
  w.u32(static_cast<std::uint32_t>(tokens.codebook_size));
  for (auto k : tokens.indices) w.u16(k);
  return w.take();
}

TokenSequence decode_tokens(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "A2TK");
  r.expect_magic("A2TK");
  const auto version = r.u32();
  if (version != kVersion) throw FormatError("A2TK: unsupported version " + std::to_string(version));
  TokenSequence tokens;
  const auto count = r.u32();
  tokens.num_levels = r.u32();
  tokens.codebook_size = r.u32();
  if (tokens.num_levels == 0 || tokens.codebook_size == 0 || tokens.codebook_size > 65535) {
    throw FormatError("A2TK: invalid header sizes");
  }
  if (r.remaining() != static_cast<std::size_t>(count) * tokens.num_levels * 2) {
    throw FormatError("A2TK: payload size mismatch");
  }
  tokens.indices.resize(static_cast<std::size_t>(count) * tokens.num_levels);
  for (auto& k : tokens.indices) k = r.u16();
  r.expect_end();
  try {
    tokens.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("A2TK: ") + e.what());
  }
  return tokens;
}

void write_tokens(const std::filesystem::path& path, const TokenSequence& tokens) {
  write_file_bytes(path, encode_tokens(tokens));
}

TokenSequence read_tokens(const std::filesystem::path& path) {
  try {
    return decode_tokens(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace facemotion

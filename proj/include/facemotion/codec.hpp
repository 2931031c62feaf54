#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "facemotion/rvq.hpp"
#include "facemotion/training.hpp"

namespace facemotion {

// Window maps plus codebooks: the full motion tokenizer.
struct Codec {
  QuantizerConfig config;
  WindowProjection projection;
  Codebook codebook;

  TokenSequence encode(const MotionSequence& motion) const;
  // Decodes to tokens.positions() * G frames, or fewer when `frames` is given.
  MotionSequence decode(const TokenSequence& tokens, std::size_t frames) const;
  MotionSequence decode(const TokenSequence& tokens) const;

  // Rounds every stored value through f32, matching an A2CB round trip.
  void round_to_f32();
};

// Fits projections on the corpus, encodes it and trains codebooks on the latents.
Codec fit_codec(std::span<const MotionSequence> corpus, const QuantizerConfig& cfg, TrainingTrace* trace = nullptr);

// A2CB: "A2CB", u32 version (1), u32 N_q, u32 K, u32 d_z, u32 G, f32 gamma,
// N_q*K*d_z f32 codewords (level-major, row-major), then for the encode and the
// decode map in turn: u32 rows, u32 cols, rows*cols f32 (row-major), u32 bias
// length, f32 bias. Little-endian throughout.
std::vector<std::uint8_t> encode_codec(const Codec& codec);
Codec decode_codec(const std::vector<std::uint8_t>& bytes);
void write_codec(const std::filesystem::path& path, const Codec& codec);
Codec read_codec(const std::filesystem::path& path);

// A2TK: "A2TK", u32 version (1), u32 count (positions), u32 N_q, u32 K, then
// count*N_q u16 indices, row-major.
std::vector<std::uint8_t> encode_tokens(const TokenSequence& tokens);
TokenSequence decode_tokens(const std::vector<std::uint8_t>& bytes);
void write_tokens(const std::filesystem::path& path, const TokenSequence& tokens);
TokenSequence read_tokens(const std::filesystem::path& path);

}  // namespace facemotion

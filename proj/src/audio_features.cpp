#include "facemotion/audio_features.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "facemotion/error.hpp"
#include "facemotion/motion_io.hpp"

namespace facemotion {

AudioFeatureSequence AudioFeatureSequence::slice(std::size_t begin, std::size_t count) const {
  AudioFeatureSequence out;
  out.fps = fps;
  const std::size_t b = std::min(begin, size());
  const std::size_t e = std::min(size(), b + count);
  out.features = features.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b));
  return out;
}

std::vector<std::uint8_t> encode_features(const AudioFeatureSequence& features) {
  detail::ByteWriter w;
  w.magic("A2FT");
  w.u32(1);
  w.f32(static_cast<float>(features.fps));
  w.u32(static_cast<std::uint32_t>(features.size()));
  w.u32(static_cast<std::uint32_t>(features.dim()));
  for (Eigen::Index t = 0; t < features.features.rows(); ++t) {
    for (Eigen::Index c = 0; c < features.features.cols(); ++c) w.f32(static_cast<float>(features.features(t, c)));
  }
  return w.take();
}

AudioFeatureSequence decode_features(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "A2FT");
  r.expect_magic("A2FT");
  if (r.u32() != 1) throw FormatError("A2FT: unsupported version");
  AudioFeatureSequence out;
  out.fps = r.f32();
  const auto count = r.u32();
  const auto dim = r.u32();
  if (r.remaining() != static_cast<std::size_t>(count) * dim * 4) throw FormatError("A2FT: payload size mismatch");
  out.features.resize(count, dim);
  for (std::uint32_t t = 0; t < count; ++t) {
    for (std::uint32_t c = 0; c < dim; ++c) out.features(t, c) = r.f32();
  }
  r.expect_end();
  if (!(out.fps > 0.0)) throw FormatError("A2FT: fps must be positive");
  return out;
}

void write_features(const std::filesystem::path& path, const AudioFeatureSequence& features) {
  write_file_bytes(path, encode_features(features));
}

AudioFeatureSequence read_features(const std::filesystem::path& path) {
  try {
    return decode_features(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace facemotion

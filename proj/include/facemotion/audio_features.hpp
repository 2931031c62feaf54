#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace facemotion {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// T x d_h feature rows at `fps` (25 Hz for hidden states, fps / G after
// downsampling).
struct AudioFeatureSequence {
  RowMatrix features;
  double fps = 25.0;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  // Rows [begin, begin + count), clamped to the sequence end.
  AudioFeatureSequence slice(std::size_t begin, std::size_t count) const;
};

// A2FT binary: "A2FT", u32 version (1), f32 fps, u32 frame_count, u32 dim,
// then little-endian f32 rows.
std::vector<std::uint8_t> encode_features(const AudioFeatureSequence& features);
AudioFeatureSequence decode_features(const std::vector<std::uint8_t>& bytes);
void write_features(const std::filesystem::path& path, const AudioFeatureSequence& features);
AudioFeatureSequence read_features(const std::filesystem::path& path);

}  // namespace facemotion

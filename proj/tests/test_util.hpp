#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "facemotion/audio_features.hpp"
#include "facemotion/random.hpp"
#include "facemotion/synth.hpp"
#include "oracles/oracles.hpp"

namespace testutil {

inline facemotion::SynthConfig synth(std::uint64_t seed, std::size_t frames = 250, std::size_t vertices = 200) {
  facemotion::SynthConfig cfg;
  cfg.seed = seed;
  cfg.duration_frames = frames;
  cfg.num_vertices = vertices;
  return cfg;
}

inline facemotion::RowMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  facemotion::Rng rng(seed);
  facemotion::RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

inline oracle::Mat to_mat(const facemotion::RowMatrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("facemotion_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil

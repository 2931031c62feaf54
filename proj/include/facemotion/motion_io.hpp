#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facemotion/blendshape.hpp"
#include "facemotion/flame.hpp"

namespace facemotion {

// A2MO binary: "A2MO", u32 version (1), f32 fps, u32 frame_count, u32 dim (58),
// then frame_count * 58 little-endian f32 values, frame-major.
std::vector<std::uint8_t> encode_motion(const MotionSequence& motion);
MotionSequence decode_motion(const std::vector<std::uint8_t>& bytes);

void write_motion(const std::filesystem::path& path, const MotionSequence& motion);
MotionSequence read_motion(const std::filesystem::path& path);

// CSV: optional "# fps=<value>" line, a header naming the 58 channels, then one
// row per frame. Values are printed with 9 significant digits of the f32 value
// so that CSV -> A2MO -> CSV is exact.
std::string motion_to_csv(const MotionSequence& motion);
MotionSequence motion_from_csv(const std::string& text, double default_fps = 25.0);

void write_motion_csv(const std::filesystem::path& path, const MotionSequence& motion);
MotionSequence read_motion_csv(const std::filesystem::path& path, double default_fps = 25.0);

// Dispatches on extension: ".csv" uses CSV, anything else A2MO.
MotionSequence load_motion_any(const std::filesystem::path& path);

// Rounds every channel (and fps) through f32, matching what a file stores.
MotionSequence round_to_f32(const MotionSequence& motion);

// Blendshape model document (JSON). Schema in docs/formats.md.
nlohmann::json model_to_json(const BlendshapeModel& model);
BlendshapeModel model_from_json(const nlohmann::json& doc);

void write_model(const std::filesystem::path& path, const BlendshapeModel& model);
BlendshapeModel read_model(const std::filesystem::path& path);

// Whole-file helpers shared by the format readers. Errors carry the path.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_file_text(const std::filesystem::path& path);
void write_file_text(const std::filesystem::path& path, const std::string& text);

}  // namespace facemotion

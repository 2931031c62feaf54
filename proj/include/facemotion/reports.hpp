#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facemotion/losses.hpp"
#include "facemotion/metrics.hpp"
#include "facemotion/rvq.hpp"
#include "facemotion/streamsim.hpp"
#include "facemotion/synth.hpp"

namespace facemotion {

inline constexpr const char* kToolVersion = "0.1.0";

// Stable key schemas for every report. Undefined metrics serialize as null and
// are also listed under "undefined".
nlohmann::json to_json(const SynthConfig& cfg);
nlohmann::json to_json(const QuantizerConfig& cfg);
nlohmann::json to_json(const LossWeights& w);
nlohmann::json to_json(const LossReport& r);
nlohmann::json to_json(const MetricsConfig& cfg);
nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const StreamConfig& cfg);
nlohmann::json to_json(const TimingModel& t);
nlohmann::json to_json(const LatencyReport& r);

// Written next to every CLI output. Carries no timestamps so re-runs are
// byte-identical.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // role -> path
  std::vector<std::pair<std::string, std::string>> outputs;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
};

nlohmann::json to_json(const RunManifest& m);

// Two-space indented JSON with a trailing newline.
std::string dump_report(const nlohmann::json& j);
void write_report(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace facemotion

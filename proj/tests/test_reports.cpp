#include <doctest.h>

#include "facemotion/reports.hpp"
#include "test_util.hpp"

using namespace facemotion;

namespace {

std::vector<std::string> keys(const nlohmann::json& j) {
  std::vector<std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.push_back(it.key());
  return out;
}

}  // namespace

TEST_CASE("metrics report schema") {
  MetricsReport r;
  r.mod_mm = 1.5;
  r.undefined = {"ufd"};
  const nlohmann::json j = to_json(r);
  CHECK(keys(j) == std::vector<std::string>{"config", "lip_width_corr", "liveliness_ratio", "mod_mm", "peak_align_ms",
                                            "temporal_corr", "ufd", "ufd_reference", "undefined", "velocity_corr"});
  CHECK(j["mod_mm"] == 1.5);
  CHECK(j["ufd"].is_null());
  CHECK(j["undefined"] == nlohmann::json::array({"ufd"}));
  CHECK(j["config"]["std_convention"] == "population");
}

TEST_CASE("loss and latency report schemas") {
  LossReport l;
  l.l_rec = 3.0;
  const nlohmann::json lj = to_json(l);
  CHECK(keys(lj) == std::vector<std::string>{"codebook_term", "commit_term", "l_acc", "l_face", "l_lips", "l_param",
                                             "l_rec", "l_vel", "l_vqvae", "weights"});
  CHECK(lj["weights"]["reduction"] == "mean_over_frames_and_dims");
  LatencyReport r;
  r.rtf = 0.703;
  const nlohmann::json rj = to_json(r);
  CHECK(rj["ttft_ms"].is_null());
  CHECK(rj["rtf"] == 0.703);
}

TEST_CASE("manifests are stable and timestamp free") {
  RunManifest m;
  m.command = "fit-codec";
  m.seed = 7;
  m.inputs = {{"motion", "a.a2mo"}};
  m.outputs = {{"codec", "codec.a2cb"}};
  m.config = to_json(QuantizerConfig{});
  const std::string a = dump_report(to_json(m));
  const std::string b = dump_report(to_json(m));
  CHECK(a == b);
  CHECK(a.back() == '\n');
  const auto j = nlohmann::json::parse(a);
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["config"]["codebook_size"] == 256);
  CHECK(a.find("time") == std::string::npos);
}

TEST_CASE("doubles survive a report round trip") {
  MetricsReport r;
  r.temporal_corr = 0.1 + 0.2;
  const auto j = nlohmann::json::parse(dump_report(to_json(r)));
  CHECK(j["temporal_corr"].get<double>() == 0.1 + 0.2);
}

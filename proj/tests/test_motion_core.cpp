#include <doctest.h>

#include <cmath>

#include "facemotion/blendshape.hpp"
#include "facemotion/error.hpp"
#include "facemotion/motion_io.hpp"
#include "facemotion/rotation.hpp"
#include "facemotion/synth.hpp"
#include "test_util.hpp"

using namespace facemotion;

TEST_CASE("frame channel layout") {
  FlameFrame f;
  for (std::size_t i = 0; i < FlameFrame::kDim; ++i) f[i] = static_cast<double>(i);
  CHECK(FlameFrame::kDim == 58);
  CHECK(f.expression().front() == 0.0);
  CHECK(f.expression().back() == 49.0);
  CHECK(f.jaw_pose()[0] == 50.0);
  CHECK(f.global_pose()[2] == 55.0);
  CHECK(f.eyelid()[1] == 57.0);
  CHECK(channel_names()[50] == "jaw_x");
  CHECK(channel_names()[57] == "eyelid_right");
}

TEST_CASE("zero_pose strips only the global rotation") {
  FlameFrame f;
  for (std::size_t i = 0; i < FlameFrame::kDim; ++i) f[i] = 0.01 * static_cast<double>(i + 1);
  const FlameFrame z = zero_pose(f);
  for (std::size_t i = 0; i < FlameFrame::kDim; ++i) {
    if (i >= FlameFrame::kGlobalOffset && i < FlameFrame::kEyelidOffset) {
      CHECK(z[i] == 0.0);
    } else {
      CHECK(z[i] == f[i]);
    }
  }
}

TEST_CASE("motion validation") {
  MotionSequence m;
  m.frames.resize(3);
  CHECK_NOTHROW(m.validate());
  m.fps = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.fps = 25.0;
  m.frames[1][4] = std::nan("");
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("rotation of the zero vector is exactly the identity") {
  CHECK(rotation_from_axis_angle(Eigen::Vector3d::Zero()) == Eigen::Matrix3d::Identity());
}

TEST_CASE("rotation agrees with angle-axis oracle") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double scale = i < 20 ? 1e-7 : 1.5;
    const Eigen::Vector3d r(scale * rng.normal(), scale * rng.normal(), scale * rng.normal());
    const Eigen::Matrix3d got = rotation_from_axis_angle(r);
    CHECK((got - oracle::rodrigues(r)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((got.transpose() * got - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(got.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("forward pass of the zero frame is the template") {
  const BlendshapeModel model = make_model(testutil::synth(0));
  const VertexFrame v = forward_vertices(model, FlameFrame{});
  CHECK(v.vertices == model.template_vertices);
}

TEST_CASE("forward pass matches the per-vertex oracle") {
  const auto cfg = testutil::synth(3, 40);
  const BlendshapeModel model = make_model(cfg);
  const MotionSequence motion = make_motion(cfg);
  for (const auto& f : motion.frames) {
    const VertexFrame v = forward_vertices(model, f);
    const auto expect = oracle::forward(model, f);
    for (std::size_t i = 0; i < model.num_vertices(); ++i) {
      REQUIRE((v.vertex(i) - expect[i]).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("jaw rotation moves only the jaw region") {
  const BlendshapeModel model = make_model(testutil::synth(0));
  FlameFrame f;
  f.jaw_pose()[0] = 0.3;
  const VertexFrame v = forward_vertices(model, f);
  std::vector<bool> in_jaw(model.num_vertices(), false);
  for (auto i : model.jaw_region) in_jaw[i] = true;
  for (std::size_t i = 0; i < model.num_vertices(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (!in_jaw[i]) {
      CHECK(v.vertices.row(r) == model.template_vertices.row(r));
    } else {
      CHECK((v.vertex(i) - model.jaw_joint).norm() ==
            doctest::Approx((model.template_vertices.row(r).transpose() - model.jaw_joint).norm()));
    }
  }
}

TEST_CASE("global rotation leaves mouth measurements unchanged") {
  const BlendshapeModel model = make_model(testutil::synth(0));
  const MotionSequence motion = make_motion(testutil::synth(0, 30));
  for (auto f : motion.frames) {
    const VertexFrame plain = forward_vertices(model, zero_pose(f));
    f.global_pose()[0] = 0.4;
    f.global_pose()[1] = -0.2;
    const VertexFrame turned = forward_vertices(model, f);
    CHECK(mouth_opening(model, plain) == doctest::Approx(mouth_opening(model, turned)).epsilon(1e-12));
    CHECK(mouth_width(model, plain) == doctest::Approx(mouth_width(model, turned)).epsilon(1e-12));
  }
}

TEST_CASE("jaw opening increases mouth opening") {
  const BlendshapeModel model = make_model(testutil::synth(0));
  FlameFrame closed;
  FlameFrame open;
  open.jaw_pose()[0] = 0.2;
  CHECK(mouth_opening(model, forward_vertices(model, open)) > mouth_opening(model, forward_vertices(model, closed)));
}

TEST_CASE("sequence_vertices zero-posed equals per-frame zero_pose") {
  const auto cfg = testutil::synth(2, 12);
  const BlendshapeModel model = make_model(cfg);
  const MotionSequence motion = make_motion(cfg);
  const auto seq = sequence_vertices(model, motion, true);
  REQUIRE(seq.size() == motion.size());
  for (std::size_t t = 0; t < motion.size(); ++t) {
    CHECK(seq[t].vertices == forward_vertices(model, zero_pose(motion.frames[t])).vertices);
  }
}

TEST_CASE("model validation rejects malformed models") {
  const BlendshapeModel good = make_model(testutil::synth(0));
  CHECK_NOTHROW(good.validate());

  BlendshapeModel bad = good;
  bad.landmarks["upper_lip"] = good.num_vertices();
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.expression_basis.conservativeResize(bad.expression_basis.rows(), 49);
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.regions["upper_face"].push_back(bad.regions["lips"].front());
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.template_vertices(0, 0) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK_THROWS_AS(good.region("cheeks"), ConfigError);
  CHECK_THROWS_AS(good.landmark("nose_tip"), ConfigError);
}

TEST_CASE("A2MO round trip is exact for f32 values") {
  const MotionSequence m = round_to_f32(make_motion(testutil::synth(0, 37)));
  const auto bytes = encode_motion(m);
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 4 + 37 * 58 * 4);
  CHECK(decode_motion(bytes) == m);
}

TEST_CASE("A2MO rejects bad magic, truncation and trailing bytes") {
  const auto bytes = encode_motion(round_to_f32(make_motion(testutil::synth(0, 5))));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_motion(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_motion(bad), FormatError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_motion(bad), FormatError);
  CHECK_THROWS_AS(decode_motion({}), FormatError);
}

TEST_CASE("CSV round trip preserves f32 values") {
  const MotionSequence m = round_to_f32(make_motion(testutil::synth(4, 20)));
  const MotionSequence back = motion_from_csv(motion_to_csv(m));
  CHECK(back == m);
}

TEST_CASE("CSV rejects wrong headers and rows") {
  CHECK_THROWS_AS(motion_from_csv("a,b,c\n1,2,3\n"), FormatError);
  std::string text = motion_to_csv(round_to_f32(make_motion(testutil::synth(0, 2))));
  text += "1,2,3\n";
  CHECK_THROWS_AS(motion_from_csv(text), FormatError);
}

TEST_CASE("model JSON round trip") {
  const BlendshapeModel model = make_model(testutil::synth(5, 10, 40));
  const BlendshapeModel back = model_from_json(model_to_json(model));
  CHECK(back == model);
  auto doc = model_to_json(model);
  doc["format"] = "other";
  CHECK_THROWS_AS(model_from_json(doc), FormatError);
}

TEST_CASE("file helpers report the path on failure") {
  const auto missing = testutil::scratch_dir("io") / "nope.a2mo";
  try {
    read_motion(missing);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nope.a2mo") != std::string::npos);
  }
}

TEST_CASE("load_motion_any dispatches on extension") {
  const auto dir = testutil::scratch_dir("any");
  const MotionSequence m = round_to_f32(make_motion(testutil::synth(1, 8)));
  write_motion(dir / "m.a2mo", m);
  write_motion_csv(dir / "m.csv", m);
  CHECK(load_motion_any(dir / "m.a2mo") == m);
  CHECK(load_motion_any(dir / "m.csv") == m);
}

TEST_CASE("A2FT feature round trip") {
  AudioFeatureSequence f;
  f.features = testutil::gaussian(9, 4, 1).cast<float>().cast<double>();
  f.fps = 25.0;
  const AudioFeatureSequence back = decode_features(encode_features(f));
  CHECK(back.features == f.features);
  CHECK(back.fps == 25.0);
  auto bytes = encode_features(f);
  bytes.resize(bytes.size() - 2);
  CHECK_THROWS_AS(decode_features(bytes), FormatError);
}

#include <doctest.h>

#include "facemotion/error.hpp"
#include "facemotion/losses.hpp"
#include "test_util.hpp"

using namespace facemotion;

namespace {

struct Pair {
  BlendshapeModel model;
  MotionSequence gt;
  MotionSequence pred;
};

Pair seed0_pair(std::size_t frames = 60) {
  Pair p;
  p.model = make_model(testutil::synth(0));
  p.gt = make_motion(testutil::synth(0, frames));
  auto other = testutil::synth(0, frames);
  other.noise_std = 0.02;
  other.jaw_amplitude = 0.15;
  p.pred = make_motion(other);
  return p;
}

std::vector<std::vector<Eigen::Vector3d>> oracle_vertices(const BlendshapeModel& m, const MotionSequence& s) {
  std::vector<std::vector<Eigen::Vector3d>> out;
  for (const auto& f : s.frames) out.push_back(oracle::forward(m, oracle::strip_global(f)));
  return out;
}

double oracle_region(const std::vector<std::vector<Eigen::Vector3d>>& a,
                     const std::vector<std::vector<Eigen::Vector3d>>& b, const std::vector<std::size_t>& idx) {
  long double s = 0.0L;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (auto i : idx) s += (a[t][i] - b[t][i]).squaredNorm();
  }
  return static_cast<double>(s / (a.size() * idx.size() * 3));
}

double oracle_diff(const std::vector<std::vector<Eigen::Vector3d>>& a,
                   const std::vector<std::vector<Eigen::Vector3d>>& b, int order) {
  auto d = [&](const std::vector<std::vector<Eigen::Vector3d>>& v, std::size_t t, std::size_t i) -> Eigen::Vector3d {
    if (order == 1) return v[t][i] - v[t - 1][i];
    return v[t][i] - 2.0 * v[t - 1][i] + v[t - 2][i];
  };
  long double s = 0.0L;
  const std::size_t n = a[0].size();
  for (std::size_t t = static_cast<std::size_t>(order); t < a.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) s += (d(a, t, i) - d(b, t, i)).squaredNorm();
  }
  return static_cast<double>(s / ((a.size() - static_cast<std::size_t>(order)) * n * 3));
}

}  // namespace

TEST_CASE("loss weight defaults") {
  const LossWeights w;
  CHECK(w.w_param == 1.0);
  CHECK(w.w_geo == 1e5);
  CHECK(w.w_dyn == 1e2);
  CHECK(w.gamma == 0.25);
  CHECK(w.lambda_vq == 1.0);
  CHECK(to_string(w.reduction) == "mean_over_frames_and_dims");
  LossWeights bad;
  bad.w_geo = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("param loss examples") {
  MotionSequence a;
  a.frames.resize(1);
  MotionSequence b = a;
  CHECK(param_loss(a, b) == 0.0);
  b.frames[0][12] = 2.0;
  CHECK(param_loss(a, b) == 4.0 / 58.0);
  b.frames.resize(2);
  CHECK_THROWS_AS(param_loss(a, b), DimensionError);
  b = a;
  b.fps = 30.0;
  CHECK_THROWS_AS(param_loss(a, b), DimensionError);
}

TEST_CASE("param loss matches direct summation") {
  const Pair p = seed0_pair();
  long double s = 0.0L;
  for (std::size_t t = 0; t < p.gt.size(); ++t) {
    for (std::size_t c = 0; c < 58; ++c) {
      const long double d = static_cast<long double>(p.gt.frames[t][c]) - p.pred.frames[t][c];
      s += d * d;
    }
  }
  CHECK(param_loss(p.gt, p.pred) == doctest::Approx(static_cast<double>(s / (p.gt.size() * 58))).epsilon(1e-12));
}

TEST_CASE("a single lip vertex offset") {
  const BlendshapeModel model = make_model(testutil::synth(0));
  const std::size_t frames = 7;
  std::vector<VertexFrame> a(frames, VertexFrame{model.template_vertices});
  std::vector<VertexFrame> b = a;
  const std::size_t v = model.region("lips")[2];
  b[3].vertices(static_cast<Eigen::Index>(v), 1) += 1e-3;
  const double offset = b[3].vertices(static_cast<Eigen::Index>(v), 1) - a[3].vertices(static_cast<Eigen::Index>(v), 1);
  const std::size_t lips = model.region("lips").size();
  CHECK(region_loss(a, b, model.region("lips")) ==
        doctest::Approx(offset * offset / static_cast<double>(frames * lips * 3)).epsilon(1e-14));
  CHECK(region_loss(a, b, model.region("lips")) == doctest::Approx(1e-6 / (frames * lips * 3)).epsilon(1e-9));
}

TEST_CASE("geometric losses match the vertex oracle") {
  const Pair p = seed0_pair();
  const GeoLoss geo = geo_loss(p.model, p.gt, p.pred);
  const auto va = oracle_vertices(p.model, p.gt);
  const auto vb = oracle_vertices(p.model, p.pred);
  CHECK(geo.lips == doctest::Approx(oracle_region(va, vb, p.model.region("lips"))).epsilon(1e-9));
  CHECK(geo.face == doctest::Approx(oracle_region(va, vb, p.model.region("face"))).epsilon(1e-9));
  const GeoLoss same = geo_loss(p.model, p.gt, p.gt);
  CHECK(same.lips == 0.0);
  CHECK(same.face == 0.0);
}

TEST_CASE("dynamic losses match finite-difference oracle") {
  const Pair p = seed0_pair();
  const DynLoss dyn = dyn_loss(p.model, p.gt, p.pred);
  const auto va = oracle_vertices(p.model, p.gt);
  const auto vb = oracle_vertices(p.model, p.pred);
  CHECK(dyn.velocity == doctest::Approx(oracle_diff(va, vb, 1)).epsilon(1e-9));
  CHECK(dyn.acceleration == doctest::Approx(oracle_diff(va, vb, 2)).epsilon(1e-9));
  CHECK(dyn.velocity > 0.0);
}

TEST_CASE("dynamic losses ignore a constant vertex offset") {
  const BlendshapeModel model = make_model(testutil::synth(0));
  const auto seq = sequence_vertices(model, make_motion(testutil::synth(0, 20)), true);
  std::vector<VertexFrame> shifted = seq;
  for (auto& f : shifted) f.vertices.col(2).array() += 0.25;
  CHECK(velocity_loss(seq, shifted) < 1e-30);
  CHECK(acceleration_loss(seq, shifted) < 1e-30);
  CHECK(velocity_loss(seq, seq) == 0.0);
}

TEST_CASE("dynamic losses need enough frames") {
  const Pair p = seed0_pair(2);
  CHECK_THROWS_AS(dyn_loss(p.model, p.gt, p.pred), ComputationError);
  const auto a = sequence_vertices(p.model, p.gt, true);
  const auto b = sequence_vertices(p.model, p.pred, true);
  CHECK_NOTHROW(velocity_loss(a, b));
  CHECK_THROWS_AS(acceleration_loss(a, b), ComputationError);
  CHECK_THROWS_AS(velocity_loss(std::span(a).first(1), std::span(b).first(1)), ComputationError);
}

TEST_CASE("losses are symmetric") {
  const Pair p = seed0_pair(30);
  CHECK(param_loss(p.gt, p.pred) == param_loss(p.pred, p.gt));
  const GeoLoss g1 = geo_loss(p.model, p.gt, p.pred), g2 = geo_loss(p.model, p.pred, p.gt);
  CHECK(g1.lips == g2.lips);
  CHECK(g1.face == g2.face);
  const DynLoss d1 = dyn_loss(p.model, p.gt, p.pred), d2 = dyn_loss(p.model, p.pred, p.gt);
  CHECK(d1.velocity == doctest::Approx(d2.velocity).epsilon(1e-14));
  CHECK(d1.acceleration == doctest::Approx(d2.acceleration).epsilon(1e-14));
}

TEST_CASE("vertex losses ignore a shared global pose") {
  Pair p = seed0_pair(30);
  const GeoLoss g = geo_loss(p.model, p.gt, p.pred);
  const DynLoss d = dyn_loss(p.model, p.gt, p.pred);
  for (std::size_t t = 0; t < p.gt.size(); ++t) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double r = 0.1 * std::sin(0.3 * static_cast<double>(t) + static_cast<double>(c));
      p.gt.frames[t].global_pose()[c] = r;
      p.pred.frames[t].global_pose()[c] = r;
    }
  }
  CHECK(geo_loss(p.model, p.gt, p.pred).lips == g.lips);
  CHECK(geo_loss(p.model, p.gt, p.pred).face == g.face);
  CHECK(dyn_loss(p.model, p.gt, p.pred).velocity == d.velocity);
}

TEST_CASE("reconstruction total arithmetic") {
  const LossWeights w;
  CHECK(reconstruction_total(1, 2, 3, 4, 5, w) == 500901.0);
  LossWeights scaled = w;
  scaled.w_dyn *= 3.0;
  CHECK(reconstruction_total(1, 2, 3, 4, 5, scaled) - reconstruction_total(1, 2, 3, 4, 5, w) == 2.0 * 900.0);
}

TEST_CASE("total losses on a perfect reconstruction are zero") {
  const Pair p = seed0_pair(20);
  LatentSequence z;
  z.vectors = testutil::gaussian(4, 8, 1);
  const LossReport r = total_losses(p.model, p.gt, p.gt, z, z, LossWeights{});
  CHECK(r.l_param == 0.0);
  CHECK(r.l_lips == 0.0);
  CHECK(r.l_face == 0.0);
  CHECK(r.l_vel == 0.0);
  CHECK(r.l_acc == 0.0);
  CHECK(r.l_rec == 0.0);
  CHECK(r.l_vqvae == 0.0);
}

TEST_CASE("total losses compose the component oracles") {
  const Pair p = seed0_pair();
  LatentSequence z, q;
  z.vectors = testutil::gaussian(12, 8, 2);
  q.vectors = z.vectors + testutil::gaussian(12, 8, 3, 0.1);
  const LossWeights w;
  const LossReport r = total_losses(p.model, p.gt, p.pred, z, q, w);
  CHECK(r.l_param == param_loss(p.gt, p.pred));
  CHECK(r.l_rec == doctest::Approx(w.w_param * r.l_param + w.w_geo * (r.l_lips + r.l_face) +
                                   w.w_dyn * (r.l_vel + r.l_acc))
                       .epsilon(1e-9));
  long double mse = 0.0L;
  for (Eigen::Index i = 0; i < z.vectors.rows(); ++i) mse += (z.vectors.row(i) - q.vectors.row(i)).squaredNorm();
  mse /= z.vectors.rows();
  CHECK(r.codebook_term == doctest::Approx(static_cast<double>(mse)).epsilon(1e-12));
  CHECK(r.commit_term == doctest::Approx(0.25 * static_cast<double>(mse)).epsilon(1e-12));
  CHECK(r.l_vqvae == doctest::Approx(r.l_rec + 1.25 * static_cast<double>(mse)).epsilon(1e-12));
  for (double v : {r.l_param, r.l_lips, r.l_face, r.l_vel, r.l_acc, r.codebook_term, r.commit_term}) CHECK(v >= 0.0);
}

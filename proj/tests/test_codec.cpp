#include <doctest.h>

#include "facemotion/codec.hpp"
#include "facemotion/error.hpp"
#include "facemotion/motion_io.hpp"
#include "test_util.hpp"

using namespace facemotion;

namespace {

Codec small_codec(std::uint64_t seed) {
  QuantizerConfig cfg;
  cfg.codebook_size = 16;
  cfg.num_levels = 3;
  cfg.latent_dim = 24;
  cfg.seed = seed;
  const std::vector<MotionSequence> corpus = {make_motion(testutil::synth(seed, 200))};
  return fit_codec(corpus, cfg);
}

}  // namespace

TEST_CASE("exact-capacity codec round trips a sequence bit for bit") {
  QuantizerConfig cfg;
  cfg.latent_dim = cfg.window_dim();
  const MotionSequence m = round_to_f32(make_motion(testutil::synth(0)));
  const std::vector<MotionSequence> corpus = {m};
  Codec codec = fit_codec(corpus, cfg);
  codec.round_to_f32();
  const MotionSequence back = round_to_f32(codec.decode(codec.encode(m), m.size()));
  CHECK(encode_motion(back) == encode_motion(m));
}

TEST_CASE("encode sets the token grid shape") {
  const Codec codec = small_codec(1);
  const TokenSequence t = codec.encode(make_motion(testutil::synth(2, 52)));
  CHECK(t.positions() == 11);
  CHECK(t.num_levels == 3);
  CHECK(t.codebook_size == 16);
  CHECK(t.group_size == 5);
  CHECK(codec.decode(t).size() == 55);
  CHECK(codec.decode(t, 52).size() == 52);
}

TEST_CASE("A2CB round trip equals in-memory f32 rounding") {
  Codec codec = small_codec(3);
  codec.round_to_f32();
  const Codec back = decode_codec(encode_codec(codec));
  CHECK(back.config.group_size == codec.config.group_size);
  CHECK(back.config.num_levels == 3);
  CHECK(back.config.codebook_size == 16);
  CHECK(back.config.latent_dim == 24);
  CHECK(back.config.gamma == codec.config.gamma);
  for (std::size_t j = 0; j < 3; ++j) CHECK(back.codebook.levels[j] == codec.codebook.levels[j]);
  CHECK(back.projection.encode_map == codec.projection.encode_map);
  CHECK(back.projection.decode_bias == codec.projection.decode_bias);
  const MotionSequence m = make_motion(testutil::synth(9, 40));
  CHECK(back.encode(m) == codec.encode(m));
}

TEST_CASE("A2CB rejects corruption") {
  const auto bytes = encode_codec(small_codec(0));
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(decode_codec(bad), FormatError);
  bad = bytes;
  bad.resize(bytes.size() - 1);
  CHECK_THROWS_AS(decode_codec(bad), FormatError);
  bad = bytes;
  bad.push_back(1);
  CHECK_THROWS_AS(decode_codec(bad), FormatError);
  bad = bytes;
  bad[4] = 9;  // version
  CHECK_THROWS_AS(decode_codec(bad), FormatError);
}

TEST_CASE("A2TK round trip and corruption") {
  const Codec codec = small_codec(0);
  const TokenSequence t = codec.encode(make_motion(testutil::synth(0, 30)));
  const auto bytes = encode_tokens(t);
  CHECK(bytes.size() == 20 + t.indices.size() * 2);
  const TokenSequence back = decode_tokens(bytes);
  CHECK(back.indices == t.indices);
  CHECK(back.num_levels == t.num_levels);
  CHECK(back.codebook_size == t.codebook_size);
  auto bad = bytes;
  bad[0] = 'B';
  CHECK_THROWS_AS(decode_tokens(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_tokens(bad), FormatError);
  bad = bytes;
  bad[20] = 0xff;
  bad[21] = 0xff;
  CHECK_THROWS_AS(decode_tokens(bad), FormatError);
}

TEST_CASE("codec files carry the path in errors") {
  const auto dir = testutil::scratch_dir("codec");
  write_file_bytes(dir / "junk.a2cb", {'n', 'o', 'p', 'e'});
  try {
    read_codec(dir / "junk.a2cb");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("junk.a2cb") != std::string::npos);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "vad/audio.hpp"
#include "vad/error.hpp"
#include "vad/util.hpp"

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

// Minimal RIFF/WAVE container around raw sample bytes.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels,
                      std::uint32_t rate, std::uint16_t bits,
                      const std::string& payload) {
  std::string fmt;
  put_u16(fmt, format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);

  std::string s = "RIFF";
  put_u32(s, static_cast<std::uint32_t>(4 + 8 + fmt.size() + 8 + payload.size()));
  s += "WAVE";
  s += "fmt ";
  put_u32(s, static_cast<std::uint32_t>(fmt.size()));
  s += fmt;
  s += "data";
  put_u32(s, static_cast<std::uint32_t>(payload.size()));
  s += payload;
  return s;
}

std::string pcm16_payload(const std::vector<std::int16_t>& samples) {
  std::string s;
  for (std::int16_t v : samples) put_u16(s, static_cast<std::uint16_t>(v));
  return s;
}

vad::AudioClip parse(const std::string& bytes) {
  std::istringstream in(bytes);
  return vad::load_wav(in, "test.wav");
}

std::filesystem::path temp_wav(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string(stem) + "_vadkit_test.wav");
}

}  // namespace

TEST_CASE("frame spec lengths at 16 kHz") {
  vad::FrameSpec spec;
  CHECK(spec.frame_len(16000) == 400);
  CHECK(spec.hop_len(16000) == 160);
  spec.frame_ms = 20.0;
  spec.overlap_ms = 10.0;
  CHECK(spec.frame_len(8000) == 160);
  CHECK(spec.hop_len(8000) == 80);
}

TEST_CASE("frame spec validation") {
  vad::FrameSpec spec;
  CHECK_NOTHROW(spec.validate(16000));

  spec.overlap_ms = 25.0;  // overlap == frame leaves no hop
  CHECK_THROWS_AS(spec.validate(16000), vad::Error);

  spec = {};
  CHECK_THROWS_AS(spec.validate(0), vad::Error);

  spec.frame_ms = 0.01;  // under one sample at 16 kHz
  spec.overlap_ms = 0.0;
  CHECK_THROWS_AS(spec.validate(16000), vad::Error);

  try {
    vad::FrameSpec bad;
    bad.overlap_ms = 30.0;
    bad.validate(16000);
    FAIL("expected validate to throw");
  } catch (const vad::Error& e) {
    CHECK(e.kind() == vad::ErrorKind::InvalidConfig);
  }
}

TEST_CASE("frame count formula on randomized inputs") {
  vad::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int rate = 8000 + 1000 * static_cast<int>(rng.uniform_index(9));
    vad::FrameSpec spec;
    spec.frame_ms = rng.uniform(5.0, 40.0);
    spec.overlap_ms = rng.uniform(0.0, spec.frame_ms * 0.9);
    const std::size_t frame = static_cast<std::size_t>(spec.frame_len(rate));
    const std::size_t hop = static_cast<std::size_t>(spec.hop_len(rate));
    if (frame < 1 || hop < 1) continue;
    const std::size_t n = rng.uniform_index(5 * frame + 1);

    const std::size_t expected =
        n < frame ? 0 : 1 + (n - frame) / hop;
    CHECK(vad::expected_frame_count(n, rate, spec) == expected);

    vad::AudioClip clip;
    clip.sample_rate_hz = rate;
    clip.samples.assign(n, 0.25);
    CHECK(vad::frame_clip(clip, spec).size() == expected);
  }
}

TEST_CASE("frame_clip offsets and contents") {
  vad::AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.resize(1000);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = static_cast<double>(i);

  vad::FrameSpec spec;  // 400-sample frames, 160-sample hop
  const auto frames = vad::frame_clip(clip, spec);
  REQUIRE(frames.size() == 4);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    CHECK(frames[f].clip_index == f);
    CHECK(frames[f].start_sample == f * 160);
    REQUIRE(frames[f].samples.size() == 400);
    CHECK(frames[f].samples.front() == doctest::Approx(static_cast<double>(f * 160)));
    CHECK(frames[f].samples.back() ==
          doctest::Approx(static_cast<double>(f * 160 + 399)));
  }
}

TEST_CASE("clip shorter than one frame yields nothing") {
  vad::AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.assign(399, 0.0);
  CHECK(vad::frame_clip(clip, vad::FrameSpec{}).empty());
}

TEST_CASE("pcm16 wav parses with 1/32768 scaling") {
  const auto clip = parse(wav_bytes(1, 1, 16000, 16,
                                    pcm16_payload({0, 16384, -16384, 32767, -32768})));
  CHECK(clip.sample_rate_hz == 16000);
  REQUIRE(clip.samples.size() == 5);
  CHECK(clip.samples[0] == doctest::Approx(0.0));
  CHECK(clip.samples[1] == doctest::Approx(0.5));
  CHECK(clip.samples[2] == doctest::Approx(-0.5));
  CHECK(clip.samples[3] == doctest::Approx(32767.0 / 32768.0));
  CHECK(clip.samples[4] == doctest::Approx(-1.0));
}

TEST_CASE("stereo input downmixes by per-sample mean") {
  const auto clip = parse(wav_bytes(1, 2, 44100, 16,
                                    pcm16_payload({16384, -16384, 8192, 8192})));
  CHECK(clip.sample_rate_hz == 44100);
  REQUIRE(clip.samples.size() == 2);
  CHECK(clip.samples[0] == doctest::Approx(0.0));
  CHECK(clip.samples[1] == doctest::Approx(0.25));
}

TEST_CASE("float32 wav parses") {
  std::string payload;
  for (float v : {0.0f, 0.5f, -1.0f}) {
    std::uint32_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(payload, bits);
  }
  const auto clip = parse(wav_bytes(3, 1, 8000, 32, payload));
  REQUIRE(clip.samples.size() == 3);
  CHECK(clip.samples[0] == doctest::Approx(0.0));
  CHECK(clip.samples[1] == doctest::Approx(0.5));
  CHECK(clip.samples[2] == doctest::Approx(-1.0));
}

TEST_CASE("wav error paths") {
  try {
    parse("JUNKJUNKJUNKJUNK");
    FAIL("expected MalformedHeader");
  } catch (const vad::Error& e) {
    CHECK(e.kind() == vad::ErrorKind::MalformedHeader);
  }

  try {
    parse(wav_bytes(2, 1, 16000, 16, pcm16_payload({0, 0})));  // ADPCM
    FAIL("expected UnsupportedEncoding");
  } catch (const vad::Error& e) {
    CHECK(e.kind() == vad::ErrorKind::UnsupportedEncoding);
  }

  try {
    vad::load_wav("/nonexistent/path/audio.wav");
    FAIL("expected IoError");
  } catch (const vad::Error& e) {
    CHECK(e.kind() == vad::ErrorKind::IoError);
  }
}

TEST_CASE("wav save and load round-trip") {
  vad::AudioClip clip;
  clip.sample_rate_hz = 16000;
  vad::Rng rng(7);
  for (int i = 0; i < 500; ++i) clip.samples.push_back(rng.uniform(-0.9, 0.9));
  clip.samples.push_back(1.7);   // clamps to +1
  clip.samples.push_back(-1.7);  // clamps to -1

  const auto path = temp_wav("roundtrip");
  vad::save_wav_pcm16(path.string(), clip);
  const auto back = vad::load_wav(path.string());
  std::filesystem::remove(path);

  CHECK(back.sample_rate_hz == 16000);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i + 2 < clip.samples.size(); ++i)
    CHECK(std::fabs(back.samples[i] - clip.samples[i]) <= 1.5 / 32768.0);
  CHECK(back.samples[clip.samples.size() - 2] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[clip.samples.size() - 1] == doctest::Approx(-32767.0 / 32768.0));
}

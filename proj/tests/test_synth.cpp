#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vad/error.hpp"
#include "vad/synth.hpp"
#include "vad/util.hpp"

namespace {

double rms(const std::vector<double>& samples) {
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace

TEST_CASE("corpus layout: speech clips first, then the noise family") {
  vad::SynthSpec spec;
  spec.n_speech = 3;
  spec.n_noise = 5;
  spec.clip_seconds = 0.5;
  spec.seed = 7;
  const auto corpus = vad::generate_corpus(spec);

  REQUIRE(corpus.clips.size() == 8);
  REQUIRE(corpus.labels.size() == 8);
  REQUIRE(corpus.manifest_labels.size() == 8);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(corpus.labels[i] == +1);
    CHECK(corpus.manifest_labels[i] == "speech");
  }
  for (std::size_t i = 3; i < 8; ++i) {
    CHECK(corpus.labels[i] == -1);
    const auto& tag = corpus.manifest_labels[i];
    const bool music_slot = (i - 3) % 4 == 2;
    CHECK(tag == (music_slot ? "music" : "noise"));
  }

  const std::size_t expected_len =
      static_cast<std::size_t>(0.5 * spec.sample_rate_hz);
  for (const auto& clip : corpus.clips) {
    CHECK(clip.sample_rate_hz == spec.sample_rate_hz);
    CHECK(clip.samples.size() == expected_len);
    double peak = 0.0;
    for (double s : clip.samples) peak = std::max(peak, std::fabs(s));
    CHECK(peak <= 0.95 + 1e-12);
    CHECK(rms(clip.samples) > 0.0);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  vad::SynthSpec spec;
  spec.n_speech = 2;
  spec.n_noise = 2;
  spec.clip_seconds = 0.3;
  spec.seed = 99;
  const auto a = vad::generate_corpus(spec);
  const auto b = vad::generate_corpus(spec);
  REQUIRE(a.clips.size() == b.clips.size());
  for (std::size_t i = 0; i < a.clips.size(); ++i)
    CHECK(a.clips[i].samples == b.clips[i].samples);

  auto other = spec;
  other.seed = 100;
  const auto c = vad::generate_corpus(other);
  CHECK(c.clips[0].samples != a.clips[0].samples);
}

TEST_CASE("a clip depends only on the seed and its index") {
  vad::SynthSpec small;
  small.n_speech = 2;
  small.n_noise = 2;
  small.clip_seconds = 0.25;
  small.seed = 5;
  vad::SynthSpec big = small;
  big.n_speech = 2;
  big.n_noise = 6;  // extending the corpus must not disturb earlier clips

  const auto a = vad::generate_corpus(small);
  const auto b = vad::generate_corpus(big);
  for (std::size_t i = 0; i < a.clips.size(); ++i)
    CHECK(a.clips[i].samples == b.clips[i].samples);
}

TEST_CASE("speech clips modulate more than sustained noise") {
  vad::SynthSpec spec;
  spec.n_speech = 4;
  spec.n_noise = 4;
  spec.clip_seconds = 1.5;
  spec.seed = 11;
  const auto corpus = vad::generate_corpus(spec);

  // Frame-level rms spread: pauses and syllables give speech a wide envelope.
  auto envelope_spread = [&](const vad::AudioClip& clip) {
    const std::size_t frame = clip.sample_rate_hz / 50;
    std::vector<double> frames;
    for (std::size_t off = 0; off + frame <= clip.samples.size(); off += frame) {
      double acc = 0.0;
      for (std::size_t k = 0; k < frame; ++k)
        acc += clip.samples[off + k] * clip.samples[off + k];
      frames.push_back(std::sqrt(acc / static_cast<double>(frame)));
    }
    return vad::stddev(frames) / (vad::mean(frames) + 1e-12);
  };

  double speech_spread = 0.0, colored_spread = 0.0;
  for (std::size_t i = 0; i < 4; ++i) speech_spread += envelope_spread(corpus.clips[i]);
  colored_spread = envelope_spread(corpus.clips[4]);  // first noise slot: colored
  CHECK(speech_spread / 4.0 > colored_spread);
}

TEST_CASE("corpus writes clips and a readable manifest") {
  vad::SynthSpec spec;
  spec.n_speech = 2;
  spec.n_noise = 3;
  spec.clip_seconds = 0.2;
  spec.seed = 3;
  const auto corpus = vad::generate_corpus(spec);

  const auto dir = std::filesystem::temp_directory_path() / "vad_test_synth";
  std::filesystem::remove_all(dir);
  const auto manifest_path = dir / "manifest.csv";
  const auto entries =
      vad::write_corpus(corpus, dir.string(), manifest_path.string());

  REQUIRE(entries.size() == 5);
  for (const auto& e : entries) CHECK(std::filesystem::exists(e.path));
  CHECK(entries[0].label == "speech");
  CHECK(entries[4].label == (corpus.manifest_labels[4] == "music" ? "music" : "noise"));

  const auto back = vad::read_manifest(manifest_path.string());
  REQUIRE(back.size() == entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].path == entries[i].path);
    CHECK(back[i].label == entries[i].label);
  }

  // Round-trip one clip through the wav container.
  const auto clip = vad::load_wav(entries[0].path);
  CHECK(clip.sample_rate_hz == spec.sample_rate_hz);
  CHECK(clip.samples.size() == corpus.clips[0].samples.size());
  for (std::size_t k = 0; k < clip.samples.size(); ++k)
    CHECK(std::fabs(clip.samples[k] - corpus.clips[0].samples[k]) <=
          1.5 / 32768.0);

  std::filesystem::remove_all(dir);
}

TEST_CASE("spec validation") {
  vad::SynthSpec spec;
  spec.n_speech = 0;
  spec.n_noise = 0;
  CHECK_THROWS_AS(vad::generate_corpus(spec), vad::Error);

  spec = {};
  spec.clip_seconds = 0.0;
  CHECK_THROWS_AS(vad::generate_corpus(spec), vad::Error);

  spec = {};
  spec.sample_rate_hz = 0;
  CHECK_THROWS_AS(vad::generate_corpus(spec), vad::Error);
}

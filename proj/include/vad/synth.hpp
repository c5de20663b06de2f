#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vad/audio.hpp"
#include "vad/dataset.hpp"

namespace vad {

// Seeded synthetic corpus: "speech" clips are pitch harmonic stacks with
// moving formant envelopes, syllabic amplitude modulation, pauses, and
// fricative bursts over a quiet noise bed; the non-speech side mixes
// stationary colored noise, resonant band noise, sustained tone stacks, and
// multi-voice babble. The classes are statistically separable in MFCC space
// but share enough frame-level structure (pause frames, vowel-like tone
// stacks, speech-like babble) that single classifiers stay short of perfect.
struct SynthSpec {
  std::size_t n_speech = 10;
  std::size_t n_noise = 10;   // split between noise and music style clips
  double clip_seconds = 2.0;
  std::uint32_t sample_rate_hz = 16000;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<AudioClip> clips;
  std::vector<std::int8_t> labels;        // +1 speech, -1 otherwise
  std::vector<std::string> manifest_labels;  // speech | noise | music
};

// Clip i depends only on (seed, i), so corpora are reproducible and
// independent of generation order.
SynthCorpus generate_corpus(const SynthSpec& spec);

// Writes <dir>/speech_NNNN.wav etc. plus a manifest of path,label rows.
// Returns the manifest entries that were written.
std::vector<ManifestEntry> write_corpus(const SynthCorpus& corpus,
                                        const std::string& dir,
                                        const std::string& manifest_path);

}  // namespace vad

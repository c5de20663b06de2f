#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace vad {

// Mono sample buffer, amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 0;
  std::string source_path;
};

// Fixed-duration analysis windows advanced by hop = frame - overlap.
struct FrameSpec {
  double frame_ms = 25.0;
  double overlap_ms = 15.0;

  int frame_len(int sample_rate_hz) const;
  int hop_len(int sample_rate_hz) const;
  void validate(int sample_rate_hz) const;
};

struct Frame {
  std::vector<double> samples;
  std::size_t clip_index = 0;   // ordinal within the clip
  std::size_t start_sample = 0; // offset into the clip
};

// Decodes a RIFF/WAVE file. Accepts PCM 16-bit (format code 1) and IEEE
// float 32-bit (format code 3); multi-channel input is downmixed to mono
// by per-sample mean. 16-bit samples are scaled by 1/32768.
AudioClip load_wav(const std::string& path);
AudioClip load_wav(std::istream& in, const std::string& name);

// Writes mono PCM 16-bit. Samples are clamped to [-1, 1] before scaling.
void save_wav_pcm16(const std::string& path, const AudioClip& clip);

std::size_t expected_frame_count(std::size_t n_samples, int sample_rate_hz,
                                 const FrameSpec& spec);

// Cuts the clip into frames; trailing samples that do not fill a frame are
// dropped. A clip shorter than one frame yields an empty sequence.
std::vector<Frame> frame_clip(const AudioClip& clip, const FrameSpec& spec);

}  // namespace vad

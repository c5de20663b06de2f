#include "vad/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "vad/error.hpp"

namespace vad {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

}  // namespace

int FrameSpec::frame_len(int sample_rate_hz) const {
  return static_cast<int>(std::floor(frame_ms * sample_rate_hz / 1000.0));
}

int FrameSpec::hop_len(int sample_rate_hz) const {
  return static_cast<int>(
      std::floor((frame_ms - overlap_ms) * sample_rate_hz / 1000.0));
}

void FrameSpec::validate(int sample_rate_hz) const {
  if (overlap_ms < 0.0 || overlap_ms >= frame_ms)
    fail(ErrorKind::InvalidConfig, "overlap must satisfy 0 <= overlap < frame");
  if (sample_rate_hz <= 0)
    fail(ErrorKind::InvalidConfig, "sample rate must be positive");
  if (frame_len(sample_rate_hz) < 1)
    fail(ErrorKind::InvalidConfig, "frame shorter than one sample");
  if (hop_len(sample_rate_hz) < 1)
    fail(ErrorKind::InvalidConfig, "hop shorter than one sample");
}

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  return load_wav(in, path);
}

AudioClip load_wav(std::istream& in, const std::string& name) {
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0)
    fail(ErrorKind::MalformedHeader, name + " is not a RIFF/WAVE file");

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* id = p + pos;
    std::uint32_t chunk_len = read_u32(p + pos + 4);
    pos += 8;
    if (pos + chunk_len > size) {
      fail(ErrorKind::MalformedHeader,
           name + ": chunk length exceeds file size");
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_len < 16)
        fail(ErrorKind::MalformedHeader, name + ": fmt chunk too short");
      fmt.format = read_u16(p + pos);
      fmt.channels = read_u16(p + pos + 2);
      fmt.sample_rate = read_u32(p + pos + 4);
      fmt.bits_per_sample = read_u16(p + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + pos;
      data_len = chunk_len;
    }
    pos += chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    fail(ErrorKind::MalformedHeader, name + ": missing fmt or data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0)
    fail(ErrorKind::MalformedHeader, name + ": bad fmt chunk");

  std::size_t bytes_per_sample;
  if (fmt.format == kFormatPcm && fmt.bits_per_sample == 16) {
    bytes_per_sample = 2;
  } else if (fmt.format == kFormatIeeeFloat && fmt.bits_per_sample == 32) {
    bytes_per_sample = 4;
  } else {
    fail(ErrorKind::UnsupportedEncoding,
         name + ": only PCM16 and float32 are supported (format " +
             std::to_string(fmt.format) + ", " +
             std::to_string(fmt.bits_per_sample) + " bits)");
  }

  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t n_frames = data_len / frame_bytes;

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  clip.source_path = name;
  clip.samples.resize(n_frames);

  const double inv_channels = 1.0 / fmt.channels;
  for (std::size_t i = 0; i < n_frames; ++i) {
    const unsigned char* fp = data + i * frame_bytes;
    double acc = 0.0;
    for (unsigned c = 0; c < fmt.channels; ++c) {
      if (fmt.format == kFormatPcm) {
        std::int16_t s = static_cast<std::int16_t>(
            read_u16(fp + c * bytes_per_sample));
        acc += s / 32768.0;
      } else {
        float f;
        std::memcpy(&f, fp + c * bytes_per_sample, 4);
        acc += std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
    }
    clip.samples[i] = acc * inv_channels;
  }
  return clip;
}

void save_wav_pcm16(const std::string& path, const AudioClip& clip) {
  if (clip.sample_rate_hz <= 0)
    fail(ErrorKind::InvalidConfig, "sample rate must be positive");
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_len = n * 2;

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_len);
  for (double x : clip.samples) {
    double v = std::clamp(x, -1.0, 1.0);
    auto s = static_cast<std::int16_t>(std::lrint(v * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorKind::IoError, "short write to " + path);
}

std::size_t expected_frame_count(std::size_t n_samples, int sample_rate_hz,
                                 const FrameSpec& spec) {
  const std::size_t frame_len =
      static_cast<std::size_t>(spec.frame_len(sample_rate_hz));
  const std::size_t hop = static_cast<std::size_t>(spec.hop_len(sample_rate_hz));
  if (n_samples < frame_len) return 0;
  return (n_samples - frame_len) / hop + 1;
}

std::vector<Frame> frame_clip(const AudioClip& clip, const FrameSpec& spec) {
  spec.validate(clip.sample_rate_hz);
  const std::size_t frame_len =
      static_cast<std::size_t>(spec.frame_len(clip.sample_rate_hz));
  const std::size_t hop =
      static_cast<std::size_t>(spec.hop_len(clip.sample_rate_hz));
  const std::size_t count =
      expected_frame_count(clip.samples.size(), clip.sample_rate_hz, spec);

  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Frame f;
    f.clip_index = i;
    f.start_sample = i * hop;
    f.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(f.start_sample),
                     clip.samples.begin() +
                         static_cast<std::ptrdiff_t>(f.start_sample + frame_len));
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace vad

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vad/audio.hpp"
#include "vad/mfcc.hpp"

namespace vad {

constexpr int kSpeechLabel = +1;
constexpr int kNonSpeechLabel = -1;

// Energy gate on the first cepstral coefficient.
struct GateConfig {
  double energy_threshold = 0.0;
};

// True iff coeffs[0] < threshold; a frame exactly at the threshold passes.
bool is_silent(std::span<const double> fv, const GateConfig& gate);

struct RowProvenance {
  std::uint32_t clip_id = 0;
  std::uint32_t frame_index = 0;
};

// Flat row-major feature matrix with parallel labels in {+1, -1}.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::int8_t> labels;
  std::vector<RowProvenance> provenance;  // may be empty

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }

  void push_row(std::span<const double> row, std::int8_t label,
                RowProvenance prov = {});

  bool has_both_classes() const;
  std::size_t count_label(std::int8_t label) const;
};

struct ManifestEntry {
  std::string path;
  std::string label;  // speech | music | noise
};

// CSV manifest, one `path,label` row per file.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries);

// +1 for speech, -1 for music/noise.
std::int8_t class_label(const std::string& manifest_label);

struct ExtractOptions {
  FrameSpec frame;
  MfccConfig mfcc;
  GateConfig gate;
  bool drop_silent = true;      // drop gated speech frames (training mode)
  bool auto_threshold = true;   // 5th percentile of speech coeffs[0]
  int jobs = 1;
};

struct ExtractResult {
  Dataset data;
  double gate_threshold = 0.0;
  std::size_t n_speech = 0;
  std::size_t n_nonspeech = 0;
  std::size_t n_dropped_silent = 0;
  std::vector<std::string> clip_paths;  // indexed by clip_id
};

// Frames and featurizes in-memory clips; rows are emitted in clip order.
ExtractResult extract_clips(const std::vector<AudioClip>& clips,
                            const std::vector<std::int8_t>& labels,
                            const ExtractOptions& opts);

// Loads every manifest entry and delegates to extract_clips. I/O errors are
// annotated with the offending path.
ExtractResult extract_dataset(const std::vector<ManifestEntry>& manifest,
                              const ExtractOptions& opts);

// Binary feature file. Layout (little-endian):
//   "VADF" | u32 version | u32 rows | u32 dim
//   rows * (dim f32 coeffs, i8 label, u32 clip id, u32 frame index)
//   u32 meta length | meta JSON (gate threshold, seed, config echo, paths)
struct FeatureFileMeta {
  double gate_threshold = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config_echo;
  std::vector<std::string> clip_paths;
};

struct FeatureFile {
  Dataset data;
  FeatureFileMeta meta;
};

void write_vadf(const std::string& path, const Dataset& data,
                const FeatureFileMeta& meta);
FeatureFile read_vadf(const std::string& path);

}  // namespace vad

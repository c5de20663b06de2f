#include "vad/dataset.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "vad/error.hpp"
#include "vad/util.hpp"

namespace vad {

namespace {

constexpr char kMagic[4] = {'V', 'A', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_le(out, bits);
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = get_le<std::uint32_t>(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool is_silent(std::span<const double> fv, const GateConfig& gate) {
  if (fv.empty()) fail(ErrorKind::DimensionMismatch, "empty feature vector");
  return fv[0] < gate.energy_threshold;
}

void Dataset::push_row(std::span<const double> row, std::int8_t label,
                       RowProvenance prov) {
  if (dim == 0) dim = row.size();
  if (row.size() != dim)
    fail(ErrorKind::DimensionMismatch, "row width does not match dataset");
  if (label != kSpeechLabel && label != kNonSpeechLabel)
    fail(ErrorKind::BadValue, "labels must be +1 or -1");
  values.insert(values.end(), row.begin(), row.end());
  labels.push_back(label);
  provenance.push_back(prov);
}

bool Dataset::has_both_classes() const {
  bool pos = false, neg = false;
  for (auto l : labels) {
    if (l > 0) pos = true; else neg = true;
    if (pos && neg) return true;
  }
  return false;
}

std::size_t Dataset::count_label(std::int8_t label) const {
  std::size_t n = 0;
  for (auto l : labels)
    if (l == label) ++n;
  return n;
}

std::int8_t class_label(const std::string& manifest_label) {
  if (manifest_label == "speech") return kSpeechLabel;
  if (manifest_label == "music" || manifest_label == "noise")
    return kNonSpeechLabel;
  fail(ErrorKind::BadValue, "unknown class label '" + manifest_label +
                                "' (expected speech|music|noise)");
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open manifest " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t comma = t.find_last_of(',');
    if (comma == std::string::npos)
      fail(ErrorKind::BadValue,
           path + ":" + std::to_string(line_no) + ": expected `path,label`");
    ManifestEntry e;
    e.path = trim(t.substr(0, comma));
    e.label = trim(t.substr(comma + 1));
    class_label(e.label);  // validate
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write manifest " + path);
  for (const auto& e : entries) out << e.path << "," << e.label << "\n";
}

ExtractResult extract_clips(const std::vector<AudioClip>& clips,
                            const std::vector<std::int8_t>& labels,
                            const ExtractOptions& opts) {
  if (clips.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "clips and labels differ in length");

  struct ClipRows {
    std::vector<FeatureRow> rows;
  };
  std::vector<ClipRows> per_clip(clips.size());

  parallel_for(clips.size(), opts.jobs, [&](std::size_t c) {
    const AudioClip& clip = clips[c];
    auto frames = frame_clip(clip, opts.frame);
    if (frames.empty()) return;
    MfccExtractor ex(clip.sample_rate_hz,
                     static_cast<int>(frames[0].samples.size()), opts.mfcc);
    per_clip[c].rows.reserve(frames.size());
    for (const auto& f : frames) per_clip[c].rows.push_back(ex.compute(f.samples));
  });

  ExtractResult result;
  result.clip_paths.reserve(clips.size());
  for (const auto& clip : clips) result.clip_paths.push_back(clip.source_path);

  GateConfig gate = opts.gate;
  if (opts.auto_threshold) {
    std::vector<double> speech_c0;
    for (std::size_t c = 0; c < clips.size(); ++c) {
      if (labels[c] != kSpeechLabel) continue;
      for (const auto& row : per_clip[c].rows) speech_c0.push_back(row[0]);
    }
    // 5th percentile of speech-frame log-mel energy; with no speech frames
    // the gate is disabled.
    gate.energy_threshold =
        speech_c0.empty() ? -1e30 : percentile(std::move(speech_c0), 0.05);
  }
  result.gate_threshold = gate.energy_threshold;

  for (std::size_t c = 0; c < clips.size(); ++c) {
    const std::int8_t label = labels[c];
    const auto& rows = per_clip[c].rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (label == kSpeechLabel && opts.drop_silent && is_silent(rows[i], gate)) {
        ++result.n_dropped_silent;
        continue;
      }
      result.data.push_row(rows[i], label,
                           {static_cast<std::uint32_t>(c),
                            static_cast<std::uint32_t>(i)});
      if (label == kSpeechLabel) ++result.n_speech; else ++result.n_nonspeech;
    }
  }
  return result;
}

ExtractResult extract_dataset(const std::vector<ManifestEntry>& manifest,
                              const ExtractOptions& opts) {
  std::vector<AudioClip> clips(manifest.size());
  std::vector<std::int8_t> labels(manifest.size());
  parallel_for(manifest.size(), opts.jobs, [&](std::size_t i) {
    labels[i] = class_label(manifest[i].label);
    try {
      clips[i] = load_wav(manifest[i].path);
    } catch (const Error& e) {
      throw Error(e.kind(), manifest[i].path + ": " + e.what());
    }
  });
  ExtractOptions inner = opts;
  inner.jobs = opts.jobs;
  ExtractResult result = extract_clips(clips, labels, inner);
  for (std::size_t i = 0; i < manifest.size(); ++i)
    result.clip_paths[i] = manifest[i].path;
  return result;
}

void write_vadf(const std::string& path, const Dataset& data,
                const FeatureFileMeta& meta) {
  std::string out;
  out.append(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.dim));

  const bool has_prov = data.provenance.size() == data.rows();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto row = data.row(i);
    for (double v : row) put_f32(out, static_cast<float>(v));
    out.push_back(static_cast<char>(data.labels[i]));
    RowProvenance p = has_prov ? data.provenance[i] : RowProvenance{};
    put_le<std::uint32_t>(out, p.clip_id);
    put_le<std::uint32_t>(out, p.frame_index);
  }

  nlohmann::json j;
  j["gate_threshold"] = meta.gate_threshold;
  j["seed"] = meta.seed;
  j["config"] = meta.config_echo;
  j["clip_paths"] = meta.clip_paths;
  const std::string meta_str = j.dump();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta_str.size()));
  out.append(meta_str);

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorKind::IoError, "short write to " + path);
}

FeatureFile read_vadf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 16 || std::memcmp(p, kMagic, 4) != 0)
    fail(ErrorKind::MalformedHeader, path + " is not a feature file");
  const std::uint32_t version = get_le<std::uint32_t>(p + 4);
  if (version != kVersion)
    fail(ErrorKind::MalformedHeader,
         path + ": unsupported version " + std::to_string(version));
  const std::uint32_t rows = get_le<std::uint32_t>(p + 8);
  const std::uint32_t dim = get_le<std::uint32_t>(p + 12);

  const std::size_t row_bytes = 4ull * dim + 1 + 8;
  std::size_t pos = 16;
  if (pos + row_bytes * rows > size)
    fail(ErrorKind::MalformedHeader, path + ": truncated feature rows");

  FeatureFile file;
  file.data.dim = dim;
  file.data.values.reserve(static_cast<std::size_t>(rows) * dim);
  file.data.labels.reserve(rows);
  file.data.provenance.reserve(rows);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t d = 0; d < dim; ++d) {
      file.data.values.push_back(get_f32(p + pos));
      pos += 4;
    }
    file.data.labels.push_back(static_cast<std::int8_t>(p[pos]));
    pos += 1;
    RowProvenance prov;
    prov.clip_id = get_le<std::uint32_t>(p + pos);
    pos += 4;
    prov.frame_index = get_le<std::uint32_t>(p + pos);
    pos += 4;
    file.data.provenance.push_back(prov);
  }

  if (pos + 4 <= size) {
    const std::uint32_t meta_len = get_le<std::uint32_t>(p + pos);
    pos += 4;
    if (pos + meta_len > size)
      fail(ErrorKind::MalformedHeader, path + ": truncated metadata");
    auto j = nlohmann::json::parse(bytes.substr(pos, meta_len), nullptr, false);
    if (!j.is_discarded()) {
      file.meta.gate_threshold = j.value("gate_threshold", 0.0);
      file.meta.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("config")) file.meta.config_echo = j["config"];
      if (j.contains("clip_paths"))
        file.meta.clip_paths = j["clip_paths"].get<std::vector<std::string>>();
    }
  }
  return file;
}

}  // namespace vad

#include "vad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>

#include "vad/error.hpp"
#include "vad/util.hpp"

namespace vad {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Hardness knobs, tuned so single classifiers stay short of perfect while a
// stacked ensemble clears 80% comfortably. The quiet end of the colored-noise
// range deliberately overlaps the speech noise bed, and the band-noise family
// shares the low formant region, so a slice of frames is genuinely ambiguous.
constexpr double kPauseProb = 0.35;        // speech pauses leave only the bed
constexpr double kFricativeProb = 0.25;    // unvoiced syllables
constexpr double kBedRmsLow = 0.012;       // noise bed inside speech clips
constexpr double kBedRmsHigh = 0.055;
constexpr double kColoredRmsLow = 0.030;   // overlaps the bed's loud end
constexpr double kColoredRmsHigh = 0.150;
constexpr double kBandRmsLow = 0.050;
constexpr double kBandRmsHigh = 0.220;
constexpr double kBandFcLow = 500.0;       // below the fricative band
constexpr double kBandFcHigh = 1500.0;
constexpr double kToneRmsLow = 0.100;      // loud enough to clear the gate
constexpr double kToneRmsHigh = 0.280;
constexpr double kFricFcLow = 3000.0;
constexpr double kFricFcHigh = 7000.0;
constexpr double kBabbleRmsLow = 0.040;    // sits inside the syllable amp range
constexpr double kBabbleRmsHigh = 0.160;
constexpr double kBabbleAmRateLow = 1.5;   // voices wax and wane syllabically
constexpr double kBabbleAmRateHigh = 4.0;

double rms(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

void scale_to_rms(std::vector<double>& v, double target) {
  const double r = rms(v);
  if (r <= 0.0) return;
  const double g = target / r;
  for (double& x : v) x *= g;
}

void clamp_peak(std::vector<double>& v, double peak) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m > peak) {
    const double g = peak / m;
    for (double& x : v) x *= g;
  }
}

// Gentle log-symmetric level drift so a noise clip's frames span a loudness
// range instead of collapsing onto one point in feature space.
void slow_drift(Rng& rng, std::vector<double>& v, double fs) {
  const double depth = rng.uniform(0.3, 0.6);
  const double rate = rng.uniform(0.15, 0.5);
  const double phase = rng.uniform(0.0, kTwoPi);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] *= std::exp(depth *
                     std::sin(kTwoPi * rate * static_cast<double>(i) / fs + phase));
}

std::vector<double> white_noise(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// y[i] = (1-a) x[i] + a y[i-1]; a near 1 concentrates energy at low
// frequencies.
void one_pole_lowpass(std::vector<double>& v, double a) {
  double y = 0.0;
  for (double& x : v) {
    y = (1.0 - a) * x + a * y;
    x = y;
  }
}

// Constant-peak-gain resonator (b0 = alpha, b2 = -alpha).
void bandpass(std::vector<double>& v, double fc, double q, double fs) {
  const double w0 = kTwoPi * fc / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0;
  const double b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0;
  const double a2 = (1.0 - alpha) / a0;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& x : v) {
    const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    x = y;
  }
}

// Raised-cosine attack / sustain / release.
double envelope(std::size_t s, std::size_t len) {
  const double att = 0.2 * static_cast<double>(len);
  const double rel = 0.3 * static_cast<double>(len);
  const double t = static_cast<double>(s);
  if (t < att) return 0.5 * (1.0 - std::cos(std::numbers::pi * t / att));
  const double tail = static_cast<double>(len) - t;
  if (tail < rel) return 0.5 * (1.0 - std::cos(std::numbers::pi * tail / rel));
  return 1.0;
}

// Three Lorentzian formant bumps plus a gentle spectral tilt.
double formant_gain(double f, const double* centers, const double* widths) {
  static constexpr double kWeights[3] = {1.0, 0.7, 0.35};
  double g = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double d = (f - centers[j]) / widths[j];
    g += kWeights[j] / (1.0 + d * d);
  }
  return g;
}

std::vector<double> synth_speech(Rng& rng, std::size_t n, double fs) {
  std::vector<double> out(n, 0.0);

  const double f0 = rng.uniform(95.0, 260.0);
  std::size_t t = rng.uniform_index(static_cast<std::size_t>(fs / 20.0) + 1);
  while (t < n) {
    if (rng.uniform() < kPauseProb) {
      t += static_cast<std::size_t>(rng.uniform(0.06, 0.20) * fs);
      if (t >= n) break;
    }
    std::size_t syl = static_cast<std::size_t>(rng.uniform(0.12, 0.30) * fs);
    syl = std::min(syl, n - t);
    if (syl < 16) break;
    const double amp = rng.uniform(0.15, 0.45);

    if (rng.uniform() >= kFricativeProb) {
      // Voiced: harmonic stack under a per-syllable formant envelope.
      const double centers[3] = {rng.uniform(280.0, 800.0),
                                 rng.uniform(900.0, 2300.0),
                                 rng.uniform(2400.0, 3400.0)};
      const double widths[3] = {90.0, 130.0, 180.0};
      const double vib_rate = rng.uniform(4.0, 6.5);
      const double vib_depth = rng.uniform(0.005, 0.02);
      const double vib_phase = rng.uniform(0.0, kTwoPi);

      const int n_harm = std::max(1, static_cast<int>(4000.0 / f0));
      std::vector<double> gain(n_harm), phase(n_harm);
      double norm = 0.0;
      for (int k = 0; k < n_harm; ++k) {
        const double f = f0 * (k + 1);
        gain[k] = formant_gain(f, centers, widths) /
                  std::pow(static_cast<double>(k + 1), 0.7);
        phase[k] = rng.uniform(0.0, kTwoPi);
        norm += gain[k];
      }
      double theta = 0.0;
      for (std::size_t s = 0; s < syl; ++s) {
        const double sec = static_cast<double>(s) / fs;
        const double f0_t =
            f0 * (1.0 + vib_depth * std::sin(kTwoPi * vib_rate * sec + vib_phase));
        theta += kTwoPi * f0_t / fs;
        double sample = 0.0;
        for (int k = 0; k < n_harm; ++k)
          sample += gain[k] * std::sin((k + 1) * theta + phase[k]);
        out[t + s] += envelope(s, syl) * amp * sample / norm;
      }
    } else {
      // Unvoiced burst: resonant high-band noise.
      std::vector<double> burst = white_noise(rng, syl);
      bandpass(burst, rng.uniform(kFricFcLow, kFricFcHigh), rng.uniform(1.5, 4.0), fs);
      scale_to_rms(burst, 1.0);
      for (std::size_t s = 0; s < syl; ++s)
        out[t + s] += envelope(s, syl) * amp * 0.35 * burst[s];
    }
    t += syl + static_cast<std::size_t>(rng.uniform(0.02, 0.08) * fs);
  }

  // Noise bed across the whole clip; pause frames keep only this.
  std::vector<double> bed = white_noise(rng, n);
  one_pole_lowpass(bed, rng.uniform(0.7, 0.85));
  scale_to_rms(bed, std::exp(rng.uniform(std::log(kBedRmsLow), std::log(kBedRmsHigh))));
  for (std::size_t i = 0; i < n; ++i) out[i] += bed[i];
  clamp_peak(out, 0.95);
  return out;
}

std::vector<double> synth_colored_noise(Rng& rng, std::size_t n, double fs) {
  std::vector<double> v = white_noise(rng, n);
  one_pole_lowpass(v, rng.uniform(0.65, 0.85));
  scale_to_rms(v, std::exp(rng.uniform(std::log(kColoredRmsLow), std::log(kColoredRmsHigh))));
  slow_drift(rng, v, fs);
  clamp_peak(v, 0.95);
  return v;
}

std::vector<double> synth_band_noise(Rng& rng, std::size_t n, double fs) {
  std::vector<double> v = white_noise(rng, n);
  const double fc = std::exp(rng.uniform(std::log(kBandFcLow), std::log(kBandFcHigh)));
  bandpass(v, fc, rng.uniform(3.0, 7.0), fs);
  scale_to_rms(v, std::exp(rng.uniform(std::log(kBandRmsLow), std::log(kBandRmsHigh))));
  slow_drift(rng, v, fs);
  clamp_peak(v, 0.95);
  return v;
}

std::vector<double> synth_tone_stack(Rng& rng, std::size_t n, double fs) {
  std::vector<double> out(n, 0.0);
  const double root = rng.uniform(150.0, 400.0);
  const int n_tones = 4 + static_cast<int>(rng.uniform_index(5));
  const double tilt = rng.uniform(0.3, 1.0);
  const double am_depth = rng.uniform(0.05, 0.30);
  const double am_rate = rng.uniform(0.3, 1.5);
  const double am_phase = rng.uniform(0.0, kTwoPi);
  double norm = 0.0;
  for (int k = 0; k < n_tones; ++k) {
    double f = root * (k + 1) * (1.0 + rng.uniform(-0.008, 0.008));
    if (f > 0.45 * fs) break;
    const double g = 1.0 / std::pow(static_cast<double>(k + 1), tilt);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double w = kTwoPi * f / fs;
    for (std::size_t i = 0; i < n; ++i)
      out[i] += g * std::sin(w * static_cast<double>(i) + phase);
    norm += g;
  }
  std::vector<double> bed = white_noise(rng, n);
  scale_to_rms(bed, std::exp(rng.uniform(std::log(0.015), std::log(0.040))));
  for (std::size_t i = 0; i < n; ++i) {
    const double am =
        1.0 - am_depth * 0.5 *
                  (1.0 + std::sin(kTwoPi * am_rate * static_cast<double>(i) / fs +
                                  am_phase));
    out[i] = out[i] / norm * am + bed[i];
  }
  scale_to_rms(out, rng.uniform(kToneRmsLow, kToneRmsHigh));
  clamp_peak(out, 0.95);
  return out;
}

// Several simultaneous voices; no shared pauses, so every frame stays active.
std::vector<double> synth_babble(Rng& rng, std::size_t n, double fs) {
  std::vector<double> out(n, 0.0);
  const int n_voices = 4 + static_cast<int>(rng.uniform_index(4));
  for (int v = 0; v < n_voices; ++v) {
    const double f0 = rng.uniform(90.0, 280.0);
    const double centers[3] = {rng.uniform(280.0, 800.0),
                               rng.uniform(900.0, 2300.0),
                               rng.uniform(2400.0, 3400.0)};
    const double widths[3] = {90.0, 130.0, 180.0};
    const double vib_rate = rng.uniform(3.0, 7.0);
    const double vib_depth = rng.uniform(0.005, 0.03);
    const double vib_phase = rng.uniform(0.0, kTwoPi);
    const double am_rate = rng.uniform(kBabbleAmRateLow, kBabbleAmRateHigh);
    const double am_phase = rng.uniform(0.0, kTwoPi);
    const double am_depth = rng.uniform(0.5, 0.9);

    const int n_harm = std::max(1, static_cast<int>(4000.0 / f0));
    std::vector<double> gain(n_harm), phase(n_harm);
    double norm = 0.0;
    for (int k = 0; k < n_harm; ++k) {
      const double f = f0 * (k + 1);
      gain[k] = formant_gain(f, centers, widths) /
                std::pow(static_cast<double>(k + 1), 0.7);
      phase[k] = rng.uniform(0.0, kTwoPi);
      norm += gain[k];
    }
    double theta = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double sec = static_cast<double>(s) / fs;
      const double f0_t =
          f0 * (1.0 + vib_depth * std::sin(kTwoPi * vib_rate * sec + vib_phase));
      theta += kTwoPi * f0_t / fs;
      double sample = 0.0;
      for (int k = 0; k < n_harm; ++k)
        sample += gain[k] * std::sin((k + 1) * theta + phase[k]);
      const double am =
          1.0 - am_depth * 0.5 * (1.0 + std::sin(kTwoPi * am_rate * sec + am_phase));
      out[s] += am * sample / norm;
    }
  }
  scale_to_rms(out, std::exp(rng.uniform(std::log(kBabbleRmsLow), std::log(kBabbleRmsHigh))));
  slow_drift(rng, out, fs);
  clamp_peak(out, 0.95);
  return out;
}

}  // namespace

SynthCorpus generate_corpus(const SynthSpec& spec) {
  if (spec.clip_seconds <= 0.0)
    fail(ErrorKind::InvalidConfig, "clip length must be positive");
  if (spec.sample_rate_hz == 0)
    fail(ErrorKind::InvalidConfig, "sample rate must be positive");
  if (spec.n_speech + spec.n_noise == 0)
    fail(ErrorKind::InvalidConfig, "corpus must contain at least one clip");

  const double fs = static_cast<double>(spec.sample_rate_hz);
  const std::size_t n =
      static_cast<std::size_t>(spec.clip_seconds * fs);

  SynthCorpus corpus;
  for (std::size_t i = 0; i < spec.n_speech; ++i) {
    Rng rng(derive_seed(spec.seed, i, 1));
    AudioClip clip;
    clip.sample_rate_hz = spec.sample_rate_hz;
    clip.samples = synth_speech(rng, n, fs);
    corpus.clips.push_back(std::move(clip));
    corpus.labels.push_back(kSpeechLabel);
    corpus.manifest_labels.push_back("speech");
  }
  for (std::size_t i = 0; i < spec.n_noise; ++i) {
    Rng rng(derive_seed(spec.seed, i, 2));
    AudioClip clip;
    clip.sample_rate_hz = spec.sample_rate_hz;
    switch (i % 4) {
      case 0:
        clip.samples = synth_colored_noise(rng, n, fs);
        corpus.manifest_labels.push_back("noise");
        break;
      case 1:
        clip.samples = synth_band_noise(rng, n, fs);
        corpus.manifest_labels.push_back("noise");
        break;
      case 2:
        clip.samples = synth_tone_stack(rng, n, fs);
        corpus.manifest_labels.push_back("music");
        break;
      default:
        clip.samples = synth_babble(rng, n, fs);
        corpus.manifest_labels.push_back("noise");
        break;
    }
    corpus.clips.push_back(std::move(clip));
    corpus.labels.push_back(kNonSpeechLabel);
  }
  return corpus;
}

std::vector<ManifestEntry> write_corpus(const SynthCorpus& corpus,
                                        const std::string& dir,
                                        const std::string& manifest_path) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create directory " + dir);

  std::vector<ManifestEntry> entries;
  std::map<std::string, std::size_t> counter;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04zu.wav",
                  corpus.manifest_labels[i].c_str(),
                  counter[corpus.manifest_labels[i]]++);
    const std::string path = dir + "/" + name;
    save_wav_pcm16(path, corpus.clips[i]);
    entries.push_back({path, corpus.manifest_labels[i]});
  }
  write_manifest(manifest_path, entries);
  return entries;
}

}  // namespace vad

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "vad/audio.hpp"

namespace vad {

using FeatureRow = std::vector<double>;

struct MfccConfig {
  int n_coeffs = 13;
  int n_filters = 26;
  int fft_size = 0;          // 0 = smallest power of two >= frame length
  double preemphasis = 0.97;
  double mel_low_hz = 0.0;
  double mel_high_hz = 0.0;  // 0 = Nyquist
  double log_floor = 1e-10;  // added to filter energies before log
};

namespace dsp {

// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& buf);

// Symmetric Hamming window of length n.
std::vector<double> hamming_window(std::size_t n);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank, n_filters x (fft_size/2 + 1). Filter centers
// are uniformly spaced on the mel scale between low_hz and high_hz and the
// triangles are evaluated at the bin frequencies.
std::vector<std::vector<double>> mel_filterbank(int n_filters, int fft_size,
                                                int sample_rate_hz,
                                                double low_hz, double high_hz);

// Orthonormal DCT-II matrix, n_out x n_in.
std::vector<std::vector<double>> dct2_matrix(int n_out, int n_in);

}  // namespace dsp

// Precomputes window, filterbank and DCT for a fixed frame length / rate.
class MfccExtractor {
 public:
  MfccExtractor(int sample_rate_hz, int frame_len, const MfccConfig& cfg);

  FeatureRow compute(std::span<const double> frame) const;

  int fft_size() const { return fft_size_; }
  const MfccConfig& config() const { return cfg_; }

 private:
  MfccConfig cfg_;
  int frame_len_;
  int fft_size_;
  std::vector<double> window_;
  std::vector<std::vector<double>> filterbank_;
  std::vector<std::vector<double>> dct_;
};

// One-shot convenience wrapper around MfccExtractor.
FeatureRow mfcc(const Frame& frame, int sample_rate_hz, const MfccConfig& cfg);

}  // namespace vad

#include "vad/mfcc.hpp"

#include <cmath>

#include "vad/error.hpp"

namespace vad {

namespace dsp {

void fft(std::vector<std::complex<double>>& buf) {
  const std::size_t n = buf.size();
  if (n == 0 || (n & (n - 1)) != 0)
    fail(ErrorKind::InvalidConfig, "fft size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = buf[i + k];
        std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<std::vector<double>> mel_filterbank(int n_filters, int fft_size,
                                                int sample_rate_hz,
                                                double low_hz, double high_hz) {
  const int n_bins = fft_size / 2 + 1;
  const double mel_low = hz_to_mel(low_hz);
  const double mel_high = hz_to_mel(high_hz);

  // n_filters + 2 edge points, uniform on the mel scale
  std::vector<double> edges_hz(static_cast<std::size_t>(n_filters) + 2);
  for (int i = 0; i < n_filters + 2; ++i) {
    double mel = mel_low + (mel_high - mel_low) * i / (n_filters + 1);
    edges_hz[static_cast<std::size_t>(i)] = mel_to_hz(mel);
  }

  std::vector<std::vector<double>> fb(
      static_cast<std::size_t>(n_filters),
      std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
  const double bin_hz = static_cast<double>(sample_rate_hz) / fft_size;
  for (int m = 0; m < n_filters; ++m) {
    const double left = edges_hz[static_cast<std::size_t>(m)];
    const double center = edges_hz[static_cast<std::size_t>(m) + 1];
    const double right = edges_hz[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f < center) {
        w = (f - left) / (center - left);
      } else if (f == center) {
        w = 1.0;
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] = w;
    }
  }
  return fb;
}

std::vector<std::vector<double>> dct2_matrix(int n_out, int n_in) {
  std::vector<std::vector<double>> d(
      static_cast<std::size_t>(n_out),
      std::vector<double>(static_cast<std::size_t>(n_in), 0.0));
  const double norm0 = std::sqrt(1.0 / n_in);
  const double norm = std::sqrt(2.0 / n_in);
  for (int k = 0; k < n_out; ++k) {
    for (int n = 0; n < n_in; ++n) {
      const double c =
          std::cos(M_PI * k * (2.0 * n + 1.0) / (2.0 * static_cast<double>(n_in)));
      d[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] =
          (k == 0 ? norm0 : norm) * c;
    }
  }
  return d;
}

}  // namespace dsp

namespace {

int smallest_pow2_at_least(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

MfccExtractor::MfccExtractor(int sample_rate_hz, int frame_len,
                             const MfccConfig& cfg)
    : cfg_(cfg), frame_len_(frame_len) {
  if (frame_len < 1)
    fail(ErrorKind::InvalidConfig, "frame length must be >= 1");
  if (cfg.n_coeffs < 1 || cfg.n_coeffs > cfg.n_filters)
    fail(ErrorKind::InvalidConfig, "need 1 <= n_coeffs <= n_filters");
  if (cfg.preemphasis < 0.0 || cfg.preemphasis >= 1.0)
    fail(ErrorKind::InvalidConfig, "preemphasis must be in [0, 1)");
  if (cfg.log_floor <= 0.0)
    fail(ErrorKind::InvalidConfig, "log floor must be positive");

  fft_size_ = cfg.fft_size > 0 ? cfg.fft_size : smallest_pow2_at_least(frame_len);
  if (fft_size_ < frame_len)
    fail(ErrorKind::InvalidConfig, "fft size smaller than frame length");
  if ((fft_size_ & (fft_size_ - 1)) != 0)
    fail(ErrorKind::InvalidConfig, "fft size must be a power of two");

  const double nyquist = sample_rate_hz / 2.0;
  const double high = cfg.mel_high_hz > 0.0 ? cfg.mel_high_hz : nyquist;
  if (!(cfg.mel_low_hz < high && high <= nyquist))
    fail(ErrorKind::InvalidConfig, "need mel_low < mel_high <= Nyquist");

  window_ = dsp::hamming_window(static_cast<std::size_t>(frame_len));
  filterbank_ = dsp::mel_filterbank(cfg.n_filters, fft_size_, sample_rate_hz,
                                    cfg.mel_low_hz, high);
  dct_ = dsp::dct2_matrix(cfg.n_coeffs, cfg.n_filters);
}

FeatureRow MfccExtractor::compute(std::span<const double> frame) const {
  if (static_cast<int>(frame.size()) != frame_len_)
    fail(ErrorKind::DimensionMismatch, "frame length does not match extractor");

  // pre-emphasis + window, zero-padded to the FFT size
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size_),
                                        {0.0, 0.0});
  for (int t = 0; t < frame_len_; ++t) {
    const double prev = t > 0 ? frame[static_cast<std::size_t>(t) - 1] : 0.0;
    const double y = frame[static_cast<std::size_t>(t)] - cfg_.preemphasis * prev;
    buf[static_cast<std::size_t>(t)] = y * window_[static_cast<std::size_t>(t)];
  }
  dsp::fft(buf);

  const int n_bins = fft_size_ / 2 + 1;
  std::vector<double> power(static_cast<std::size_t>(n_bins));
  for (int k = 0; k < n_bins; ++k)
    power[static_cast<std::size_t>(k)] = std::norm(buf[static_cast<std::size_t>(k)]);

  std::vector<double> log_energies(static_cast<std::size_t>(cfg_.n_filters));
  for (int m = 0; m < cfg_.n_filters; ++m) {
    const auto& w = filterbank_[static_cast<std::size_t>(m)];
    double e = 0.0;
    for (int k = 0; k < n_bins; ++k)
      e += w[static_cast<std::size_t>(k)] * power[static_cast<std::size_t>(k)];
    log_energies[static_cast<std::size_t>(m)] = std::log(e + cfg_.log_floor);
  }

  FeatureRow coeffs(static_cast<std::size_t>(cfg_.n_coeffs), 0.0);
  for (int k = 0; k < cfg_.n_coeffs; ++k) {
    double acc = 0.0;
    const auto& row = dct_[static_cast<std::size_t>(k)];
    for (int m = 0; m < cfg_.n_filters; ++m)
      acc += row[static_cast<std::size_t>(m)] * log_energies[static_cast<std::size_t>(m)];
    coeffs[static_cast<std::size_t>(k)] = acc;
  }
  return coeffs;
}

FeatureRow mfcc(const Frame& frame, int sample_rate_hz, const MfccConfig& cfg) {
  MfccExtractor ex(sample_rate_hz, static_cast<int>(frame.samples.size()), cfg);
  return ex.compute(frame.samples);
}

}  // namespace vad

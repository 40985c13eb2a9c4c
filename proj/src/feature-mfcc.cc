// feature-mfcc.cc

// Copyright 2026  The dsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dsv/feature-mfcc.h"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <sstream>

#include "dsv/error.h"
#include "dsv/io-util.h"

namespace dsv {

namespace {

double MelScale(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

// Rows are mel bins, columns FFT bins 0..fft_size/2.
Matrix MelBanks(const MfccConfig &config, int sample_rate, int fft_size) {
  const double nyquist = 0.5 * sample_rate;
  const double high =
      config.high_freq > 0.0 ? config.high_freq : nyquist + config.high_freq;
  if (config.low_freq < 0.0 || high <= config.low_freq || high > nyquist)
    DSV_ERR(kInvalidConfig) << "bad mel frequency range [" << config.low_freq
                            << ", " << high << "]";
  const int num_bins = config.num_mel_bins;
  const double mel_low = MelScale(config.low_freq);
  const double mel_high = MelScale(high);
  const double delta = (mel_high - mel_low) / (num_bins + 1);
  const int num_fft_bins = fft_size / 2 + 1;
  Matrix banks = Matrix::Zero(num_bins, num_fft_bins);
  for (int m = 0; m < num_bins; ++m) {
    const double left = mel_low + m * delta;
    const double center = left + delta;
    const double right = center + delta;
    for (int k = 0; k < num_fft_bins; ++k) {
      const double mel = MelScale(static_cast<double>(k) * sample_rate / fft_size);
      if (mel > left && mel < right) {
        banks(m, k) = mel <= center ? (mel - left) / (center - left)
                                    : (right - mel) / (right - center);
      }
    }
  }
  return banks;
}

Matrix DctMatrix(int num_ceps, int num_bins) {
  Matrix dct(num_ceps, num_bins);
  for (int i = 0; i < num_ceps; ++i) {
    const double scale = std::sqrt((i == 0 ? 1.0 : 2.0) / num_bins);
    for (int m = 0; m < num_bins; ++m)
      dct(i, m) = scale * std::cos(std::numbers::pi * i * (m + 0.5) / num_bins);
  }
  return dct;
}

}  // namespace

std::string MfccConfig::ToString() const {
  std::ostringstream os;
  os.precision(17);
  os << "frame_length_ms=" << frame_length_ms
     << " frame_shift_ms=" << frame_shift_ms
     << " preemph_coeff=" << preemph_coeff << " num_mel_bins=" << num_mel_bins
     << " num_ceps=" << num_ceps << " low_freq=" << low_freq
     << " high_freq=" << high_freq << " energy_floor=" << energy_floor;
  return os.str();
}

FeatureMatrix ComputeMfcc(const Waveform &wave, const MfccConfig &config) {
  if (wave.sample_rate <= 0)
    DSV_ERR(kInvalidConfig) << "sample rate must be positive";
  if (config.num_mel_bins <= 0 || config.num_ceps <= 0 ||
      config.num_ceps > config.num_mel_bins)
    DSV_ERR(kInvalidConfig) << "need 0 < num_ceps <= num_mel_bins, got "
                            << config.num_ceps << " and " << config.num_mel_bins;
  if (config.frame_shift_ms <= 0.0 ||
      config.frame_length_ms < config.frame_shift_ms)
    DSV_ERR(kInvalidConfig) << "frame length must be >= frame shift > 0";
  if (config.energy_floor <= 0.0)
    DSV_ERR(kInvalidConfig) << "energy floor must be positive";

  const int64_t frame_length = static_cast<int64_t>(
      std::llround(config.frame_length_ms * 1e-3 * wave.sample_rate));
  const int64_t frame_shift = static_cast<int64_t>(
      std::llround(config.frame_shift_ms * 1e-3 * wave.sample_rate));
  if (frame_shift < 1)
    DSV_ERR(kInvalidConfig) << "frame shift below one sample";
  const int64_t num_samples = static_cast<int64_t>(wave.samples.size());
  if (num_samples < frame_length)
    DSV_ERR(kWaveformTooShort) << num_samples << " samples, need at least "
                               << frame_length;
  const int64_t num_frames = 1 + (num_samples - frame_length) / frame_shift;

  int fft_size = 1;
  while (fft_size < frame_length) fft_size <<= 1;
  const Matrix banks = MelBanks(config, wave.sample_rate, fft_size);
  const Matrix dct = DctMatrix(config.num_ceps, config.num_mel_bins);

  std::vector<double> emphasized(wave.samples);
  for (int64_t n = num_samples - 1; n > 0; --n)
    emphasized[n] -= config.preemph_coeff * wave.samples[n - 1];

  std::vector<double> window(frame_length);
  for (int64_t n = 0; n < frame_length; ++n)
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n /
                                       static_cast<double>(frame_length - 1));

  Eigen::FFT<double> fft;
  std::vector<double> frame(fft_size);
  std::vector<std::complex<double>> spectrum;
  Vector power(fft_size / 2 + 1);
  Matrix out(config.num_ceps, num_frames);
  for (int64_t t = 0; t < num_frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const double *src = emphasized.data() + t * frame_shift;
    for (int64_t n = 0; n < frame_length; ++n) frame[n] = src[n] * window[n];
    fft.fwd(spectrum, frame);
    for (int k = 0; k <= fft_size / 2; ++k) power[k] = std::norm(spectrum[k]);
    Vector log_energy = (banks * power).cwiseMax(config.energy_floor).array().log();
    out.col(t) = dct * log_energy;
  }
  return FeatureMatrix(std::move(out), config.frame_shift_ms);
}

FeatureMatrix AppendDeltas(const FeatureMatrix &f, int width) {
  if (width < 1) DSV_ERR(kInvalidArgument) << "delta width must be >= 1";
  const int64_t channels = f.ChannelCount();
  const int64_t frames = f.FrameCount();
  double denom = 0.0;
  for (int n = 1; n <= width; ++n) denom += 2.0 * n * n;

  auto regress = [&](const Matrix &in) {
    Matrix d = Matrix::Zero(in.rows(), frames);
    for (int64_t t = 0; t < frames; ++t) {
      for (int n = 1; n <= width; ++n) {
        const int64_t fwd = std::min<int64_t>(t + n, frames - 1);
        const int64_t back = std::max<int64_t>(t - n, 0);
        d.col(t) += n * (in.col(fwd) - in.col(back));
      }
      d.col(t) /= denom;
    }
    return d;
  };

  Matrix out(3 * channels, frames);
  out.topRows(channels) = f.data;
  out.middleRows(channels, channels) = regress(f.data);
  out.bottomRows(channels) = regress(out.middleRows(channels, channels));
  return FeatureMatrix(std::move(out), f.frame_shift_ms);
}

Waveform ReadWav(const std::string &path) {
  const std::string bytes = ReadFileToString(path);
  auto u16 = [&](size_t off) {
    return static_cast<uint32_t>(static_cast<unsigned char>(bytes[off])) |
           (static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 1])) << 8);
  };
  auto u32 = [&](size_t off) { return u16(off) | (u16(off + 2) << 16); };
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0)
    DSV_ERR(kFormat) << path << ": not a RIFF/WAVE file";

  Waveform wave;
  int bits = 0;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const size_t size = u32(pos + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size() && id != "data")
      DSV_ERR(kFormat) << path << ": truncated chunk " << id;
    if (id == "fmt ") {
      if (size < 16) DSV_ERR(kFormat) << path << ": short fmt chunk";
      const uint32_t format = u16(body);
      const uint32_t channels = u16(body + 2);
      wave.sample_rate = static_cast<int>(u32(body + 4));
      bits = static_cast<int>(u16(body + 14));
      if (format != 1 && format != 0xFFFE)
        DSV_ERR(kFormat) << path << ": only PCM WAV is supported";
      if (channels != 1) DSV_ERR(kFormat) << path << ": only mono is supported";
      if (bits != 8 && bits != 16 && bits != 24 && bits != 32)
        DSV_ERR(kFormat) << path << ": unsupported bit depth " << bits;
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) DSV_ERR(kFormat) << path << ": data before fmt chunk";
      const size_t bytes_per_sample = static_cast<size_t>(bits) / 8;
      const size_t avail = std::min(size, bytes.size() - body);
      const size_t n = avail / bytes_per_sample;
      wave.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const size_t off = body + i * bytes_per_sample;
        double v = 0.0;
        switch (bits) {
          case 8:
            v = (static_cast<unsigned char>(bytes[off]) - 128.0) * 256.0;
            break;
          case 16:
            v = static_cast<int16_t>(u16(off));
            break;
          case 24: {
            int32_t s = static_cast<int32_t>(u16(off) |
                (static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 2])) << 16));
            if (s & 0x800000) s -= 0x1000000;
            v = s / 256.0;
            break;
          }
          case 32:
            v = static_cast<int32_t>(u32(off)) / 65536.0;
            break;
        }
        wave.samples[i] = v;
      }
      return wave;
    }
    pos = body + size + (size & 1);
  }
  DSV_ERR(kFormat) << path << ": no data chunk";
}

}  // namespace dsv

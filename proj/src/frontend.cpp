// sphmm/frontend.cpp

// Copyright 2026  The sphmm Authors

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

#include "sphmm/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sphmm {

namespace {

std::size_t frame_width(const AudioBuffer &audio, double frame_len) {
  return static_cast<std::size_t>(std::lround(frame_len * audio.sample_rate));
}

std::size_t frame_step(const AudioBuffer &audio, double frame_hop) {
  return static_cast<std::size_t>(std::lround(frame_hop * audio.sample_rate));
}

// Raw (rectangular) frames, shared by the pitch and energy paths.
Matrix slice_frames(const AudioBuffer &audio, double frame_len, double frame_hop) {
  const std::size_t w = frame_width(audio, frame_len);
  const std::size_t h = frame_step(audio, frame_hop);
  if (w == 0 || h == 0) throw std::invalid_argument("frame_signal: zero frame length or hop");
  const std::size_t len = audio.samples.size();
  if (len < w) {
    throw std::invalid_argument("frame_signal: signal too short (" + std::to_string(len) +
                                " samples, window needs " + std::to_string(w) + ")");
  }
  const std::size_t count = (len - w) / h + 1;
  Matrix frames(count, std::vector<double>(w));
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t off = f * h;
    for (std::size_t i = 0; i < w; ++i) {
      frames[f][i] = static_cast<double>(audio.samples[off + i]);
    }
  }
  return frames;
}

void fft_inplace(std::vector<std::complex<double>> &a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters as weights over the one-sided spectrum bins.
Matrix mel_filterbank(int num_filters, int sample_rate, std::size_t nfft) {
  const std::size_t bins = nfft / 2 + 1;
  const double f_max = sample_rate / 2.0;
  const double mel_max = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<std::size_t>(num_filters) + 2);
  for (std::size_t m = 0; m < edges.size(); ++m) {
    edges[m] = mel_to_hz(mel_max * static_cast<double>(m) / (num_filters + 1));
  }
  Matrix bank(static_cast<std::size_t>(num_filters), std::vector<double>(bins, 0.0));
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      double w = 0.0;
      if (f > lo && f < mid) {
        w = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      bank[static_cast<std::size_t>(m)][k] = w;
    }
  }
  return bank;
}

// Orthonormal DCT-II basis, rows = output coefficients.
Matrix dct_basis(int num_out, int num_in) {
  Matrix basis(static_cast<std::size_t>(num_out), std::vector<double>(static_cast<std::size_t>(num_in)));
  for (int q = 0; q < num_out; ++q) {
    const double scale = (q == 0) ? std::sqrt(1.0 / num_in) : std::sqrt(2.0 / num_in);
    for (int m = 0; m < num_in; ++m) {
      basis[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)] =
          scale * std::cos(M_PI * q * (m + 0.5) / num_in);
    }
  }
  return basis;
}

}  // namespace

std::vector<double> hamming_window(std::size_t w) {
  std::vector<double> win(w, 1.0);
  if (w < 2) return win;
  for (std::size_t i = 0; i < w; ++i) {
    win[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(w - 1));
  }
  return win;
}

Matrix frame_signal(const AudioBuffer &audio, double frame_len, double frame_hop,
                    double preemphasis) {
  AudioBuffer src = audio;
  if (preemphasis != 0.0) {
    for (std::size_t i = src.samples.size(); i > 1; --i) {
      const double y = static_cast<double>(audio.samples[i - 1]) -
                       preemphasis * static_cast<double>(audio.samples[i - 2]);
      src.samples[i - 1] = static_cast<std::int16_t>(std::clamp(std::lround(y), -32768L, 32767L));
    }
  }
  Matrix frames = slice_frames(src, frame_len, frame_hop);
  const std::vector<double> win = hamming_window(frames.empty() ? 0 : frames[0].size());
  for (auto &frame : frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] *= win[i];
  }
  return frames;
}

Matrix compute_mfcc(const Matrix &frames, int sample_rate, const FrontendConfig &cfg) {
  if (frames.empty()) return {};
  const std::size_t w = frames[0].size();
  const std::size_t nfft = next_pow2(w);
  const std::size_t bins = nfft / 2 + 1;
  const Matrix bank = mel_filterbank(cfg.num_filters, sample_rate, nfft);
  const Matrix dct = dct_basis(cfg.num_cepstra, cfg.num_filters);

  Matrix out(frames.size(), std::vector<double>(static_cast<std::size_t>(cfg.num_cepstra)));
  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> power(bins);
  std::vector<double> logs(static_cast<std::size_t>(cfg.num_filters));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].size() != w) throw std::invalid_argument("compute_mfcc: ragged frame lengths");
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < w; ++i) buf[i] = frames[f][i];
    fft_inplace(buf);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
    for (int m = 0; m < cfg.num_filters; ++m) {
      double e = 0.0;
      const auto &row = bank[static_cast<std::size_t>(m)];
      for (std::size_t k = 0; k < bins; ++k) e += row[k] * power[k];
      logs[static_cast<std::size_t>(m)] = std::log(std::max(e, cfg.log_floor));
    }
    for (int q = 0; q < cfg.num_cepstra; ++q) {
      double c = 0.0;
      const auto &row = dct[static_cast<std::size_t>(q)];
      for (int m = 0; m < cfg.num_filters; ++m) c += row[static_cast<std::size_t>(m)] * logs[static_cast<std::size_t>(m)];
      out[f][static_cast<std::size_t>(q)] = c;
    }
  }
  return out;
}

Matrix compute_delta(const Matrix &static_feats, int halfwidth) {
  const int k_max = halfwidth;
  const std::ptrdiff_t t_count = static_cast<std::ptrdiff_t>(static_feats.size());
  if (t_count < 2 * k_max + 1) {
    throw std::invalid_argument("compute_delta: too few frames (" + std::to_string(t_count) +
                                " < " + std::to_string(2 * k_max + 1) + ")");
  }
  double denom = 0.0;
  for (int k = 1; k <= k_max; ++k) denom += static_cast<double>(k) * k;
  denom *= 2.0;

  const std::size_t dim = static_feats[0].size();
  Matrix out(static_feats.size(), std::vector<double>(dim, 0.0));
  for (std::ptrdiff_t t = 0; t < t_count; ++t) {
    for (int k = 1; k <= k_max; ++k) {
      const auto &ahead = static_feats[static_cast<std::size_t>(std::min(t + k, t_count - 1))];
      const auto &behind = static_feats[static_cast<std::size_t>(std::max<std::ptrdiff_t>(t - k, 0))];
      for (std::size_t d = 0; d < dim; ++d) {
        out[static_cast<std::size_t>(t)][d] += k * (ahead[d] - behind[d]) / denom;
      }
    }
  }
  return out;
}

double estimate_f0(const std::vector<double> &frame, int sample_rate,
                   const FrontendConfig &cfg) {
  const std::size_t w = frame.size();
  const std::size_t lag_min =
      static_cast<std::size_t>(std::ceil(sample_rate / cfg.f0_max));
  // Two full periods must fit in the frame for the overlap at lag tau to be
  // meaningful, so the search stops at w/2 even when f0_min asks for more.
  const std::size_t lag_max = std::min(
      static_cast<std::size_t>(std::floor(sample_rate / cfg.f0_min)), w / 2);
  if (lag_min < 1 || lag_min > lag_max) {
    throw std::invalid_argument("estimate_f0: frame too short for the pitch search range");
  }

  double mean = 0.0;
  for (double x : frame) mean += x;
  mean /= static_cast<double>(w);

  std::vector<double> r(lag_max + 1, 0.0);
  for (std::size_t tau = 0; tau <= lag_max; ++tau) {
    double acc = 0.0;
    for (std::size_t i = 0; i + tau < w; ++i) {
      acc += (frame[i] - mean) * (frame[i + tau] - mean);
    }
    r[tau] = acc;
  }
  if (r[0] <= 1e-12) return 0.0;  // silence

  std::size_t best = lag_min;
  for (std::size_t tau = lag_min; tau <= lag_max; ++tau) {
    if (r[tau] > r[best]) best = tau;
  }
  if (r[best] / r[0] < cfg.voicing_threshold) return 0.0;

  // Parabolic refinement around the peak for sub-sample lag precision.
  double lag = static_cast<double>(best);
  if (best > lag_min && best < lag_max) {
    const double y0 = r[best - 1], y1 = r[best], y2 = r[best + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    if (std::abs(denom) > 1e-30) {
      const double shift = 0.5 * (y0 - y2) / denom;
      if (std::abs(shift) <= 1.0) lag += shift;
    }
  }
  return static_cast<double>(sample_rate) / lag;
}

ObservationSequence compute_observations(const AudioBuffer &audio, const FrontendConfig &cfg) {
  const Matrix frames = frame_signal(audio, cfg.frame_len, cfg.frame_hop, cfg.preemphasis);
  const Matrix statics = compute_mfcc(frames, audio.sample_rate, cfg);
  const Matrix deltas = compute_delta(statics, cfg.delta_halfwidth);
  ObservationSequence obs;
  obs.frame_hop = cfg.frame_hop;
  obs.frame_len = cfg.frame_len;
  obs.frames.resize(statics.size());
  for (std::size_t t = 0; t < statics.size(); ++t) {
    obs.frames[t] = statics[t];
    obs.frames[t].insert(obs.frames[t].end(), deltas[t].begin(), deltas[t].end());
  }
  return obs;
}

FrameProsody analyze_prosody(const AudioBuffer &audio, const FrontendConfig &cfg) {
  const Matrix raw = slice_frames(audio, cfg.frame_len, cfg.frame_hop);
  FrameProsody tracks;
  tracks.frame_hop = cfg.frame_hop;
  const std::size_t frame_count = raw.size();
  tracks.f0.resize(frame_count);
  tracks.log_energy.resize(frame_count);
  for (std::size_t t = 0; t < frame_count; ++t) {
    tracks.f0[t] = estimate_f0(raw[t], audio.sample_rate, cfg);
    double p = 0.0;
    for (double x : raw[t]) p += x * x;
    p /= static_cast<double>(raw[t].size());
    tracks.log_energy[t] = std::log(std::max(p, cfg.log_floor));
  }
  return tracks;
}

ProsodicSequence aggregate_prosody(const FrameProsody &tracks,
                                   const std::vector<std::size_t> &boundaries) {
  const std::size_t frame_count = tracks.f0.size();
  if (boundaries.empty()) throw std::invalid_argument("aggregate_prosody: no segment boundaries");
  std::size_t prev = 0;
  for (std::size_t b : boundaries) {
    if (b <= prev) {
      throw std::invalid_argument("aggregate_prosody: boundaries must be strictly increasing; "
                                  "segment ending at " + std::to_string(b) + " is empty");
    }
    prev = b;
  }
  if (boundaries.back() != frame_count) {
    throw std::invalid_argument("aggregate_prosody: boundaries must cover the utterance (last must be " +
                                std::to_string(frame_count) + ", got " +
                                std::to_string(boundaries.back()) + ")");
  }

  const double hop = tracks.frame_hop;
  const double total_duration = static_cast<double>(frame_count) * hop;
  const double rate = static_cast<double>(boundaries.size()) / total_duration;

  ProsodicSequence seq;
  std::size_t begin = 0;
  for (std::size_t end : boundaries) {
    ProsodicVector v;
    v.duration = static_cast<double>(end - begin) * hop;
    v.speaking_rate = rate;

    double e = 0.0;
    for (std::size_t t = begin; t < end; ++t) e += tracks.log_energy[t];
    v.log_energy_mean = e / static_cast<double>(end - begin);

    // Least-squares line through (frame time, f0) over voiced frames.
    std::size_t voiced = 0;
    double sum_t = 0.0, sum_f = 0.0, sum_tt = 0.0, sum_tf = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
      if (tracks.f0[t] <= 0.0) continue;
      const double x = static_cast<double>(t) * hop;
      ++voiced;
      sum_t += x;
      sum_f += tracks.f0[t];
      sum_tt += x * x;
      sum_tf += x * tracks.f0[t];
    }
    if (voiced > 0) {
      v.f0_mean = sum_f / static_cast<double>(voiced);
      if (voiced >= 2) {
        const double n = static_cast<double>(voiced);
        const double denom = n * sum_tt - sum_t * sum_t;
        v.f0_slope = (denom > 1e-12) ? (n * sum_tf - sum_t * sum_f) / denom : 0.0;
      }
    }
    seq.segments.push_back(v);
    begin = end;
  }
  return seq;
}

ProsodicSequence prosodic_features(const AudioBuffer &audio,
                                   const std::vector<std::size_t> &boundaries,
                                   const FrontendConfig &cfg) {
  return aggregate_prosody(analyze_prosody(audio, cfg), boundaries);
}

}  // namespace sphmm

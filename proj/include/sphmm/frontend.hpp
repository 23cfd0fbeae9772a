// sphmm/frontend.hpp

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

#pragma once

#include <cstddef>
#include <vector>

#include "sphmm/audio.hpp"
#include "sphmm/common.hpp"

namespace sphmm {

/// Front-end analysis settings. Defaults give 30 ms Hamming frames every
/// 5 ms, a 26-filter mel bank, 16 static cepstra (c0 carries log energy)
/// plus 16 deltas, and an autocorrelation pitch tracker over 60-400 Hz.
struct FrontendConfig {
  double frame_len = 0.030;   // seconds
  double frame_hop = 0.005;   // seconds
  int num_filters = 26;       // triangular mel filters, 0..rate/2
  int num_cepstra = 16;       // DCT-II coefficients kept, c0 included
  int delta_halfwidth = 2;    // regression half-width K
  double preemphasis = 0.0;   // 0 disables the filter
  double f0_min = 60.0;       // Hz
  double f0_max = 400.0;      // Hz
  double voicing_threshold = 0.3;  // on normalized autocorrelation
  double log_floor = 1e-10;   // power floor before any log

  bool operator==(const FrontendConfig &) const = default;
};

/// Frame-synchronous acoustic observations: static cepstra followed by
/// their deltas in each row, 2 * num_cepstra columns.
struct ObservationSequence {
  Matrix frames;
  double frame_hop = 0.005;
  double frame_len = 0.030;

  std::size_t size() const { return frames.size(); }
};

/// Segment-level prosodic measurements. f0_mean == 0 encodes a segment with
/// no voiced frames.
struct ProsodicVector {
  double f0_mean = 0.0;          // Hz, voiced frames only
  double f0_slope = 0.0;         // Hz/s, least-squares over voiced frames
  double log_energy_mean = 0.0;  // natural log of mean frame power
  double duration = 0.0;         // seconds on the frame grid
  double speaking_rate = 0.0;    // segments per second of utterance

  std::vector<double> as_vector() const {
    return {f0_mean, f0_slope, log_energy_mean, duration, speaking_rate};
  }
};

struct ProsodicSequence {
  std::vector<ProsodicVector> segments;

  std::size_t size() const { return segments.size(); }
  Matrix as_matrix() const {
    Matrix m;
    m.reserve(segments.size());
    for (const auto &s : segments) m.push_back(s.as_vector());
    return m;
  }
};

/// Per-frame prosodic tracks on the analysis grid. f0[t] == 0 marks an
/// unvoiced frame. Computed once per utterance; segment statistics are
/// aggregated from these tracks for any segmentation.
struct FrameProsody {
  std::vector<double> f0;          // Hz per frame, 0 when unvoiced
  std::vector<double> log_energy;  // natural log of mean frame power
  double frame_hop = 0.005;        // seconds between frames

  std::size_t size() const { return f0.size(); }
};

/// Symmetric Hamming window of length w.
std::vector<double> hamming_window(std::size_t w);

/// Slices `audio` into overlapping frames of frame_len seconds every
/// frame_hop seconds and multiplies each by a Hamming window. The frame
/// count is floor((L - W) / H) + 1. Throws if the signal is shorter than
/// one window.
Matrix frame_signal(const AudioBuffer &audio, double frame_len, double frame_hop,
                    double preemphasis = 0.0);

/// 16 static MFCCs per windowed frame: power spectrum, mel filter bank,
/// floored natural log, orthonormal DCT-II. Deterministic bit-for-bit.
Matrix compute_mfcc(const Matrix &frames, int sample_rate, const FrontendConfig &cfg);

/// Regression deltas with half-width K and replicated edges:
///   delta[t] = sum_k k * (x[t+k] - x[t-k]) / (2 * sum_k k^2).
/// Throws when fewer than 2K+1 frames are given.
Matrix compute_delta(const Matrix &static_feats, int halfwidth);

/// Autocorrelation pitch estimate on raw (unwindowed) samples. Returns the
/// peak frequency within [f0_min, f0_max], refined by parabolic
/// interpolation, or 0 when the normalized peak falls below the voicing
/// threshold. The frame must span at least two periods of the lowest
/// searchable frequency; the search range is narrowed to what the frame
/// supports and the call throws when no lag is searchable at all.
double estimate_f0(const std::vector<double> &frame, int sample_rate,
                   const FrontendConfig &cfg);

/// Convenience pipeline: framing, static MFCC, deltas, concatenation.
ObservationSequence compute_observations(const AudioBuffer &audio,
                                         const FrontendConfig &cfg);

/// Per-frame pitch and energy tracks over rectangular (unwindowed) frames
/// on the same grid as compute_observations.
FrameProsody analyze_prosody(const AudioBuffer &audio, const FrontendConfig &cfg);

/// Segment-level statistics over precomputed tracks. `boundaries` are
/// strictly increasing frame indices, each the exclusive end of a segment;
/// the last must equal the frame count so the segmentation covers the
/// utterance. F0 statistics use voiced frames only; durations live on the
/// frame grid (count * hop), so they sum exactly to the framed utterance
/// duration.
ProsodicSequence aggregate_prosody(const FrameProsody &tracks,
                                   const std::vector<std::size_t> &boundaries);

/// Convenience composition of analyze_prosody and aggregate_prosody.
ProsodicSequence prosodic_features(const AudioBuffer &audio,
                                   const std::vector<std::size_t> &boundaries,
                                   const FrontendConfig &cfg);

}  // namespace sphmm

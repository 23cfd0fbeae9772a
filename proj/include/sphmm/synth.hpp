// sphmm/synth.hpp

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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sphmm/audio.hpp"
#include "sphmm/manifest.hpp"

namespace sphmm {

/// How a voice changes when the speaker shouts. The first three fields are
/// constrained so a shouted take is strictly higher-pitched, strictly
/// louder and shorter than its neutral sibling.
struct ShoutTransform {
  double f0_scale = 1.5;         // > 1
  double energy_gain_db = 12.0;  // > 0
  double duration_scale = 0.8;   // < 1
  double tilt_shift = 0.25;      // relative rise of the spectral-tilt cutoff
  double formant_scale = 0.0;    // relative upward shift of all resonances
  double formant_scatter = 0.0;  // extra per-take resonance jitter (relative)
};

/// Parameters of one synthetic speaker: excitation pitch, a three-resonance
/// vocal-tract profile, a loudness factor and the voice's shout behavior.
struct SyntheticVoiceSpec {
  std::string speaker_id;
  Gender gender = Gender::Male;
  double base_f0 = 120.0;                          // Hz
  std::array<double, 3> formant_profile = {500.0, 1500.0, 2500.0};  // Hz
  double energy = 1.0;                             // relative linear gain
  double tilt_cutoff = 1500.0;                     // Hz, spectral rolloff knee
  ShoutTransform shout;
};

/// One pseudo-phone of a sentence script: a stretch of speech with its own
/// resonance coloring, pitch targets and loudness.
struct SentenceSegment {
  double duration = 0.1;  // seconds, neutral tempo
  bool voiced = true;
  double f0_begin = 1.0, f0_end = 1.0;             // factors on the voice's base F0
  std::array<double, 3> formant_factors = {1.0, 1.0, 1.0};
  double amplitude = 1.0;
};

/// A synthetic "sentence": the fixed segment sequence every speaker utters
/// for one sentence id, making identification text-dependent.
struct SentenceScript {
  std::string sentence_id;
  std::vector<SentenceSegment> segments;

  double nominal_duration() const {
    double d = 0.0;
    for (const auto &s : segments) d += s.duration;
    return d;
  }
};

struct SynthConfig {
  int num_speakers = 50;
  int num_sentences = 8;
  std::uint64_t seed = 20100101ull;
  int sample_rate = 16000;
  int neutral_train_takes = 5;
  int neutral_test_takes = 4;
  int shouted_test_takes = 9;
  double f0_jitter = 0.015;       // relative per-take pitch scatter
  double energy_jitter = 0.1;     // relative per-take loudness scatter
  double duration_jitter = 0.03;  // relative per-take tempo scatter
  // Within-take scatter: contour jitter perturbs each segment's pitch
  // endpoints, segment jitter perturbs each segment's length. Both widen a
  // speaker's intra-class prosodic spread without moving the voice itself.
  double f0_contour_jitter = 0.0;
  double segment_duration_jitter = 0.0;
  ShoutTransform shout;
  int threads = 0;
};

/// Deterministic per-seed voice bank: half male, half female (extra speaker
/// male), stratified pitch and resonances so no two voices collide.
std::vector<SyntheticVoiceSpec> make_voice_specs(const SynthConfig &cfg);

/// Deterministic per-seed sentence bank.
std::vector<SentenceScript> make_sentence_scripts(const SynthConfig &cfg);

/// Renders one take: pulse-train / noise excitation through three resonators
/// and a spectral-tilt filter, RMS-normalized. `take_seed` fully determines
/// the per-take jitter.
AudioBuffer render_utterance(const SyntheticVoiceSpec &voice, const SentenceScript &script,
                             Environment environment, std::uint64_t take_seed,
                             const SynthConfig &cfg);

/// Generates the full protocol corpus under `out_dir`: per (speaker,
/// sentence), neutral train and test takes plus shouted test takes, WAVs
/// under wav/<speaker>/, and manifest.csv at the root. Deterministic per
/// seed, byte for byte.
CorpusManifest synth_corpus(const SynthConfig &cfg, const std::string &out_dir);

}  // namespace sphmm

// sphmm/synth.cpp

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

#include "sphmm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "sphmm/common.hpp"

namespace sphmm {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string padded(const std::string &prefix, int index, int count) {
  int width = 1;
  for (int c = count - 1; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(index);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

// Stratified draw: value i sits in its own cell of [lo, hi], jittered
// within the cell, with a shuffled cell order so ids are not monotone in
// any parameter.
std::vector<double> stratified(Rng &rng, int count, double lo, double hi) {
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<double> values(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double cell = (static_cast<double>(order[static_cast<std::size_t>(i)]) + 0.5 +
                         0.4 * (rng.uniform() - 0.5)) /
                        static_cast<double>(count);
    values[static_cast<std::size_t>(i)] = lo + (hi - lo) * cell;
  }
  return values;
}

void check_shout(const ShoutTransform &s) {
  if (!(s.f0_scale > 1.0)) throw std::invalid_argument("shout transform: f0_scale must exceed 1");
  if (!(s.energy_gain_db > 0.0)) throw std::invalid_argument("shout transform: energy_gain_db must be positive");
  if (!(s.duration_scale < 1.0 && s.duration_scale > 0.0)) {
    throw std::invalid_argument("shout transform: duration_scale must lie in (0, 1)");
  }
}

// Two-pole resonator with unit-ish gain at the resonance.
struct Biquad {
  double a1 = 0.0, a2 = 0.0, b0 = 1.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(double freq, double bandwidth, int rate) {
    const double r = std::exp(-M_PI * bandwidth / rate);
    a1 = 2.0 * r * std::cos(kTwoPi * freq / rate);
    a2 = -r * r;
    b0 = 1.0 - r * r;
  }

  double step(double x) {
    const double y = b0 * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

std::vector<SyntheticVoiceSpec> make_voice_specs(const SynthConfig &cfg) {
  if (cfg.num_speakers < 2) throw std::invalid_argument("synth: at least 2 speakers required");
  check_shout(cfg.shout);

  const int males = (cfg.num_speakers + 1) / 2;
  const int females = cfg.num_speakers - males;
  std::vector<SyntheticVoiceSpec> voices(static_cast<std::size_t>(cfg.num_speakers));

  struct Ranges {
    double f0_lo, f0_hi, f1_lo, f1_hi, f2_lo, f2_hi, f3_lo, f3_hi;
  };
  const Ranges male{95.0, 150.0, 320.0, 780.0, 950.0, 2150.0, 2350.0, 3100.0};
  const Ranges female{175.0, 245.0, 370.0, 900.0, 1090.0, 2470.0, 2700.0, 3550.0};

  int offset = 0;
  for (const bool is_male : {true, false}) {
    const int count = is_male ? males : females;
    if (count == 0) continue;
    const Ranges &r = is_male ? male : female;
    Rng rng(derive_seed(cfg.seed, "voices", is_male ? "male" : "female"));
    const auto f0s = stratified(rng, count, r.f0_lo, r.f0_hi);
    const auto f1s = stratified(rng, count, r.f1_lo, r.f1_hi);
    const auto f2s = stratified(rng, count, r.f2_lo, r.f2_hi);
    const auto f3s = stratified(rng, count, r.f3_lo, r.f3_hi);
    for (int i = 0; i < count; ++i) {
      SyntheticVoiceSpec &v = voices[static_cast<std::size_t>(offset + i)];
      v.speaker_id = padded("spk", offset + i, cfg.num_speakers);
      v.gender = is_male ? Gender::Male : Gender::Female;
      v.base_f0 = f0s[static_cast<std::size_t>(i)];
      v.formant_profile = {f1s[static_cast<std::size_t>(i)], f2s[static_cast<std::size_t>(i)],
                           f3s[static_cast<std::size_t>(i)]};
      v.energy = 0.85 + 0.3 * rng.uniform();
      v.tilt_cutoff = 1000.0 + 1200.0 * rng.uniform();
      v.shout = cfg.shout;
    }
    offset += count;
  }
  return voices;
}

std::vector<SentenceScript> make_sentence_scripts(const SynthConfig &cfg) {
  if (cfg.num_sentences < 1) throw std::invalid_argument("synth: at least 1 sentence required");
  std::vector<SentenceScript> scripts(static_cast<std::size_t>(cfg.num_sentences));
  for (int j = 0; j < cfg.num_sentences; ++j) {
    Rng rng(derive_seed(cfg.seed, "sentence", static_cast<std::uint64_t>(j)));
    SentenceScript &script = scripts[static_cast<std::size_t>(j)];
    script.sentence_id = padded("sent", j, cfg.num_sentences);
    const int num_segments = 6 + static_cast<int>(rng.uniform_int(5));
    double f0_prev = 0.94 + 0.12 * rng.uniform();
    for (int s = 0; s < num_segments; ++s) {
      SentenceSegment seg;
      seg.duration = 0.085 + 0.075 * rng.uniform();
      // The first few segments stay voiced so every take has a usable
      // pitch contour from the start.
      seg.voiced = s < 4 || rng.uniform() < 0.8;
      seg.f0_begin = f0_prev;
      seg.f0_end = 0.88 + 0.24 * rng.uniform();
      f0_prev = seg.f0_end;
      for (auto &f : seg.formant_factors) f = 0.85 + 0.35 * rng.uniform();
      seg.amplitude = (seg.voiced ? 0.75 : 0.4) + 0.25 * rng.uniform();
      script.segments.push_back(seg);
    }
    scripts[static_cast<std::size_t>(j)] = script;
  }
  return scripts;
}

AudioBuffer render_utterance(const SyntheticVoiceSpec &voice, const SentenceScript &script,
                             Environment environment, std::uint64_t take_seed,
                             const SynthConfig &cfg) {
  if (script.segments.empty()) throw std::invalid_argument("synth: empty sentence script");
  check_shout(voice.shout);
  Rng rng(take_seed);
  const bool shouted = environment == Environment::Shouted;
  const int rate = cfg.sample_rate;

  const double dur_scale = (1.0 + cfg.duration_jitter * rng.uniform(-1.0, 1.0)) *
                           (shouted ? voice.shout.duration_scale : 1.0);
  const double f0_scale = (1.0 + cfg.f0_jitter * rng.uniform(-1.0, 1.0)) *
                          (shouted ? voice.shout.f0_scale : 1.0);
  const double energy_lin = voice.energy * (1.0 + cfg.energy_jitter * rng.uniform(-1.0, 1.0)) *
                            (shouted ? std::pow(10.0, voice.shout.energy_gain_db / 20.0) : 1.0);
  const double tilt_cut = voice.tilt_cutoff * (shouted ? 1.0 + voice.shout.tilt_shift : 1.0);

  std::array<double, 3> formant_take = {1.0, 1.0, 1.0};
  if (shouted) {
    for (auto &f : formant_take) {
      f = (1.0 + voice.shout.formant_scale) *
          (1.0 + voice.shout.formant_scatter * rng.uniform(-1.0, 1.0));
    }
  }

  constexpr std::array<double, 3> kBandwidths = {90.0, 120.0, 160.0};
  std::array<Biquad, 3> resonators;
  const double tilt_pole = std::exp(-kTwoPi * tilt_cut / rate);

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(script.nominal_duration() * dur_scale * rate) + 64);

  double phase = 1.0;  // emit a pulse on the very first voiced sample
  double tilt_state = 0.0;
  double amp_prev = script.segments.front().amplitude;

  for (const auto &seg : script.segments) {
    // Within-take draws happen for every segment, jittered or not, so the
    // random stream (and thus every other jitter) is invariant to the knobs.
    const double seg_scale = 1.0 + cfg.segment_duration_jitter * rng.uniform(-1.0, 1.0);
    const double f0b = seg.f0_begin * (1.0 + cfg.f0_contour_jitter * rng.uniform(-1.0, 1.0));
    const double f0e = seg.f0_end * (1.0 + cfg.f0_contour_jitter * rng.uniform(-1.0, 1.0));
    const auto n = static_cast<std::size_t>(std::lround(seg.duration * dur_scale * seg_scale * rate));
    if (n == 0) continue;
    for (std::size_t k = 0; k < 3; ++k) {
      const double freq = std::clamp(voice.formant_profile[k] * seg.formant_factors[k] * formant_take[k],
                                     250.0, 0.45 * rate);
      resonators[k].tune(freq, kBandwidths[k], rate);
    }
    const std::size_t fade = std::min<std::size_t>(n, 64);
    for (std::size_t i = 0; i < n; ++i) {
      double x;
      if (seg.voiced) {
        const double pos = static_cast<double>(i) / static_cast<double>(n);
        const double f0 = std::clamp(voice.base_f0 * f0_scale * (f0b + (f0e - f0b) * pos), 70.0,
                                     390.0);
        phase += f0 / rate;
        if (phase >= 1.0) {
          phase -= 1.0;
          x = 1.0;
        } else {
          x = 0.0;
        }
        x += 0.004 * rng.normal();
      } else {
        x = 0.25 * rng.normal();
      }
      for (auto &res : resonators) x = res.step(x);
      tilt_state = (1.0 - tilt_pole) * x + tilt_pole * tilt_state;
      const double amp = (i < fade)
                             ? amp_prev + (seg.amplitude - amp_prev) * (static_cast<double>(i + 1) /
                                                                        static_cast<double>(fade))
                             : seg.amplitude;
      samples.push_back(tilt_state * amp);
    }
    amp_prev = seg.amplitude;
  }

  double rms = 0.0;
  for (double s : samples) rms += s * s;
  rms = std::sqrt(rms / static_cast<double>(samples.size()));
  double scale = (rms > 1e-12) ? 0.045 * energy_lin / rms : 0.0;
  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s) * scale);
  if (peak > 0.98) scale *= 0.98 / peak;

  AudioBuffer audio;
  audio.sample_rate = rate;
  audio.samples.reserve(samples.size());
  for (double s : samples) {
    const double v = std::clamp(s * scale * 32767.0, -32767.0, 32767.0);
    audio.samples.push_back(static_cast<int16_t>(std::lround(v)));
  }
  return audio;
}

CorpusManifest synth_corpus(const SynthConfig &cfg, const std::string &out_dir) {
  const auto voices = make_voice_specs(cfg);
  const auto scripts = make_sentence_scripts(cfg);

  fs::create_directories(fs::path(out_dir) / "wav");
  for (const auto &v : voices) fs::create_directories(fs::path(out_dir) / "wav" / v.speaker_id);

  struct TakePlan {
    Environment environment;
    Session session;
    int count;
  };
  const std::array<TakePlan, 3> plans = {{{Environment::Neutral, Session::Train, cfg.neutral_train_takes},
                                          {Environment::Neutral, Session::Test, cfg.neutral_test_takes},
                                          {Environment::Shouted, Session::Test, cfg.shouted_test_takes}}};

  CorpusManifest manifest;
  manifest.root = out_dir;
  for (int s = 0; s < cfg.num_speakers; ++s) {
    for (int j = 0; j < cfg.num_sentences; ++j) {
      for (const auto &plan : plans) {
        for (int t = 0; t < plan.count; ++t) {
          ManifestEntry e;
          e.speaker = voices[static_cast<std::size_t>(s)].speaker_id;
          e.gender = voices[static_cast<std::size_t>(s)].gender;
          e.sentence = scripts[static_cast<std::size_t>(j)].sentence_id;
          e.environment = plan.environment;
          e.session = plan.session;
          e.take = t;
          e.path = "wav/" + e.speaker + "/" + e.sentence + "_" + to_string(plan.environment) + "_" +
                   to_string(plan.session) + "_t" + std::to_string(t) + ".wav";
          manifest.entries.push_back(std::move(e));
        }
      }
    }
  }

  parallel_for(manifest.entries.size(), cfg.threads, [&](std::size_t idx) {
    const ManifestEntry &e = manifest.entries[idx];
    const int s = [&] {
      for (int i = 0; i < cfg.num_speakers; ++i) {
        if (voices[static_cast<std::size_t>(i)].speaker_id == e.speaker) return i;
      }
      return -1;
    }();
    const int j = [&] {
      for (int i = 0; i < cfg.num_sentences; ++i) {
        if (scripts[static_cast<std::size_t>(i)].sentence_id == e.sentence) return i;
      }
      return -1;
    }();
    const std::uint64_t take_seed =
        derive_seed(cfg.seed, "take", static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(j),
                    e.environment == Environment::Shouted ? 1ull : 0ull,
                    e.session == Session::Train ? 1ull : 0ull, static_cast<std::uint64_t>(e.take));
    const AudioBuffer audio = render_utterance(voices[static_cast<std::size_t>(s)],
                                               scripts[static_cast<std::size_t>(j)], e.environment,
                                               take_seed, cfg);
    write_wav((fs::path(out_dir) / e.path).string(), audio);
  });

  write_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace sphmm

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>
#include <unistd.h>

#include "sphmm/common.hpp"
#include "sphmm/model_io.hpp"
#include "sphmm/speaker_id.hpp"

using namespace sphmm;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char *tag) {
    path = std::filesystem::temp_directory_path() /
           (std::string("sphmm_speaker_id_test_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Three-tone utterance in a speaker-specific pitch register.
AudioBuffer tone_utterance(double register_hz, Rng &rng) {
  AudioBuffer a;
  const double ratios[3] = {0.95, 1.08, 1.00};
  const double base_dur[3] = {0.20, 0.16, 0.18};
  const double amp = 6000.0 * (1.0 + 0.15 * rng.uniform(-1.0, 1.0));
  for (int seg = 0; seg < 3; ++seg) {
    const double hz = register_hz * ratios[seg] * (1.0 + 0.03 * rng.uniform(-1.0, 1.0));
    const double dur = base_dur[seg] * (1.0 + 0.10 * rng.uniform(-1.0, 1.0));
    const auto n = static_cast<std::size_t>(dur * a.sample_rate);
    const std::size_t start = a.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
      a.samples.push_back(static_cast<std::int16_t>(
          amp * std::sin(2.0 * M_PI * hz * static_cast<double>(start + i) / a.sample_rate)));
    }
  }
  return a;
}

EnrollOptions fast_enroll_options() {
  EnrollOptions opts;
  opts.num_states = 3;
  opts.group_size = 1;
  opts.acoustic_mixtures = 1;
  opts.prosodic_mixtures = 1;
  opts.max_iters = 4;
  opts.seed = 4242;
  return opts;
}

}  // namespace

TEST_SUITE("speaker_id") {

TEST_CASE("variant names, kinds, and orders are consistent") {
  for (Variant v : kAllVariants) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK(variant_from_string("LtrSpHmm2") == Variant::LTRSPHMM2);
  CHECK(variant_from_string("CSPHMM1") == Variant::CSPHMM1);
  CHECK_THROWS_AS((void)variant_from_string("sphmm"), std::invalid_argument);

  CHECK(variant_kind(Variant::LTRSPHMM1) == TopologyKind::LeftToRight);
  CHECK(variant_kind(Variant::LTRSPHMM2) == TopologyKind::LeftToRight);
  CHECK(variant_kind(Variant::CSPHMM1) == TopologyKind::Circular);
  CHECK(variant_kind(Variant::CSPHMM2) == TopologyKind::Circular);
  CHECK(variant_order(Variant::LTRSPHMM1) == 1);
  CHECK(variant_order(Variant::CSPHMM1) == 1);
  CHECK(variant_order(Variant::LTRSPHMM2) == 2);
  CHECK(variant_order(Variant::CSPHMM2) == 2);
}

TEST_CASE("a single candidate wins with infinite margin") {
  const std::vector<SpeakerScore> scores = {{"solo", -12.0, -3.0}};
  const IdentificationResult res = fuse_and_rank(scores, 0.5);
  CHECK(res.winner == "solo");
  CHECK(res.ranked.size() == 1);
  CHECK(std::isinf(res.margin));
  CHECK(res.margin > 0.0);
  CHECK_FALSE(res.tie);
}

TEST_CASE("margins come out exactly for hand-picked scores") {
  const std::vector<SpeakerScore> scores = {{"a", -10.0, -20.0}, {"b", -30.0, -36.0}};
  const IdentificationResult res = fuse_and_rank(scores, 0.25);
  CHECK(res.winner == "a");
  CHECK(res.ranked[0].second.fused == -12.5);
  CHECK(res.ranked[1].second.fused == -31.5);
  CHECK(res.margin == 19.0);
  CHECK_FALSE(res.tie);

  // At alpha = 1 only the prosodic side matters.
  const IdentificationResult pros = fuse_and_rank(scores, 1.0);
  CHECK(pros.ranked[0].second.fused == -20.0);
  CHECK(pros.margin == 16.0);
}

TEST_CASE("ranking ignores input order") {
  std::vector<SpeakerScore> scores = {
      {"p", -4.0, -8.0}, {"q", -2.0, -6.0}, {"r", -9.0, -1.0}, {"s", -5.0, -5.0}};
  const IdentificationResult forward = fuse_and_rank(scores, 0.5);
  std::reverse(scores.begin(), scores.end());
  const IdentificationResult backward = fuse_and_rank(scores, 0.5);
  REQUIRE(forward.ranked.size() == backward.ranked.size());
  for (std::size_t i = 0; i < forward.ranked.size(); ++i) {
    CHECK(forward.ranked[i].first == backward.ranked[i].first);
    CHECK(forward.ranked[i].second.fused == backward.ranked[i].second.fused);
  }
  for (std::size_t i = 1; i < forward.ranked.size(); ++i) {
    CHECK(forward.ranked[i - 1].second.fused >= forward.ranked[i].second.fused);
  }
}

TEST_CASE("exact ties fall to the smaller speaker id and are flagged") {
  const std::vector<SpeakerScore> scores = {{"beta", -7.0, -9.0}, {"alpha", -7.0, -9.0}};
  const IdentificationResult res = fuse_and_rank(scores, 0.5);
  CHECK(res.winner == "alpha");
  CHECK(res.tie);
  CHECK(res.margin == 0.0);
}

TEST_CASE("unscorable candidates sink to the bottom") {
  const std::vector<SpeakerScore> scores = {{"ok", -50.0, -60.0}, {"broken", kNegInf, kNegInf}};
  const IdentificationResult res = fuse_and_rank(scores, 0.5);
  CHECK(res.winner == "ok");
  CHECK(res.ranked.back().first == "broken");
  CHECK(res.ranked.back().second.fused == kNegInf);
  CHECK(std::isinf(res.margin));
  CHECK_THROWS_AS((void)fuse_and_rank({}, 0.5), std::invalid_argument);
}

TEST_CASE("enrollment is deterministic and rejects empty input") {
  Rng rng(2024);
  std::vector<AudioBuffer> takes;
  for (int u = 0; u < 3; ++u) takes.push_back(tone_utterance(130.0, rng));
  const EnrollOptions opts = fast_enroll_options();

  const SpeakerModel first = enroll("spk", "s1", Variant::LTRSPHMM1, takes, opts);
  const SpeakerModel second = enroll("spk", "s1", Variant::LTRSPHMM1, takes, opts);
  CHECK(canonical_json(speaker_model_to_json(first)) ==
        canonical_json(speaker_model_to_json(second)));
  CHECK(first.speaker_id == "spk");
  CHECK(first.sentence_id == "s1");
  CHECK(first.acoustic.num_states() == 3);
  CHECK(first.suprasegmental.num_states() == 3);

  CHECK_THROWS_AS((void)enroll("spk", "s1", Variant::LTRSPHMM1, {}, opts), std::invalid_argument);
  EnrollOptions bad = opts;
  bad.group_size = 2;  // does not divide 3 states
  CHECK_THROWS_AS((void)enroll("spk", "s1", Variant::LTRSPHMM1, takes, bad), std::invalid_argument);
}

TEST_CASE("registry stores, orders, and persists models") {
  Rng rng(515);
  const EnrollOptions opts = fast_enroll_options();
  std::vector<SpeakerModel> models;
  for (const char *spk : {"zoe", "amy"}) {
    std::vector<AudioBuffer> takes;
    for (int u = 0; u < 2; ++u) takes.push_back(tone_utterance(spk[0] == 'z' ? 120.0 : 180.0, rng));
    models.push_back(enroll(spk, "s1", Variant::LTRSPHMM1, takes, opts));
  }

  TempDir tmp("registry");
  {
    Registry disk(tmp.path.string());
    for (const auto &m : models) disk.put(m);
    CHECK(disk.size() == 2);
    CHECK(disk.find("amy", "s1", Variant::LTRSPHMM1) != nullptr);
    CHECK(disk.find("amy", "s1", Variant::CSPHMM1) == nullptr);
    CHECK(disk.find("bob", "s1", Variant::LTRSPHMM1) == nullptr);
  }

  Registry back(tmp.path.string());
  back.open();
  CHECK(back.size() == 2);
  CHECK(back.speaker_ids() == std::vector<std::string>{"amy", "zoe"});
  const auto listed = back.models_for("s1", Variant::LTRSPHMM1);
  REQUIRE(listed.size() == 2);
  CHECK(listed[0]->speaker_id == "amy");
  CHECK(listed[1]->speaker_id == "zoe");
  CHECK(back.models_for("s2", Variant::LTRSPHMM1).empty());
  for (const auto &m : models) {
    const SpeakerModel *got = back.find(m.speaker_id, "s1", Variant::LTRSPHMM1);
    REQUIRE(got != nullptr);
    CHECK(canonical_json(speaker_model_to_json(*got)) ==
          canonical_json(speaker_model_to_json(m)));
  }

  // Replacement keeps the size and the all_models order stable.
  Registry mem;
  for (const auto &m : models) mem.put(m);
  mem.put(models[0]);
  CHECK(mem.size() == 2);
  const auto all = mem.all_models();
  REQUIRE(all.size() == 2);
  CHECK(all[0]->speaker_id == "amy");
  CHECK(all[1]->speaker_id == "zoe");

  CHECK_THROWS_AS(Registry().open(), std::logic_error);
  TempDir garbage("badindex");
  {
    std::ofstream out(garbage.path / "index.json");
    out << "{\"foo\": 1}\n";
  }
  Registry corrupt(garbage.path.string());
  CHECK_THROWS_AS(corrupt.open(), std::runtime_error);
}

TEST_CASE("identification picks the matching register and scores deterministically") {
  Rng rng(606);
  const EnrollOptions opts = fast_enroll_options();
  Registry registry;
  const double registers[2] = {115.0, 185.0};
  const char *speakers[2] = {"low", "high"};
  for (int spk = 0; spk < 2; ++spk) {
    std::vector<AudioBuffer> takes;
    for (int u = 0; u < 4; ++u) takes.push_back(tone_utterance(registers[spk], rng));
    registry.put(enroll(speakers[spk], "s1", Variant::LTRSPHMM1, takes, opts));
  }

  for (int spk = 0; spk < 2; ++spk) {
    const AudioBuffer probe = tone_utterance(registers[spk], rng);
    const IdentificationResult res = identify(registry, probe, "s1", Variant::LTRSPHMM1, 0.5);
    CHECK(res.winner == speakers[spk]);
    CHECK(res.margin > 0.0);
    CHECK(res.ranked.size() == 2);

    IdentifyOptions serial;
    serial.threads = 1;
    IdentifyOptions parallel;
    parallel.threads = 2;
    const auto s1 = score_all(registry, probe, "s1", Variant::LTRSPHMM1, serial);
    const auto s2 = score_all(registry, probe, "s1", Variant::LTRSPHMM1, parallel);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].speaker_id == s2[i].speaker_id);
      CHECK(s1[i].acoustic_logp == s2[i].acoustic_logp);
      CHECK(s1[i].prosodic_logp == s2[i].prosodic_logp);
    }
    CHECK(std::is_sorted(s1.begin(), s1.end(), [](const auto &a, const auto &b) {
      return a.speaker_id < b.speaker_id;
    }));

    // Per-frame normalization shrinks magnitudes without breaking scoring.
    IdentifyOptions norm;
    norm.per_frame_normalize = true;
    const auto sn = score_all(registry, probe, "s1", Variant::LTRSPHMM1, norm);
    for (std::size_t i = 0; i < sn.size(); ++i) {
      CHECK(std::abs(sn[i].acoustic_logp) < std::abs(s1[i].acoustic_logp));
    }
  }

  const AudioBuffer probe = tone_utterance(150.0, rng);
  CHECK_THROWS_AS((void)identify(registry, probe, "s9", Variant::LTRSPHMM1, 0.5),
                  std::runtime_error);
  CHECK_THROWS_AS((void)identify(registry, probe, "s1", Variant::CSPHMM2, 0.5),
                  std::runtime_error);
}

}  // TEST_SUITE

// sphmm/eval.hpp

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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sphmm/manifest.hpp"
#include "sphmm/speaker_id.hpp"

namespace sphmm {

/// One identification attempt. Environment and gender come from corpus
/// metadata, never from the audio.
struct TrialRecord {
  std::string path;
  std::string true_speaker;
  std::string predicted_speaker;  // empty when the utterance was unscorable
  std::string sentence;
  Environment environment = Environment::Neutral;
  Gender gender = Gender::Male;
  Variant variant = Variant::LTRSPHMM1;
  double alpha = 0.5;
  bool correct = false;
  bool tie = false;
  double margin = 0.0;
};

struct AccuracyCell {
  int correct = 0;
  int total = 0;

  double percent() const { return 100.0 * correct / total; }
};

/// One table row: per-gender cells plus their average. A gender with no
/// trials is absent, and the average covers only populated cells.
struct AccuracyRow {
  std::optional<AccuracyCell> male;
  std::optional<AccuracyCell> female;
  std::optional<double> average;
};

/// Rows keyed by (variant, environment) as strings, ordered.
using AccuracyTable = std::map<std::pair<std::string, std::string>, AccuracyRow>;

AccuracyTable accuracy_table(const std::vector<TrialRecord> &records);

struct TTestResult {
  double t_value = 0.0;
  int n = 0;
  double sd_pooled = 0.0;
  bool significant = false;  // t_value > 1.645
};

inline constexpr double kTCritical = 1.645;  // one-sided, 0.05 level

/// Student t statistic between two equal-sized accuracy samples:
/// t = (mean_a - mean_b) / sqrt((SD_a^2 + SD_b^2) / n), with sample
/// (n-1) standard deviations. Identical means with zero spread give t = 0;
/// distinct means with zero spread give an infinite sentinel.
TTestResult t_statistic(const std::vector<double> &sample_a, const std::vector<double> &sample_b);

/// Per-speaker scores of one test utterance, before fusion.
struct ScoredUtterance {
  ManifestEntry meta;
  std::vector<SpeakerScore> scores;  // empty when no model could score it
};

struct EvalOptions {
  IdentifyOptions identify;  // per-speaker scoring knobs
  int threads = 0;           // parallelism across utterances
};

/// Scores every test-session utterance of the manifest against the models
/// registered for its sentence. Scores are alpha-independent; fusion
/// happens later. Order matches the manifest's test entries.
std::vector<ScoredUtterance> score_corpus(const Registry &registry, const CorpusManifest &manifest,
                                          Variant variant, const EvalOptions &opts = {});

/// Fuses cached scores at one alpha and grades the trials.
std::vector<TrialRecord> trials_at_alpha(const std::vector<ScoredUtterance> &scored,
                                         Variant variant, double alpha);

/// score_corpus + trials_at_alpha over a set of alphas.
std::vector<TrialRecord> evaluate_corpus(const Registry &registry, const CorpusManifest &manifest,
                                         Variant variant, const std::vector<double> &alphas,
                                         const EvalOptions &opts = {});

inline std::vector<double> default_sweep_alphas() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

struct SweepPoint {
  double alpha = 0.0;
  int correct = 0;
  int total = 0;

  double percent() const { return 100.0 * correct / total; }
};

/// Accuracy-vs-alpha curve per environment, from one shared scoring pass.
struct AlphaSweepResult {
  std::map<std::string, std::vector<SweepPoint>> curves;  // key: environment
  std::vector<TrialRecord> trials;
};

AlphaSweepResult alpha_sweep(const Registry &registry, const CorpusManifest &manifest,
                             Variant variant, const std::vector<double> &alphas,
                             const EvalOptions &opts = {});

/// Sweep assembly over an existing scoring pass, for callers that already
/// hold the cached scores.
AlphaSweepResult sweep_from_scored(const std::vector<ScoredUtterance> &scored, Variant variant,
                                   const std::vector<double> &alphas);

/// Random equal partition of [0, n) into k index subsets, sizes within 1.
std::vector<std::vector<std::size_t>> partition_indices(std::size_t n, int k, std::uint64_t seed);

struct CrossValOptions {
  int num_subsets = 5;
  std::uint64_t seed = 20100101ull;
  double alpha = 0.5;
  int train_per_cell = 0;  // cap on takes per (speaker, sentence); 0 = all
  EnrollOptions enroll;
  EvalOptions eval;
};

struct CrossValEnvStats {
  std::vector<double> per_subset;  // accuracy percentages
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over subsets
};

struct CrossValResult {
  std::vector<std::vector<std::size_t>> subsets;  // manifest entry indices
  std::map<std::string, CrossValEnvStats> stats;  // "neutral", "shouted", "overall"
  std::vector<std::vector<TrialRecord>> per_subset_trials;
  std::vector<std::string> warnings;
};

/// Partitions the corpus, then independently per subset: enrolls models on
/// the subset's training-session takes and grades the subset's test-session
/// takes at the fixed alpha. Cells that cannot be enrolled inside a subset
/// leave their trials counted as incorrect, with a warning.
CrossValResult cross_validate(const CorpusManifest &manifest, Variant variant,
                              const CrossValOptions &opts);

}  // namespace sphmm

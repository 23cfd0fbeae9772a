// sphmm/experiment.hpp

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

#include <string>
#include <vector>

#include "sphmm/config.hpp"
#include "sphmm/eval.hpp"

namespace sphmm {

/// Everything computed for one model variant during an experiment run.
struct VariantOutcome {
  Variant variant = Variant::LTRSPHMM1;
  std::vector<TrialRecord> trials;  // at the configured alpha
  bool has_sweep = false;
  AlphaSweepResult sweep;
  bool has_crossval = false;
  CrossValResult crossval;
  std::vector<std::string> warnings;
};

struct PairwiseTTest {
  Variant variant_a = Variant::LTRSPHMM1;
  Variant variant_b = Variant::LTRSPHMM1;
  std::string group;  // "neutral", "shouted" or "overall"
  TTestResult test;
};

struct ExperimentReport {
  std::vector<VariantOutcome> variants;
  AccuracyTable table;
  std::vector<PairwiseTTest> ttests;
  std::vector<std::string> warnings;
};

/// Enrolls every (speaker, sentence) training group of the manifest into an
/// in-memory registry for one variant. Enrollment runs in parallel across
/// groups; the registry contents do not depend on scheduling.
Registry enroll_manifest(const CorpusManifest &manifest, Variant variant,
                         const EnrollOptions &opts, int threads,
                         std::vector<std::string> *warnings = nullptr);

/// Full pipeline per the configuration: enroll, evaluate at the fixed
/// alpha, then optionally sweep alpha, cross-validate and run pairwise
/// t tests (t tests use per-subset cross-validation accuracies as samples,
/// so they imply cross-validation). Every stage failure is rethrown with a
/// stage tag. Writes the report bundle into cfg.output_dir; outputs carry
/// no timestamps, so a rerun with identical inputs is byte-identical.
ExperimentReport run_experiment(const ExperimentConfig &cfg);

/// The individual report files; exposed for the CLI and tests.
void write_trials_csv(const std::string &path, const std::vector<TrialRecord> &trials);
void write_accuracy_csv(const std::string &path, const AccuracyTable &table);
void write_ttests_csv(const std::string &path, const std::vector<PairwiseTTest> &tests);
void write_sweep_csv(const std::string &path, const std::vector<VariantOutcome> &outcomes);
void write_crossval_csv(const std::string &path, const std::vector<VariantOutcome> &outcomes);
std::string render_report_text(const ExperimentReport &report, const ExperimentConfig &cfg);

}  // namespace sphmm

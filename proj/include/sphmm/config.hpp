// sphmm/config.hpp

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

#include <map>
#include <string>
#include <vector>

#include "sphmm/eval.hpp"
#include "sphmm/synth.hpp"

namespace sphmm {

/// Flat sectioned key-value text:
///   # comment
///   [section]
///   key = value
/// Unsectioned keys go to the "" section. Duplicate keys within a section
/// are an error, as is any syntax the grammar above does not cover.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string &text, const std::string &origin = "<config>");
ConfigMap parse_config_file(const std::string &path);

/// Everything run_experiment needs. Every tolerance, seed and count of the
/// underlying stages is settable from the config file; CLI flags override
/// further.
struct ExperimentConfig {
  std::string corpus_dir;
  std::string manifest_name = "manifest.csv";
  std::string output_dir = "results";
  std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
  double alpha = 0.5;
  bool run_ttests = true;   // pairwise between variants, on cross-validation samples
  bool run_sweep = false;
  std::vector<double> sweep_alphas = default_sweep_alphas();
  bool run_crossval = false;
  int crossval_subsets = 5;
  int crossval_train_per_cell = 0;
  EnrollOptions enroll;
  EvalOptions eval;
  std::uint64_t seed = 20100101ull;
};

/// Builds configs from parsed text, rejecting unknown sections or keys so
/// typos never silently fall back to defaults.
ExperimentConfig experiment_config_from(const ConfigMap &map);
SynthConfig synth_config_from(const ConfigMap &map);

}  // namespace sphmm

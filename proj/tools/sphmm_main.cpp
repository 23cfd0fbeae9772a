// sphmm command-line interface.

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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sphmm/config.hpp"
#include "sphmm/experiment.hpp"
#include "sphmm/manifest.hpp"
#include "sphmm/synth.hpp"

namespace fs = std::filesystem;
using namespace sphmm;

namespace {

ConfigMap load_config_map(const std::string &path) {
  if (path.empty()) return {};
  return parse_config_file(path);
}

int cmd_synth(const std::string &config_path, const std::string &out_dir,
              std::optional<int> speakers, std::optional<int> sentences,
              std::optional<std::uint64_t> seed, std::optional<int> threads) {
  SynthConfig cfg = synth_config_from(load_config_map(config_path));
  if (speakers) cfg.num_speakers = *speakers;
  if (sentences) cfg.num_sentences = *sentences;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  const CorpusManifest manifest = synth_corpus(cfg, out_dir);
  std::cout << "wrote " << manifest.size() << " utterances for " << cfg.num_speakers
            << " speakers x " << cfg.num_sentences << " sentences to " << out_dir << "\n";
  return 0;
}

int cmd_ingest(const std::string &root, std::string manifest_path) {
  if (manifest_path.empty()) manifest_path = (fs::path(root) / "manifest.csv").string();
  const CorpusManifest manifest = ingest_corpus(root, manifest_path);
  std::cout << "ingested " << manifest.size() << " utterances from " << root << "\n";
  const auto violations = protocol_violations(manifest);
  if (violations.empty()) {
    std::cout << "protocol counts: ok (5 neutral train / 4 neutral test / 9 shouted test per cell)\n";
  } else {
    std::cout << "protocol counts: " << violations.size()
              << " deviation(s) from the 5/4/9 protocol (corpus still usable):\n";
    for (const auto &v : violations) std::cout << "  - " << v << "\n";
  }
  return 0;
}

int cmd_enroll(const std::string &config_path, const std::string &corpus_dir,
               const std::string &registry_dir, const std::string &variant_name,
               std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = experiment_config_from(load_config_map(config_path));
  if (seed) cfg.enroll.seed = *seed;
  const Variant variant = variant_from_string(variant_name);
  const CorpusManifest manifest =
      ingest_corpus(corpus_dir, (fs::path(corpus_dir) / cfg.manifest_name).string());

  std::vector<std::string> warnings;
  const Registry memory = enroll_manifest(manifest, variant, cfg.enroll, cfg.eval.threads, &warnings);

  Registry disk(registry_dir);
  for (const SpeakerModel *model : memory.all_models()) disk.put(*model);

  std::cout << "enrolled " << disk.size() << " (speaker, sentence) models into " << registry_dir
            << "\n";
  for (const auto &w : warnings) std::cout << "warning: " << w << "\n";
  return warnings.empty() ? 0 : 1;
}

int cmd_identify(const std::string &config_path, const std::string &registry_dir,
                 const std::string &wav_path, const std::string &sentence,
                 const std::string &variant_name, std::optional<double> alpha) {
  ExperimentConfig cfg = experiment_config_from(load_config_map(config_path));
  if (alpha) cfg.alpha = *alpha;
  const Variant variant = variant_from_string(variant_name);

  Registry registry(registry_dir);
  registry.open();
  const AudioBuffer audio = read_wav(wav_path);
  const IdentificationResult res = identify(registry, audio, sentence, variant, cfg.alpha,
                                            cfg.eval.identify);

  std::cout << "winner: " << res.winner;
  if (res.tie) std::cout << "  (exact tie, lowest speaker id wins)";
  std::cout << "\nmargin: " << res.margin << "\n";
  std::printf("%-4s %-16s %14s %14s %14s\n", "rank", "speaker", "fused", "acoustic", "prosodic");
  int rank = 1;
  for (const auto &[speaker, score] : res.ranked) {
    std::printf("%-4d %-16s %14.4f %14.4f %14.4f\n", rank++, speaker.c_str(), score.fused,
                score.acoustic_logp, score.prosodic_logp);
  }
  return 0;
}

// Shared by evaluate / sweep-alpha / crossval / report: assemble the
// config, apply CLI overrides, run the pipeline, echo the report.
int run_pipeline(ExperimentConfig cfg) {
  const ExperimentReport report = run_experiment(cfg);
  std::cout << render_report_text(report, cfg);
  std::cout << "report bundle written to " << cfg.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"speaker identification with acoustic and prosodic chain models"};
  app.require_subcommand(1);

  std::string config_path, corpus_dir, out_dir, registry_dir, wav_path, sentence, variant_name,
      manifest_path, root_dir;
  std::optional<int> speakers, sentences, threads, subsets;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::vector<std::string> variant_names;

  auto *synth = app.add_subcommand("synth-corpus", "generate a synthetic speaker corpus");
  synth->add_option("--config", config_path, "configuration file");
  synth->add_option("--out", out_dir, "corpus output directory")->required();
  synth->add_option("--speakers", speakers, "number of speakers");
  synth->add_option("--sentences", sentences, "number of sentences");
  synth->add_option("--seed", seed, "corpus seed");
  synth->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto *ingest = app.add_subcommand("ingest", "validate a corpus directory and its manifest");
  ingest->add_option("--root", root_dir, "corpus root directory")->required();
  ingest->add_option("--manifest", manifest_path, "manifest CSV (default: <root>/manifest.csv)");

  auto *enroll_cmd = app.add_subcommand("enroll", "train reference models from training takes");
  enroll_cmd->add_option("--config", config_path, "configuration file");
  enroll_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  enroll_cmd->add_option("--registry", registry_dir, "model registry directory")->required();
  enroll_cmd->add_option("--variant", variant_name, "ltrsphmm1|ltrsphmm2|csphmm1|csphmm2")->required();
  enroll_cmd->add_option("--seed", seed, "training seed");

  auto *identify_cmd = app.add_subcommand("identify", "identify the speaker of one utterance");
  identify_cmd->add_option("--config", config_path, "configuration file");
  identify_cmd->add_option("--registry", registry_dir, "model registry directory")->required();
  identify_cmd->add_option("--wav", wav_path, "utterance WAV file")->required();
  identify_cmd->add_option("--sentence", sentence, "sentence id of the utterance")->required();
  identify_cmd->add_option("--variant", variant_name, "model variant")->required();
  identify_cmd->add_option("--alpha", alpha, "fusion weight in [0, 1]");

  auto *evaluate_cmd = app.add_subcommand("evaluate", "enroll and grade all test takes");
  evaluate_cmd->add_option("--config", config_path, "configuration file");
  evaluate_cmd->add_option("--corpus", corpus_dir, "corpus directory");
  evaluate_cmd->add_option("--out", out_dir, "report output directory");
  evaluate_cmd->add_option("--variants", variant_names, "variants to evaluate")->delimiter(',');
  evaluate_cmd->add_option("--alpha", alpha, "fusion weight in [0, 1]");
  evaluate_cmd->add_option("--seed", seed, "experiment seed");
  evaluate_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto *sweep_cmd = app.add_subcommand("sweep-alpha", "accuracy across fusion weights");
  sweep_cmd->add_option("--config", config_path, "configuration file");
  sweep_cmd->add_option("--corpus", corpus_dir, "corpus directory");
  sweep_cmd->add_option("--out", out_dir, "report output directory");
  sweep_cmd->add_option("--variants", variant_names, "variants to sweep")->delimiter(',');
  sweep_cmd->add_option("--seed", seed, "experiment seed");
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto *crossval_cmd = app.add_subcommand("crossval", "subset cross-validation");
  crossval_cmd->add_option("--config", config_path, "configuration file");
  crossval_cmd->add_option("--corpus", corpus_dir, "corpus directory");
  crossval_cmd->add_option("--out", out_dir, "report output directory");
  crossval_cmd->add_option("--variants", variant_names, "variants to cross-validate")->delimiter(',');
  crossval_cmd->add_option("--subsets", subsets, "number of subsets");
  crossval_cmd->add_option("--seed", seed, "experiment seed");
  crossval_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto *report_cmd = app.add_subcommand("report", "full pipeline driven by the configuration file");
  report_cmd->add_option("--config", config_path, "configuration file")->required();
  report_cmd->add_option("--corpus", corpus_dir, "corpus directory override");
  report_cmd->add_option("--out", out_dir, "report output directory override");
  report_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return cmd_synth(config_path, out_dir, speakers, sentences, seed, threads);
    }
    if (ingest->parsed()) {
      return cmd_ingest(root_dir, manifest_path);
    }
    if (enroll_cmd->parsed()) {
      return cmd_enroll(config_path, corpus_dir, registry_dir, variant_name, seed);
    }
    if (identify_cmd->parsed()) {
      return cmd_identify(config_path, registry_dir, wav_path, sentence, variant_name, alpha);
    }

    ExperimentConfig cfg = experiment_config_from(load_config_map(config_path));
    if (!corpus_dir.empty()) cfg.corpus_dir = corpus_dir;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!variant_names.empty()) {
      cfg.variants.clear();
      for (const auto &name : variant_names) cfg.variants.push_back(variant_from_string(name));
    }
    if (alpha) cfg.alpha = *alpha;
    if (seed) {
      cfg.seed = *seed;
      cfg.enroll.seed = *seed;
    }
    if (threads) cfg.eval.threads = *threads;

    if (evaluate_cmd->parsed()) {
      cfg.run_sweep = false;
      cfg.run_crossval = false;
      cfg.run_ttests = false;
    } else if (sweep_cmd->parsed()) {
      cfg.run_sweep = true;
      cfg.run_crossval = false;
      cfg.run_ttests = false;
    } else if (crossval_cmd->parsed()) {
      cfg.run_sweep = false;
      cfg.run_crossval = true;
      cfg.run_ttests = false;
      if (subsets) cfg.crossval_subsets = *subsets;
    }
    return run_pipeline(cfg);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

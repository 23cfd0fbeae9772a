// sphmm/manifest.hpp

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

namespace sphmm {

enum class Environment { Neutral, Shouted };
enum class Session { Train, Test };
enum class Gender { Male, Female };

std::string to_string(Environment e);
std::string to_string(Session s);
std::string to_string(Gender g);
Environment environment_from_string(const std::string &s);
Session session_from_string(const std::string &s);
Gender gender_from_string(const std::string &s);

/// One corpus utterance. `path` is relative to the corpus root.
struct ManifestEntry {
  std::string path;
  std::string speaker;
  Gender gender = Gender::Male;
  std::string sentence;
  Environment environment = Environment::Neutral;
  Session session = Session::Train;
  int take = 0;
};

/// Catalog of a corpus directory. Entries carry all labels used by
/// evaluation; nothing is ever inferred from audio.
struct CorpusManifest {
  std::string root;  // directory the entry paths are relative to
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// CSV column order for manifest files.
inline constexpr const char *kManifestHeader = "path,speaker,gender,sentence,environment,session,take";

/// Parses a manifest CSV. Strict: exact header, 7 columns per row, known
/// enum values, non-negative takes. Throws with the offending line number.
CorpusManifest read_manifest(const std::string &csv_path, const std::string &root);

void write_manifest(const CorpusManifest &manifest, const std::string &csv_path);

/// Duplicate (speaker, sentence, environment, session, take) keys, listed
/// as human-readable strings; empty when the manifest is well-formed.
std::vector<std::string> duplicate_keys(const CorpusManifest &manifest);

/// Checks the enrollment/test protocol counts: per (speaker, sentence),
/// 5 neutral train takes, 4 neutral test takes, 9 shouted test takes.
/// Returns one message per violation; empty when compliant.
std::vector<std::string> protocol_violations(const CorpusManifest &manifest);

/// Loads and validates a corpus: parses the manifest, checks for duplicate
/// keys and verifies every referenced WAV opens as 16-bit mono PCM. All
/// problems are gathered and thrown together as an itemized report.
CorpusManifest ingest_corpus(const std::string &root_dir, const std::string &manifest_file);

}  // namespace sphmm

// sphmm/manifest.cpp

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

#include "sphmm/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sphmm/audio.hpp"

namespace sphmm {

namespace fs = std::filesystem;

std::string to_string(Environment e) { return e == Environment::Neutral ? "neutral" : "shouted"; }
std::string to_string(Session s) { return s == Session::Train ? "train" : "test"; }
std::string to_string(Gender g) { return g == Gender::Male ? "male" : "female"; }

Environment environment_from_string(const std::string &s) {
  if (s == "neutral") return Environment::Neutral;
  if (s == "shouted") return Environment::Shouted;
  throw std::invalid_argument("unknown environment '" + s + "' (expected neutral or shouted)");
}

Session session_from_string(const std::string &s) {
  if (s == "train") return Session::Train;
  if (s == "test") return Session::Test;
  throw std::invalid_argument("unknown session '" + s + "' (expected train or test)");
}

Gender gender_from_string(const std::string &s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  throw std::invalid_argument("unknown gender '" + s + "' (expected male or female)");
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

std::string entry_key(const ManifestEntry &e) {
  return e.speaker + "/" + e.sentence + "/" + to_string(e.environment) + "/" +
         to_string(e.session) + "/take" + std::to_string(e.take);
}

}  // namespace

CorpusManifest read_manifest(const std::string &csv_path, const std::string &root) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("manifest: cannot open " + csv_path);

  CorpusManifest manifest;
  manifest.root = root;

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("manifest: " + csv_path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw std::runtime_error("manifest: " + csv_path + " has header '" + line + "', expected '" +
                             kManifestHeader + "'");
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) {
      throw std::runtime_error("manifest: " + csv_path + ":" + std::to_string(lineno) + ": expected 7 columns, got " +
                               std::to_string(fields.size()));
    }
    ManifestEntry e;
    try {
      e.path = fields[0];
      e.speaker = fields[1];
      e.gender = gender_from_string(fields[2]);
      e.sentence = fields[3];
      e.environment = environment_from_string(fields[4]);
      e.session = session_from_string(fields[5]);
      e.take = std::stoi(fields[6]);
    } catch (const std::exception &ex) {
      throw std::runtime_error("manifest: " + csv_path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    if (e.path.empty()) {
      throw std::runtime_error("manifest: " + csv_path + ":" + std::to_string(lineno) + ": empty path");
    }
    if (e.take < 0) {
      throw std::runtime_error("manifest: " + csv_path + ":" + std::to_string(lineno) + ": negative take index");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const CorpusManifest &manifest, const std::string &csv_path) {
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("manifest: cannot open " + csv_path + " for writing");
  out << kManifestHeader << "\n";
  for (const auto &e : manifest.entries) {
    out << e.path << ',' << e.speaker << ',' << to_string(e.gender) << ',' << e.sentence << ','
        << to_string(e.environment) << ',' << to_string(e.session) << ',' << e.take << "\n";
  }
  if (!out) throw std::runtime_error("manifest: short write to " + csv_path);
}

std::vector<std::string> duplicate_keys(const CorpusManifest &manifest) {
  std::set<std::string> seen;
  std::vector<std::string> dups;
  for (const auto &e : manifest.entries) {
    const std::string key = entry_key(e);
    if (!seen.insert(key).second) dups.push_back(key);
  }
  return dups;
}

std::vector<std::string> protocol_violations(const CorpusManifest &manifest) {
  struct Counts {
    int neutral_train = 0, neutral_test = 0, shouted_test = 0, shouted_train = 0;
  };
  std::map<std::pair<std::string, std::string>, Counts> per_cell;
  for (const auto &e : manifest.entries) {
    Counts &c = per_cell[{e.speaker, e.sentence}];
    if (e.environment == Environment::Neutral) {
      (e.session == Session::Train ? c.neutral_train : c.neutral_test)++;
    } else {
      (e.session == Session::Train ? c.shouted_train : c.shouted_test)++;
    }
  }
  std::vector<std::string> violations;
  for (const auto &[cell, c] : per_cell) {
    const std::string where = "speaker " + cell.first + ", sentence " + cell.second;
    if (c.neutral_train != 5) {
      violations.push_back(where + ": expected 5 neutral train takes, found " + std::to_string(c.neutral_train));
    }
    if (c.neutral_test != 4) {
      violations.push_back(where + ": expected 4 neutral test takes, found " + std::to_string(c.neutral_test));
    }
    if (c.shouted_test != 9) {
      violations.push_back(where + ": expected 9 shouted test takes, found " + std::to_string(c.shouted_test));
    }
    if (c.shouted_train != 0) {
      violations.push_back(where + ": found " + std::to_string(c.shouted_train) +
                           " shouted train takes; the protocol trains on neutral speech only");
    }
  }
  return violations;
}

CorpusManifest ingest_corpus(const std::string &root_dir, const std::string &manifest_file) {
  CorpusManifest manifest = read_manifest(manifest_file, root_dir);
  std::vector<std::string> problems;

  if (manifest.entries.empty()) {
    throw std::runtime_error("ingest: " + manifest_file + ": no entries");
  }
  for (const auto &dup : duplicate_keys(manifest)) {
    problems.push_back("duplicate entry: " + dup);
  }
  for (const auto &e : manifest.entries) {
    const fs::path file = fs::path(root_dir) / e.path;
    if (!fs::exists(file)) {
      problems.push_back("missing file: " + e.path);
      continue;
    }
    try {
      read_wav(file.string());
    } catch (const std::exception &ex) {
      problems.push_back(std::string("unreadable audio: ") + ex.what());
    }
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "ingest: " << problems.size() << " problem(s) in " << manifest_file << ":";
    for (const auto &p : problems) msg << "\n  - " << p;
    throw std::runtime_error(msg.str());
  }
  return manifest;
}

}  // namespace sphmm

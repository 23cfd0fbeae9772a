// sphmm/model_io.hpp

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

#include <nlohmann/json.hpp>

#include "sphmm/frontend.hpp"
#include "sphmm/hmm.hpp"
#include "sphmm/suprasegmental.hpp"

namespace sphmm {

// JSON documents use object keys in sorted order (the library default) and
// shortest round-trip number formatting, so equal models serialize to
// byte-identical text. Structural transition masks are rebuilt from the
// topology on load; only the probabilities travel.

nlohmann::json frontend_to_json(const FrontendConfig &cfg);
FrontendConfig frontend_from_json(const nlohmann::json &doc);

nlohmann::json hmm_to_json(const Hmm &hmm);
Hmm hmm_from_json(const nlohmann::json &doc);

nlohmann::json suprasegmental_to_json(const SuprasegmentalHmm &pros);
SuprasegmentalHmm suprasegmental_from_json(const nlohmann::json &doc);

/// Canonical text form: 2-space indent, trailing newline.
std::string canonical_json(const nlohmann::json &doc);

/// Writes text through a temp file in the same directory plus rename, so a
/// reader never observes a half-written document.
void write_text_atomic(const std::string &path, const std::string &content);

std::string read_text_file(const std::string &path);

}  // namespace sphmm

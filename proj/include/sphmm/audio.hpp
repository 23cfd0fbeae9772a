// sphmm/audio.hpp

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
#include <string>
#include <vector>

namespace sphmm {

/// Mono 16-bit PCM audio held in memory.
struct AudioBuffer {
  std::vector<std::int16_t> samples;
  int sample_rate = 16000;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a RIFF/WAVE file. Only uncompressed 16-bit mono PCM is accepted;
/// anything else throws with a message naming the offending property.
/// A sample rate other than 16 kHz is accepted but appends a note to
/// `warnings` when that pointer is non-null.
AudioBuffer read_wav(const std::string &path,
                     std::vector<std::string> *warnings = nullptr);

/// Writes `audio` as a canonical 44-byte-header PCM WAV file.
void write_wav(const std::string &path, const AudioBuffer &audio);

}  // namespace sphmm

// sphmm/audio.cpp

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

#include "sphmm/audio.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sphmm {

namespace {

std::uint32_t read_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string &out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

[[noreturn]] void fail(const std::string &path, const std::string &why) {
  throw std::runtime_error("wav: " + path + ": " + why);
}

}  // namespace

AudioBuffer read_wav(const std::string &path, std::vector<std::string> *warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  const std::size_t n = bytes.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0) fail(path, "not a RIFF file");
  if (std::memcmp(p + 8, "WAVE", 4) != 0) fail(path, "not a WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const char *id = bytes.data() + pos;
    const std::uint32_t size = read_u32(p + pos + 4);
    pos += 8;
    if (pos + size > n) fail(path, "truncated chunk '" + std::string(id, 4) + "'");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) fail(path, "fmt chunk too small");
      format = read_u16(p + pos);
      channels = read_u16(p + pos + 2);
      rate = read_u32(p + pos + 4);
      bits = read_u16(p + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + pos;
      data_len = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) fail(path, "missing fmt chunk");
  if (data == nullptr) fail(path, "missing data chunk");
  if (format != 1) fail(path, "expected PCM (format 1), got format " + std::to_string(format));
  if (channels != 1) fail(path, "expected mono, got " + std::to_string(channels) + " channels");
  if (bits != 16) fail(path, "expected 16-bit samples, got " + std::to_string(bits) + "-bit");
  if (rate == 0) fail(path, "sample rate is zero");
  if (rate != 16000 && warnings != nullptr) {
    warnings->push_back("wav: " + path + ": sample rate " + std::to_string(rate) +
                        " Hz differs from the 16 kHz protocol rate");
  }

  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(rate);
  const std::size_t count = data_len / 2;
  audio.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    audio.samples[i] = static_cast<std::int16_t>(read_u16(data + 2 * i));
  }
  return audio;
}

void write_wav(const std::string &path, const AudioBuffer &audio) {
  const std::uint32_t data_len = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits
  out += "data";
  put_u32(out, data_len);
  for (std::int16_t s : audio.samples) {
    put_u16(out, static_cast<std::uint16_t>(s));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("wav: " + path + ": cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("wav: " + path + ": write failed");
}

}  // namespace sphmm

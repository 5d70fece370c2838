// src/wav.cpp

// Copyright 2026  SER Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ser/audio.hpp"

namespace ser::audio {

namespace {

// All WAV fields are little-endian.  The engine only runs on little-endian
// hosts in practice, but reads go through memcpy-based helpers anyway.
uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

}  // namespace

AudioClip decode_wav_bytes(const std::vector<uint8_t>& bytes,
                           const std::string& name) {
  const uint8_t* p = bytes.data();
  const size_t n = bytes.size();

  require(n >= 12, name, ": decode error in RIFF header: file too short");
  require(std::memcmp(p, "RIFF", 4) == 0,
          name, ": decode error in RIFF header: bad magic");
  require(std::memcmp(p + 8, "WAVE", 4) == 0,
          name, ": decode error in WAVE tag: not a WAVE file");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;

  size_t off = 12;
  while (off + 8 <= n) {
    char id[5] = {0};
    std::memcpy(id, p + off, 4);
    const uint32_t chunk_len = read_u32(p + off + 4);
    const size_t body = off + 8;
    if (body + chunk_len > n) {
      fail(name, ": decode error in ", id, " chunk: truncated (declares ",
           chunk_len, " bytes, ", n - body, " available)");
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      require(chunk_len >= 16, name, ": decode error in fmt chunk: too short");
      format = read_u16(p + body);
      channels = read_u16(p + body + 2);
      sample_rate = read_u32(p + body + 4);
      bits = read_u16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + body;
      data_len = chunk_len;
    }
    // Chunks are word-aligned; odd sizes carry one pad byte.
    off = body + chunk_len + (chunk_len & 1);
  }

  require(have_fmt, name, ": decode error in fmt chunk: missing");
  require(data != nullptr, name, ": decode error in data chunk: missing");
  require(sample_rate > 0, name, ": decode error in fmt chunk: zero sample rate");
  if (channels < 1 || channels > 2) {
    fail(name, ": unsupported format: ", channels, " channels");
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    fail(name, ": unsupported format: format code ", format, ", ", bits,
         " bits per sample");
  }

  const size_t bytes_per_frame = static_cast<size_t>(channels) * (bits / 8);
  if (data_len % bytes_per_frame != 0) {
    fail(name, ": decode error in data chunk: size ", data_len,
         " is not a whole number of frames");
  }
  const size_t frames = data_len / bytes_per_frame;
  require(frames > 0, name, ": decode error in data chunk: empty");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.samples.resize(frames);
  const double inv_channels = 1.0 / channels;
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const uint8_t* s = data + (i * channels + c) * (bits / 8);
      if (pcm16) {
        int16_t v;
        std::memcpy(&v, s, 2);
        acc += v / 32768.0;
      } else {
        float v;
        std::memcpy(&v, s, 4);
        if (!std::isfinite(v)) {
          fail(name, ": decode error in data chunk: non-finite sample at frame ",
               i);
        }
        acc += v;
      }
    }
    clip.samples[i] = acc * inv_channels;
  }
  return clip;
}

AudioClip decode_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), path, ": cannot open file");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return decode_wav_bytes(bytes, path);
}

std::vector<uint8_t> encode_wav_bytes(const AudioClip& clip) {
  require(clip.sample_rate > 0, "encode_wav: sample rate must be positive");
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_len = n * 2;

  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_len);
  for (double x : clip.samples) {
    const double clamped = std::clamp(x, -1.0, 1.0);
    const long q = std::lround(clamped * 32768.0);
    const int16_t v = static_cast<int16_t>(std::clamp(q, -32768L, 32767L));
    put_u16(out, static_cast<uint16_t>(v));
  }
  return out;
}

void encode_wav(const AudioClip& clip, const std::string& path) {
  const std::vector<uint8_t> bytes = encode_wav_bytes(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), path, ": cannot open file for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(out.good(), path, ": write failed");
}

}  // namespace ser::audio

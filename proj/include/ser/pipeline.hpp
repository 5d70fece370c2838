// include/ser/pipeline.hpp

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

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ser/config.hpp"
#include "ser/nn/checkpoint.hpp"

namespace ser::pipe {

// ---------------------------------------------------------------------------
// Stage wire contract: UTF-8 JSON, one object per line (subprocess) or an
// HTTP POST body.  A response echoes the request id and carries exactly one
// of output/error_message.
// ---------------------------------------------------------------------------

struct StageRequest {
  std::string id;
  std::string stage;    // asr | mt | tts
  std::string payload;  // audio path or text
  std::map<std::string, std::string> params;

  std::string to_json_line() const;
};

struct StageResponse {
  std::string id;
  bool ok = false;
  std::string output;
  std::string error_message;

  /// Parses and validates one JSON object; violations of the contract
  /// (shape, status, exclusivity) raise ProtocolError.
  static StageResponse from_json_text(const std::string& text);
};

/// Infrastructure failures (timeout, connection, no response); retried once.
class TransportError : public Error {
  using Error::Error;
};
/// The stage answered and failed (status=error, nonzero exit, HTTP != 200);
/// never retried.
class StageError : public Error {
  using Error::Error;
};
/// The stage answered with bytes that violate the wire contract.
class ProtocolError : public Error {
  using Error::Error;
};

class StageBinding {
 public:
  virtual ~StageBinding() = default;

  /// One transport attempt; throws the taxonomy above.
  virtual StageResponse call_once(const StageRequest& request) = 0;

  /// call_once with exactly one retry on TransportError and an id check.
  StageResponse call(const StageRequest& request);
};

/// Mock transport: canned responses from a fixtures map
/// payload -> string output, or payload -> {status, output|error_message}.
/// Lookup order: exact payload, basename, "*".
std::unique_ptr<StageBinding> make_mock_binding(const std::string& stage,
                                                const std::string& fixtures_json);

/// Per-call subprocess: the request is written to stdin as one JSON line,
/// the first stdout line is the response.  A nonzero exit without a
/// response is a StageError carrying the captured stderr.
std::unique_ptr<StageBinding> make_subprocess_binding(
    std::vector<std::string> argv, double timeout_s);

/// HTTP POST /stage with a JSON body.
std::unique_ptr<StageBinding> make_http_binding(const std::string& base_url,
                                                double timeout_s);

struct StageSet {
  std::unique_ptr<StageBinding> asr, mt, tts;

  bool complete() const { return asr && mt && tts; }
  /// Bindings file: {"asr": {...}, "mt": {...}, "tts": {...}}, each entry
  /// {"transport": "mock"|"subprocess"|"http", ...}.
  static StageSet from_bindings_file(const std::string& path,
                                     double default_timeout_s);
};

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

struct SessionRecord {
  std::string id;
  std::string input_audio;
  std::string emotion;
  double emotion_confidence = 0.0;
  std::optional<std::string> transcript_en;
  std::optional<std::string> translation_ar;
  std::optional<std::string> tts_audio;
  std::map<std::string, double> stage_timings_ms;
  std::optional<std::string> failed_stage;
  std::optional<std::string> error_message;

  bool failed() const { return failed_stage.has_value(); }
  std::string to_json_string() const;
  static SessionRecord from_json_string(const std::string& text);
};

/// Emotion detection locally (decode, resample, duration-fix, featurize,
/// scale, predict), then asr -> mt -> tts through the bindings, forwarding
/// the detected emotion to tts in params["emotion"].  A stage failure stops
/// the chain; the partial record names the failing stage.  Passing a null
/// or incomplete stage set runs emotion detection only.
SessionRecord run_pipeline(const std::string& wav_path, nn::Checkpoint& ck,
                           const EngineConfig& cfg, StageSet* stages);

}  // namespace ser::pipe

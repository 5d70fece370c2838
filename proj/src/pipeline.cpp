// src/pipeline.cpp

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

#include "ser/pipeline.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>

#include "httplib.h"
#include "json.hpp"
#include "ser/io.hpp"

namespace ser::pipe {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

std::string StageRequest::to_json_line() const {
  json j = {{"id", id}, {"stage", stage}, {"payload", payload},
            {"params", params}};
  return j.dump();
}

StageResponse StageResponse::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError(cat("unparseable stage response: ", e.what()));
  }
  if (!j.is_object() || !j.contains("id") || !j.contains("status")) {
    throw ProtocolError("stage response missing id/status");
  }
  StageResponse r;
  try {
    r.id = j.at("id").get<std::string>();
    const std::string status = j.at("status").get<std::string>();
    if (status == "ok") {
      r.ok = true;
      r.output = j.at("output").get<std::string>();
      if (j.contains("error_message")) {
        throw ProtocolError("ok response must not carry error_message");
      }
    } else if (status == "error") {
      r.ok = false;
      r.error_message = j.at("error_message").get<std::string>();
      if (j.contains("output")) {
        throw ProtocolError("error response must not carry output");
      }
    } else {
      throw ProtocolError(cat("unknown stage status '", status, "'"));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(cat("malformed stage response: ", e.what()));
  }
  return r;
}

StageResponse StageBinding::call(const StageRequest& request) {
  StageResponse response;
  try {
    response = call_once(request);
  } catch (const TransportError&) {
    // Exactly one retry on infrastructure failure; model/verdict errors
    // (StageError) and contract violations propagate immediately.
    response = call_once(request);
  }
  if (response.id != request.id) {
    throw ProtocolError(cat("stage response id '", response.id,
                            "' does not echo request id '", request.id, "'"));
  }
  return response;
}

// ---------------------------------------------------------------------------
// Mock transport
// ---------------------------------------------------------------------------

namespace {

class MockBinding final : public StageBinding {
 public:
  MockBinding(std::string stage, json fixtures)
      : stage_(std::move(stage)), fixtures_(std::move(fixtures)) {}

  StageResponse call_once(const StageRequest& request) override {
    const json* entry = nullptr;
    if (fixtures_.contains(request.payload)) {
      entry = &fixtures_.at(request.payload);
    } else {
      const std::string base =
          std::filesystem::path(request.payload).filename().string();
      if (fixtures_.contains(base)) entry = &fixtures_.at(base);
      else if (fixtures_.contains("*")) entry = &fixtures_.at("*");
    }
    if (!entry) {
      throw StageError(cat(stage_, ": no fixture for payload '",
                           request.payload, "'"));
    }
    StageResponse r;
    r.id = request.id;
    if (entry->is_string()) {
      r.ok = true;
      r.output = entry->get<std::string>();
    } else {
      r.ok = entry->value("status", "ok") == "ok";
      if (r.ok) r.output = entry->value("output", "");
      else r.error_message = entry->value("error_message", "mock error");
    }
    return r;
  }

 private:
  std::string stage_;
  json fixtures_;
};

}  // namespace

std::unique_ptr<StageBinding> make_mock_binding(
    const std::string& stage, const std::string& fixtures_json) {
  json all;
  try {
    all = json::parse(fixtures_json);
  } catch (const json::exception& e) {
    fail("mock fixtures: not valid JSON: ", e.what());
  }
  json fixtures = all.contains(stage) ? all.at(stage) : all;
  require(fixtures.is_object(), "mock fixtures for '", stage,
          "' must be an object");
  return std::make_unique<MockBinding>(stage, std::move(fixtures));
}

// ---------------------------------------------------------------------------
// Subprocess transport
// ---------------------------------------------------------------------------

namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe(fds) != 0) throw TransportError("pipe() failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

class SubprocessBinding final : public StageBinding {
 public:
  SubprocessBinding(std::vector<std::string> argv, double timeout_s)
      : argv_(std::move(argv)), timeout_s_(timeout_s) {
    require(!argv_.empty(), "subprocess binding: empty command");
  }

  StageResponse call_once(const StageRequest& request) override {
    Pipe to_child, from_child, err_child;

    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError("fork() failed");
    if (pid == 0) {
      // Child: wire the pipes and exec.
      ::dup2(to_child.fds[0], STDIN_FILENO);
      ::dup2(from_child.fds[1], STDOUT_FILENO);
      ::dup2(err_child.fds[1], STDERR_FILENO);
      to_child.close_write();
      from_child.close_read();
      err_child.close_read();
      std::vector<char*> args;
      for (auto& a : argv_) args.push_back(a.data());
      args.push_back(nullptr);
      ::execvp(args[0], args.data());
      ::_exit(127);
    }

    to_child.close_read();
    from_child.close_write();
    err_child.close_write();

    const std::string line = request.to_json_line() + "\n";
    ::signal(SIGPIPE, SIG_IGN);
    ssize_t written = ::write(to_child.fds[1], line.data(), line.size());
    (void)written;  // a dead child surfaces as missing output below
    to_child.close_write();

    std::string out, err;
    const bool finished = drain(from_child.fds[0], err_child.fds[0], out, err);
    if (!finished) {
      ::kill(pid, SIGKILL);
      int status = 0;
      ::waitpid(pid, &status, 0);
      throw TransportError(cat("stage subprocess timed out after ", timeout_s_,
                               " s"));
    }

    int status = 0;
    ::waitpid(pid, &status, 0);
    const int exit_code =
        WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);

    const size_t newline = out.find('\n');
    const std::string first_line =
        newline == std::string::npos ? out : out.substr(0, newline);
    if (first_line.empty()) {
      if (exit_code != 0) {
        throw StageError(cat("stage subprocess exited with code ", exit_code,
                             ": ", err));
      }
      throw TransportError("stage subprocess produced no response");
    }
    return StageResponse::from_json_text(first_line);
  }

 private:
  /// Reads stdout/stderr until both close or the deadline passes.
  bool drain(int out_fd, int err_fd, std::string& out, std::string& err) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_s_);
    bool out_open = true, err_open = true;
    char buf[4096];
    while (out_open || err_open) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return false;
      const int wait_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
              .count());

      struct pollfd fds[2];
      nfds_t n = 0;
      if (out_open) fds[n++] = {out_fd, POLLIN, 0};
      if (err_open) fds[n++] = {err_fd, POLLIN, 0};
      const int rc = ::poll(fds, n, std::max(1, wait_ms));
      if (rc < 0) throw TransportError("poll() failed");
      if (rc == 0) return false;

      for (nfds_t i = 0; i < n; ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
        const ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
        if (got > 0) {
          (fds[i].fd == out_fd ? out : err).append(buf, static_cast<size_t>(got));
        } else {
          if (fds[i].fd == out_fd) out_open = false;
          else err_open = false;
        }
      }
    }
    return true;
  }

  std::vector<std::string> argv_;
  double timeout_s_;
};

}  // namespace

std::unique_ptr<StageBinding> make_subprocess_binding(
    std::vector<std::string> argv, double timeout_s) {
  return std::make_unique<SubprocessBinding>(std::move(argv), timeout_s);
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

namespace {

class HttpBinding final : public StageBinding {
 public:
  HttpBinding(std::string base_url, double timeout_s)
      : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

  StageResponse call_once(const StageRequest& request) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::duration<double>(timeout_s_));
    client.set_read_timeout(std::chrono::duration<double>(timeout_s_));
    const auto res =
        client.Post("/stage", request.to_json_line(), "application/json");
    if (!res) {
      throw TransportError(cat("cannot reach stage endpoint ", base_url_, ": ",
                               httplib::to_string(res.error())));
    }
    if (res->status != 200) {
      throw StageError(cat("stage endpoint returned HTTP ", res->status));
    }
    return StageResponse::from_json_text(res->body);
  }

 private:
  std::string base_url_;
  double timeout_s_;
};

}  // namespace

std::unique_ptr<StageBinding> make_http_binding(const std::string& base_url,
                                                double timeout_s) {
  return std::make_unique<HttpBinding>(base_url, timeout_s);
}

// ---------------------------------------------------------------------------
// Bindings file
// ---------------------------------------------------------------------------

StageSet StageSet::from_bindings_file(const std::string& path,
                                      double default_timeout_s) {
  json root;
  try {
    root = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(path, ": not valid JSON: ", e.what());
  }

  StageSet set;
  for (const char* stage : {"asr", "mt", "tts"}) {
    require(root.contains(stage), path, ": missing binding for stage '", stage,
            "'");
    const json& b = root.at(stage);
    const std::string transport = b.value("transport", "");
    const double timeout = b.value("timeout_s", default_timeout_s);
    std::unique_ptr<StageBinding> binding;
    if (transport == "mock") {
      require(b.contains("fixtures"), path, ": mock binding for '", stage,
              "' needs fixtures");
      const json& fx = b.at("fixtures");
      const std::string fixtures_text =
          fx.is_string() ? io::read_text(fx.get<std::string>()) : fx.dump();
      binding = make_mock_binding(stage, fixtures_text);
    } else if (transport == "subprocess") {
      binding = make_subprocess_binding(
          b.at("command").get<std::vector<std::string>>(), timeout);
    } else if (transport == "http") {
      binding = make_http_binding(b.at("url").get<std::string>(), timeout);
    } else {
      fail(path, ": stage '", stage, "': unknown transport '", transport, "'");
    }
    if (std::string(stage) == "asr") set.asr = std::move(binding);
    else if (std::string(stage) == "mt") set.mt = std::move(binding);
    else set.tts = std::move(binding);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Session record
// ---------------------------------------------------------------------------

std::string SessionRecord::to_json_string() const {
  json j = {{"id", id},
            {"input_audio", input_audio},
            {"emotion", emotion},
            {"emotion_confidence", emotion_confidence},
            {"stage_timings_ms", stage_timings_ms}};
  if (transcript_en) j["transcript_en"] = *transcript_en;
  if (translation_ar) j["translation_ar"] = *translation_ar;
  if (tts_audio) j["tts_audio"] = *tts_audio;
  if (failed_stage) j["failed_stage"] = *failed_stage;
  if (error_message) j["error_message"] = *error_message;
  return j.dump(2) + "\n";
}

SessionRecord SessionRecord::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("session record: not valid JSON: ", e.what());
  }
  SessionRecord r;
  r.id = j.at("id").get<std::string>();
  r.input_audio = j.at("input_audio").get<std::string>();
  r.emotion = j.at("emotion").get<std::string>();
  r.emotion_confidence = j.at("emotion_confidence").get<double>();
  r.stage_timings_ms =
      j.at("stage_timings_ms").get<std::map<std::string, double>>();
  if (j.contains("transcript_en")) r.transcript_en = j["transcript_en"].get<std::string>();
  if (j.contains("translation_ar")) r.translation_ar = j["translation_ar"].get<std::string>();
  if (j.contains("tts_audio")) r.tts_audio = j["tts_audio"].get<std::string>();
  if (j.contains("failed_stage")) r.failed_stage = j["failed_stage"].get<std::string>();
  if (j.contains("error_message")) r.error_message = j["error_message"].get<std::string>();
  return r;
}

// ---------------------------------------------------------------------------
// Orchestrator
// ---------------------------------------------------------------------------

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string session_id(const std::string& wav_path) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sess-%016llx",
                static_cast<unsigned long long>(fnv1a(wav_path)));
  return buf;
}

class StageTimer {
 public:
  explicit StageTimer(double* slot)
      : slot_(slot), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    *slot_ = std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - start_)
                 .count();
  }

 private:
  double* slot_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SessionRecord run_pipeline(const std::string& wav_path, nn::Checkpoint& ck,
                           const EngineConfig& cfg, StageSet* stages) {
  SessionRecord record;
  record.id = session_id(wav_path);
  record.input_audio = wav_path;

  {
    StageTimer timer(&record.stage_timings_ms["emotion"]);
    const audio::AudioClip raw = audio::decode_wav(wav_path);
    const audio::AudioClip canonical = audio::fix_duration(
        audio::resample(raw, cfg.audio.sample_rate), cfg.audio.duration_s);

    const feat::FeatureExtractor fx = cfg.extractor();
    require(fx.feature_len() == ck.model.config.input_len,
            "pipeline: feature length ", fx.feature_len(),
            " does not match checkpoint input ", ck.model.config.input_len);
    const std::vector<double> features = fx.extract(canonical);
    const std::vector<double> scaled = feat::scale_row(features, ck.scaler);
    std::vector<float> row(scaled.begin(), scaled.end());
    const nn::Prediction pred = nn::predict(ck.model, row);
    record.emotion = pred.class_index < ck.class_names.size()
                         ? ck.class_names[pred.class_index]
                         : pred.label;
    record.emotion_confidence = pred.probabilities[pred.class_index];
  }

  if (!stages || !stages->complete()) return record;  // emotion-only mode

  struct StagePlan {
    const char* name;
    StageBinding* binding;
  };
  const StagePlan plan[] = {{"asr", stages->asr.get()},
                            {"mt", stages->mt.get()},
                            {"tts", stages->tts.get()}};

  std::string current_payload = wav_path;
  for (const auto& [name, binding] : plan) {
    StageRequest request;
    request.id = record.id + "-" + name;
    request.stage = name;
    request.payload = current_payload;
    if (std::string_view(name) == "tts") {
      request.params["emotion"] = record.emotion;
    }

    StageResponse response;
    try {
      StageTimer timer(&record.stage_timings_ms[name]);
      response = binding->call(request);
    } catch (const Error& e) {
      record.failed_stage = name;
      record.error_message = e.what();
      return record;
    }
    if (!response.ok) {
      record.failed_stage = name;
      record.error_message = response.error_message;
      return record;
    }

    if (std::string_view(name) == "asr") record.transcript_en = response.output;
    else if (std::string_view(name) == "mt") record.translation_ar = response.output;
    else record.tts_audio = response.output;
    current_payload = response.output;
  }
  return record;
}

}  // namespace ser::pipe

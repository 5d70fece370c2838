// tests/test_pipeline.cpp

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

#include <filesystem>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "json.hpp"
#include "ser/io.hpp"
#include "ser/nn/train.hpp"
#include "ser/pipeline.hpp"

using namespace ser;
using namespace ser::pipe;
using nlohmann::json;

#ifndef STAGE_STUB_PATH
#define STAGE_STUB_PATH "stage_stub"
#endif

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

TEST_CASE("StageResponse: contract validation") {
  const auto ok = StageResponse::from_json_text(
      R"({"id":"r1","status":"ok","output":"text"})");
  CHECK(ok.ok);
  CHECK(ok.output == "text");

  const auto err = StageResponse::from_json_text(
      R"({"id":"r1","status":"error","error_message":"nope"})");
  CHECK(!err.ok);
  CHECK(err.error_message == "nope");

  CHECK_THROWS_AS(StageResponse::from_json_text("not json"), ProtocolError);
  CHECK_THROWS_AS(StageResponse::from_json_text(R"({"status":"ok"})"),
                  ProtocolError);
  CHECK_THROWS_AS(
      StageResponse::from_json_text(R"({"id":"x","status":"ok"})"),
      ProtocolError);
  CHECK_THROWS_AS(StageResponse::from_json_text(
                      R"({"id":"x","status":"ok","output":"a","error_message":"b"})"),
                  ProtocolError);
  CHECK_THROWS_AS(StageResponse::from_json_text(
                      R"({"id":"x","status":"maybe","output":"a"})"),
                  ProtocolError);
}

TEST_CASE("StageRequest serializes params") {
  StageRequest r;
  r.id = "abc";
  r.stage = "tts";
  r.payload = "text";
  r.params["emotion"] = "angry";
  const json j = json::parse(r.to_json_line());
  CHECK(j.at("id") == "abc");
  CHECK(j.at("params").at("emotion") == "angry");
}

// ---------------------------------------------------------------------------
// Retry semantics (fake binding)
// ---------------------------------------------------------------------------

namespace {

struct FlakyBinding : StageBinding {
  int calls = 0;
  int fail_times = 1;
  StageResponse call_once(const StageRequest& request) override {
    ++calls;
    if (calls <= fail_times) throw TransportError("flaky");
    StageResponse r;
    r.id = request.id;
    r.ok = true;
    r.output = "done";
    return r;
  }
};

struct FailingBinding : StageBinding {
  int calls = 0;
  StageResponse call_once(const StageRequest&) override {
    ++calls;
    throw StageError("hard failure");
  }
};

struct WrongIdBinding : StageBinding {
  StageResponse call_once(const StageRequest&) override {
    StageResponse r;
    r.id = "unexpected";
    r.ok = true;
    r.output = "x";
    return r;
  }
};

StageRequest request_for(const std::string& stage, const std::string& payload) {
  StageRequest r;
  r.id = "req-1";
  r.stage = stage;
  r.payload = payload;
  return r;
}

}  // namespace

TEST_CASE("call retries exactly once on transport failure") {
  FlakyBinding once;
  const auto r = once.call(request_for("asr", "x"));
  CHECK(r.ok);
  CHECK(once.calls == 2);

  FlakyBinding twice;
  twice.fail_times = 2;
  CHECK_THROWS_AS(twice.call(request_for("asr", "x")), TransportError);
  CHECK(twice.calls == 2);  // one retry, no more
}

TEST_CASE("call never retries a stage failure and checks the id echo") {
  FailingBinding failing;
  CHECK_THROWS_AS(failing.call(request_for("mt", "x")), StageError);
  CHECK(failing.calls == 1);

  WrongIdBinding wrong;
  CHECK_THROWS_AS(wrong.call(request_for("mt", "x")), ProtocolError);
}

// ---------------------------------------------------------------------------
// Mock transport
// ---------------------------------------------------------------------------

TEST_CASE("mock binding: fixture lookup order and error entries") {
  const std::string fixtures = R"({
    "asr": {
      "/abs/path/hello.wav": "exact match",
      "other.wav": "kids are talking by the door",
      "*": "fallback"
    },
    "mt": {"bad.txt": {"status": "error", "error_message": "mock mt down"}}
  })";

  auto asr = make_mock_binding("asr", fixtures);
  CHECK(asr->call(request_for("asr", "/abs/path/hello.wav")).output ==
        "exact match");
  CHECK(asr->call(request_for("asr", "/some/dir/other.wav")).output ==
        "kids are talking by the door");
  CHECK(asr->call(request_for("asr", "unknown.wav")).output == "fallback");

  auto mt = make_mock_binding("mt", fixtures);
  const auto r = mt->call(request_for("mt", "bad.txt"));
  CHECK(!r.ok);
  CHECK(r.error_message == "mock mt down");
  CHECK_THROWS_AS(mt->call(request_for("mt", "missing")), StageError);
}

// ---------------------------------------------------------------------------
// Subprocess transport
// ---------------------------------------------------------------------------

TEST_CASE("subprocess transport: happy path and failure taxonomy") {
  const std::string stub = STAGE_STUB_PATH;
  test::TempDir tmp("stub");

  SUBCASE("echo") {
    auto b = make_subprocess_binding({stub, "echo"}, 10.0);
    const auto r = b->call(request_for("asr", "clip.wav"));
    CHECK(r.ok);
    CHECK(r.output == "echo:clip.wav");
  }
  SUBCASE("fixed output") {
    auto b = make_subprocess_binding({stub, "echo", "hello there"}, 10.0);
    CHECK(b->call(request_for("asr", "x")).output == "hello there");
  }
  SUBCASE("status=error is returned, not retried") {
    const std::string counter = tmp.file("count");
    auto b = make_subprocess_binding({stub, "count", counter}, 10.0);
    const auto r = b->call(request_for("mt", "x"));
    CHECK(!r.ok);
    CHECK(r.error_message == "counted failure");
    CHECK(io::read_text(counter).size() == 1);
  }
  SUBCASE("nonzero exit carries the captured stderr") {
    auto b = make_subprocess_binding({stub, "exit3"}, 10.0);
    try {
      b->call(request_for("mt", "x"));
      FAIL("expected StageError");
    } catch (const StageError& e) {
      const std::string what = e.what();
      CHECK(what.find("code 3") != std::string::npos);
      CHECK(what.find("refusing to answer") != std::string::npos);
    }
  }
  SUBCASE("garbage output is a protocol error") {
    auto b = make_subprocess_binding({stub, "garbage"}, 10.0);
    CHECK_THROWS_AS(b->call(request_for("mt", "x")), ProtocolError);
  }
  SUBCASE("timeout is a transport error") {
    auto b = make_subprocess_binding({stub, "slow"}, 0.3);
    CHECK_THROWS_AS(b->call_once(request_for("mt", "x")), TransportError);
  }
  SUBCASE("transport failure then recovery via the single retry") {
    const std::string marker = tmp.file("marker");
    auto b = make_subprocess_binding({stub, "flaky", marker}, 10.0);
    const auto r = b->call(request_for("tts", "x"));
    CHECK(r.ok);
    CHECK(r.output == "recovered");
    CHECK(std::filesystem::exists(marker));
  }
  SUBCASE("missing executable is a transport/binding error") {
    auto b = make_subprocess_binding({tmp.file("does_not_exist")}, 5.0);
    CHECK_THROWS_AS(b->call(request_for("asr", "x")), Error);
  }
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

TEST_CASE("http transport: 200, 500 and unreachable") {
  httplib::Server server;
  server.Post("/stage", [](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (body.at("payload") == "fail") {
      res.status = 500;
      res.set_content("boom", "text/plain");
      return;
    }
    const json out = {{"id", body.at("id")},
                      {"status", "ok"},
                      {"output", "http:" + body.at("payload").get<std::string>()}};
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  auto b = make_http_binding(url, 5.0);
  const auto r = b->call(request_for("mt", "text in"));
  CHECK(r.ok);
  CHECK(r.output == "http:text in");

  try {
    b->call(request_for("mt", "fail"));
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).find("500") != std::string::npos);
  }

  server.stop();
  thread.join();

  auto dead = make_http_binding("http://127.0.0.1:1", 0.5);
  CHECK_THROWS_AS(dead->call(request_for("mt", "x")), TransportError);
}

// ---------------------------------------------------------------------------
// Session record and the orchestrator
// ---------------------------------------------------------------------------

TEST_CASE("SessionRecord JSON round-trips losslessly") {
  SessionRecord r;
  r.id = "sess-1";
  r.input_audio = "a.wav";
  r.emotion = "happy";
  r.emotion_confidence = 0.875;
  r.transcript_en = "kids are talking";
  r.stage_timings_ms = {{"emotion", 12.5}, {"asr", 80.0}};
  r.failed_stage = "mt";
  r.error_message = "mt offline";

  const auto back = SessionRecord::from_json_string(r.to_json_string());
  CHECK(back.id == r.id);
  CHECK(back.emotion == r.emotion);
  CHECK(back.emotion_confidence == r.emotion_confidence);
  CHECK(back.transcript_en == r.transcript_en);
  CHECK(!back.translation_ar.has_value());
  CHECK(back.stage_timings_ms == r.stage_timings_ms);
  CHECK(back.failed_stage == r.failed_stage);
  CHECK(back.to_json_string() == r.to_json_string());
}

namespace {

// Small end-to-end fixture: one synthetic tone per emotion, a config tuned
// for sub-second training, and a checkpoint that memorizes the eight clips.
struct ToySetup {
  test::TempDir tmp{"pipe"};
  EngineConfig cfg;
  std::vector<std::string> wavs;
  nn::Checkpoint ck;

  ToySetup() {
    cfg = EngineConfig::defaults();
    cfg.audio.sample_rate = 8000;
    cfg.audio.duration_s = 0.5;
    cfg.frame.frame_len = 256;
    cfg.frame.hop = 128;
    cfg.mel.n_fft = 256;
    cfg.mel.n_mels = 16;
    cfg.mel.n_mfcc = 8;

    const feat::FeatureExtractor fx = cfg.extractor();
    cfg.model.input_len = fx.feature_len();
    cfg.model.conv_filters = {8, 16, 16};
    cfg.model.dense_units = 32;
    cfg.model.conv_dropout = 0.0;
    cfg.model.dense_dropout = 0.0;
    cfg.model.batch_size = 8;
    cfg.model.epochs = 300;
    cfg.model.stop_at_train_loss = 0.02;
    cfg.model.seed = 5;

    feat::FeatureMatrix data;
    data.cols = fx.feature_len();
    for (size_t cls = 0; cls < 8; ++cls) {
      const double freq = 150.0 + 180.0 * static_cast<double>(cls);
      audio::AudioClip clip = test::sine_clip(freq, 0.5, 8000, 0.4);
      const std::string path =
          tmp.file("tone_" + std::to_string(cls) + ".wav");
      audio::encode_wav(clip, path);
      wavs.push_back(path);

      // Feature rows come from the decoded file so the pipeline sees the
      // exact same bytes.
      const auto decoded = audio::decode_wav(path);
      const auto row = fx.extract(audio::fix_duration(decoded, 0.5));
      ++data.rows;
      for (double v : row) data.values.push_back(static_cast<float>(v));
      data.labels.push_back(static_cast<uint16_t>(cls));
    }

    const feat::ScalerParams scaler = feat::fit_scaler(data);
    const feat::FeatureMatrix scaled = feat::apply_scaler(data, scaler);
    auto model = nn::Model<float>::build(cfg.model);
    const auto history = nn::train(model, scaled, {});
    REQUIRE(history.epochs.back().train_acc == doctest::Approx(1.0));

    const std::string ck_path = tmp.file("toy.serm");
    auto params = model.params();
    nn::AdamState<float> adam = nn::AdamState<float>::for_params(params);
    std::vector<std::string> names(audio::kEmotionNames.begin(),
                                   audio::kEmotionNames.end());
    nn::save_checkpoint(ck_path, model, adam, scaler, names);
    ck = nn::load_checkpoint(ck_path);
  }
};

}  // namespace

TEST_CASE("run_pipeline: mock stages compose the full record") {
  ToySetup toy;
  const std::string fixtures = R"({
    "asr": {"*": "kids are talking by the door"},
    "mt": {"*": "arabic translation text"},
    "tts": {"*": "synthesized.wav"}
  })";
  StageSet stages;
  stages.asr = make_mock_binding("asr", fixtures);
  stages.mt = make_mock_binding("mt", fixtures);
  stages.tts = make_mock_binding("tts", fixtures);

  const size_t cls = 4;  // angry
  const auto record = run_pipeline(toy.wavs[cls], toy.ck, toy.cfg, &stages);
  CHECK(!record.failed());
  CHECK(record.emotion == "angry");
  CHECK(record.emotion_confidence > 0.5);
  REQUIRE(record.transcript_en.has_value());
  CHECK(*record.transcript_en == "kids are talking by the door");
  CHECK(*record.translation_ar == "arabic translation text");
  CHECK(*record.tts_audio == "synthesized.wav");
  CHECK(record.stage_timings_ms.size() == 4);  // emotion + 3 stages

  SUBCASE("every toy clip classifies to its own label") {
    for (size_t c = 0; c < 8; ++c) {
      const auto rec = run_pipeline(toy.wavs[c], toy.ck, toy.cfg, nullptr);
      CHECK(rec.emotion == std::string(audio::kEmotionNames[c]));
    }
  }
}

TEST_CASE("run_pipeline: a failing stage aborts with a partial record") {
  ToySetup toy;
  const std::string fixtures = R"({
    "asr": {"*": {"status": "error", "error_message": "asr offline"}},
    "mt": {"*": "unused"},
    "tts": {"*": "unused"}
  })";
  StageSet stages;
  stages.asr = make_mock_binding("asr", fixtures);
  stages.mt = make_mock_binding("mt", fixtures);
  stages.tts = make_mock_binding("tts", fixtures);

  const auto record = run_pipeline(toy.wavs[0], toy.ck, toy.cfg, &stages);
  CHECK(record.failed());
  CHECK(*record.failed_stage == "asr");
  CHECK(*record.error_message == "asr offline");
  CHECK(!record.emotion.empty());            // emotion already detected
  CHECK(!record.transcript_en.has_value());  // nothing past the failure
  CHECK(!record.translation_ar.has_value());
}

TEST_CASE("run_pipeline: emotion-only mode needs no stages") {
  ToySetup toy;
  const auto record = run_pipeline(toy.wavs[2], toy.ck, toy.cfg, nullptr);
  CHECK(!record.failed());
  CHECK(record.emotion == "happy");
  CHECK(!record.transcript_en.has_value());
  CHECK(record.stage_timings_ms.size() == 1);
}

TEST_CASE("run_pipeline: tts receives the detected emotion in params") {
  ToySetup toy;

  struct CaptureBinding : StageBinding {
    std::map<std::string, std::string> seen_params;
    StageResponse call_once(const StageRequest& request) override {
      seen_params = request.params;
      StageResponse r;
      r.id = request.id;
      r.ok = true;
      r.output = "out:" + request.payload;
      return r;
    }
  };

  StageSet stages;
  stages.asr = std::make_unique<CaptureBinding>();
  stages.mt = std::make_unique<CaptureBinding>();
  auto tts = std::make_unique<CaptureBinding>();
  CaptureBinding* tts_raw = tts.get();
  stages.tts = std::move(tts);

  const auto record = run_pipeline(toy.wavs[7], toy.ck, toy.cfg, &stages);
  CHECK(!record.failed());
  REQUIRE(tts_raw->seen_params.count("emotion") == 1);
  CHECK(tts_raw->seen_params.at("emotion") == "surprised");
}

// tools/stage_stub.cpp

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

// Minimal external-stage process for exercising the subprocess transport.
// Reads one JSON request line from stdin and reacts per the mode in argv[1]:
//   echo [text]   ok response; output = text (default: "echo:" + payload)
//   error         status=error response
//   exit3         no output, exit code 3, message on stderr
//   garbage       non-JSON bytes on stdout
//   slow          sleep 5 s, then echo
//   flaky <file>  first run (file absent): create file, exit 0 silently;
//                 later runs: ok response "recovered"
//   count <file>  append one byte to file, then status=error response
//   wrongid       ok response with a non-matching id

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "json.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";

  std::string line;
  if (!std::getline(std::cin, line)) return 2;
  json request;
  try {
    request = json::parse(line);
  } catch (...) {
    std::fprintf(stderr, "stage_stub: bad request\n");
    return 2;
  }
  const std::string id = request.value("id", "");
  const std::string payload = request.value("payload", "");

  const auto reply_ok = [&](const std::string& output, const std::string& rid) {
    const json r = {{"id", rid}, {"status", "ok"}, {"output", output}};
    std::printf("%s\n", r.dump().c_str());
  };

  if (mode == "echo") {
    reply_ok(argc > 2 ? argv[2] : "echo:" + payload, id);
  } else if (mode == "error") {
    const json r = {{"id", id},
                    {"status", "error"},
                    {"error_message", "synthetic stage failure"}};
    std::printf("%s\n", r.dump().c_str());
  } else if (mode == "exit3") {
    std::fprintf(stderr, "stage_stub: refusing to answer\n");
    return 3;
  } else if (mode == "garbage") {
    std::printf("this is not a json response\n");
  } else if (mode == "slow") {
    ::sleep(5);
    reply_ok("too late", id);
  } else if (mode == "flaky") {
    const std::string marker = argc > 2 ? argv[2] : "/tmp/stage_stub.marker";
    if (!std::filesystem::exists(marker)) {
      std::ofstream(marker) << "seen";
      return 0;  // silent success: a transport-level no-response
    }
    reply_ok("recovered", id);
  } else if (mode == "count") {
    const std::string counter = argc > 2 ? argv[2] : "/tmp/stage_stub.count";
    std::ofstream(counter, std::ios::app) << "x";
    const json r = {{"id", id},
                    {"status", "error"},
                    {"error_message", "counted failure"}};
    std::printf("%s\n", r.dump().c_str());
  } else if (mode == "wrongid") {
    reply_ok("mismatched", "bogus-id");
  } else {
    std::fprintf(stderr, "stage_stub: unknown mode %s\n", mode.c_str());
    return 2;
  }
  return 0;
}

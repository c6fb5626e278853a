// Copyright 2026 The biaseval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIASEVAL_ANNOTATE_SERVER_H_
#define BIASEVAL_ANNOTATE_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "biaseval/annotate.h"

namespace httplib {
class Server;
}

namespace biaseval {

struct AnnotationServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0: pick a free port
  std::filesystem::path static_dir;  // web console; empty serves a stub page
  DatasetKind exclusions_kind = DatasetKind::kCrowsPairs;
};

// HTTP front end of an AnnotationStore. Every /api route requires
// "Authorization: Bearer <token>" of a provisioned annotator.
//
//   GET  /api/whoami
//   GET  /api/tasks/next?language=L          200 ReviewTask | 204
//   POST /api/annotations                    200 Acknowledgment
//   GET  /api/summary?language=L&provider_id=P
//   GET  /api/agreement?language=L&provider_id=P[&weighting=linear]
//   GET  /api/export[?language=L][&provider_id=P]   JSON lines
//   GET  /api/exclusions
//
// Errors are {"error": message, "field": name-or-null} with 400 (invalid
// field), 401 (bad token), 403 (record names another annotator) or 404
// (unknown sample or annotator).
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, AnnotationServerOptions options);
  ~AnnotationServer();

  // Binds and serves on a background thread; returns the bound port.
  int Start();
  // Serves on the calling thread until Stop().
  void Run();
  void Stop();
  int port() const { return port_; }

 private:
  void Bind();
  void Routes();

  AnnotationStore& store_;
  AnnotationServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace biaseval

#endif  // BIASEVAL_ANNOTATE_SERVER_H_

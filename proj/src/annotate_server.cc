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


#include "biaseval/annotate_server.h"

#include "biaseval/io.h"
#include "httplib.h"

namespace biaseval {

using json = nlohmann::json;

namespace {

constexpr const char* kStubPage =
    "<!doctype html><html><head><title>biaseval annotation</title></head>"
    "<body><p>The annotation console is not installed. The API is served "
    "under /api.</p></body></html>";

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message,
               const std::string& field = {}) {
  SendJson(res, status,
           {{"error", message},
            {"field", field.empty() ? json(nullptr) : json(field)}});
}

std::optional<std::string> Param(const httplib::Request& req,
                                 const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store,
                                   AnnotationServerOptions options)
    : store_(store),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  Routes();
}

AnnotationServer::~AnnotationServer() { Stop(); }

void AnnotationServer::Routes() {
  auto& s = *server_;
  AnnotationStore& store = store_;

  // Resolves the bearer token; sends 401 and returns nullopt on failure.
  auto authenticate = [&store](const httplib::Request& req,
                               httplib::Response& res)
      -> std::optional<std::string> {
    const std::string header = req.get_header_value("Authorization");
    constexpr std::string_view kPrefix = "Bearer ";
    std::optional<std::string> id;
    if (header.size() > kPrefix.size() && header.starts_with(kPrefix)) {
      id = store.Authenticate(header.substr(kPrefix.size()));
    }
    if (!id) SendError(res, 401, "missing or invalid bearer token");
    return id;
  };

  // Runs a handler with the annotator id, mapping errors to status codes.
  auto guarded = [authenticate](auto handler) {
    return [authenticate, handler](const httplib::Request& req,
                                   httplib::Response& res) {
      auto who = authenticate(req, res);
      if (!who) return;
      try {
        handler(*who, req, res);
      } catch (const NotFoundError& e) {
        SendError(res, 404, e.what());
      } catch (const FieldError& e) {
        SendError(res, 400, e.what(), e.field());
      } catch (const Error& e) {
        SendError(res, e.exit_code() == 1 || e.exit_code() == 2 ? 400 : 500,
                  e.what());
      } catch (const std::exception& e) {
        SendError(res, 500, e.what());
      }
    };
  };

  auto require = [](const httplib::Request& req, const char* name) {
    auto v = Param(req, name);
    if (!v || v->empty()) throw FieldError(name, "query parameter is required");
    return *v;
  };

  s.Get("/api/whoami", guarded([](const std::string& who, const auto&,
                                  httplib::Response& res) {
          SendJson(res, 200, {{"annotator_id", who}});
        }));

  s.Get("/api/tasks/next",
        guarded([&store, require](const std::string& who,
                                  const httplib::Request& req,
                                  httplib::Response& res) {
          auto task = store.ServeNextTask(who, require(req, "language"));
          if (!task) {
            res.status = 204;
            return;
          }
          json body = ToJson(*task);
          body["status"] = "pending";
          SendJson(res, 200, body);
        }));

  s.Post("/api/annotations",
         guarded([&store](const std::string& who, const httplib::Request& req,
                          httplib::Response& res) {
           json body;
           try {
             body = json::parse(req.body);
           } catch (const json::parse_error& e) {
             throw FieldError("<body>", std::string("malformed JSON: ") + e.what());
           }
           if (body.is_object() && !body.contains("annotator_id")) {
             body["annotator_id"] = who;
           }
           AnnotationRecord record = AnnotationRecordFromJson(body);
           if (record.annotator_id != who) {
             SendError(res, 403, "record names annotator '" +
                                     record.annotator_id +
                                     "' but the token belongs to '" + who + "'",
                       "annotator_id");
             return;
           }
           SendJson(res, 200, ToJson(store.Submit(std::move(record))));
         }));

  s.Get("/api/summary",
        guarded([&store, require](const std::string&, const httplib::Request& req,
                                  httplib::Response& res) {
          SendJson(res, 200,
                   ToJson(store.Summarize(require(req, "language"),
                                          require(req, "provider_id"))));
        }));

  s.Get("/api/agreement",
        guarded([&store, require](const std::string&, const httplib::Request& req,
                                  httplib::Response& res) {
          KappaWeighting w = KappaWeighting::kNone;
          if (auto name = Param(req, "weighting")) {
            try {
              w = ParseKappaWeighting(*name);
            } catch (const Error& e) {
              throw FieldError("weighting", e.what());
            }
          }
          SendJson(res, 200,
                   ToJson(store.Agreement(require(req, "language"),
                                          require(req, "provider_id"), w)));
        }));

  s.Get("/api/export",
        guarded([&store](const std::string&, const httplib::Request& req,
                         httplib::Response& res) {
          std::string out;
          for (const auto& r :
               store.Records(Param(req, "language"), Param(req, "provider_id"))) {
            out += CanonicalDump(ToJson(r));
            out += '\n';
          }
          res.status = 200;
          res.set_content(out, "application/x-ndjson");
        }));

  const DatasetKind kind = options_.exclusions_kind;
  s.Get("/api/exclusions",
        guarded([&store, kind](const std::string&, const httplib::Request&,
                               httplib::Response& res) {
          const IdSet ids = store.Exclusions();
          SendJson(res, 200,
                   {{"dataset_kind", DatasetKindName(kind)},
                    {"excluded_ids", std::vector<std::string>(ids.begin(), ids.end())}});
        }));

  if (!options_.static_dir.empty()) {
    if (!s.set_mount_point("/", options_.static_dir.string())) {
      throw UsageError("static directory " + options_.static_dir.string() +
                       " does not exist");
    }
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kStubPage, "text/html");
    });
  }
}

void AnnotationServer::Bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else if (server_->bind_to_port(options_.host, options_.port)) {
    port_ = options_.port;
  } else {
    port_ = -1;
  }
  if (port_ < 0) {
    throw TransportError("cannot bind " + options_.host + ":" +
                         std::to_string(options_.port));
  }
}

int AnnotationServer::Start() {
  Bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void AnnotationServer::Run() {
  Bind();
  server_->listen_after_bind();
}

void AnnotationServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace biaseval

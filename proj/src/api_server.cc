// Copyright 2026 The Deliberate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "deliberate/api_server.h"

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "deliberate/error.h"
#include "deliberate/kernels.h"
#include "httplib.h"

namespace deliberate {

std::string_view ToString(JobKind kind) {
  switch (kind) {
    case JobKind::kNextRound: return "NEXT_ROUND";
    case JobKind::kRefine: return "REFINE";
    case JobKind::kDecompose: return "DECOMPOSE";
    case JobKind::kPropose: return "PROPOSE";
  }
  return "NEXT_ROUND";
}

std::string_view ToString(JobStatus status) {
  switch (status) {
    case JobStatus::kRunning: return "RUNNING";
    case JobStatus::kDone: return "DONE";
    case JobStatus::kFailed: return "FAILED";
  }
  return "RUNNING";
}

namespace {

constexpr const char* kJson = "application/json";

struct Job {
  std::string id;
  JobKind kind = JobKind::kNextRound;
  std::string session_id;
  JobStatus status = JobStatus::kRunning;
  nlohmann::json result;
  nlohmann::json error;
};

nlohmann::json ErrorBody(ErrorCode code, const std::string& message,
                         const std::string& session_id = "") {
  nlohmann::json body = {{"error", ErrorCodeName(code)}, {"message", message}};
  if (!session_id.empty()) body["session_id"] = session_id;
  return body;
}

nlohmann::json JobJson(const Job& job) {
  nlohmann::json j = {{"job_id", job.id},
                      {"kind", ToString(job.kind)},
                      {"session_id", job.session_id},
                      {"status", ToString(job.status)}};
  if (job.status == JobStatus::kDone) j["result"] = job.result;
  if (job.status == JobStatus::kFailed) j["error"] = job.error;
  return j;
}

void Reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

nlohmann::json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace

class ApiServer::Impl {
 public:
  Impl(Engine& engine, ServerOptions options) : engine_(engine), options_(std::move(options)) {
    Routes();
  }

  ~Impl() { Stop(); }

  int Start() {
    for (size_t i = 0; i < std::max<size_t>(1, options_.job_workers); ++i) {
      workers_.emplace_back([this] { WorkerLoop(); });
    }
    port_ = options_.port == 0 ? server_.bind_to_any_port(options_.host)
                               : (server_.bind_to_port(options_.host, options_.port) ? options_.port : -1);
    if (port_ < 0) {
      StopWorkers();
      throw Error(ErrorCode::kConfig, "cannot bind " + options_.host + ":" +
                                          std::to_string(options_.port));
    }
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    spdlog::info("serving on {}:{}", options_.host, port_);
    return port_;
  }

  void Stop() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (stopped_) return;
      stopped_ = true;
    }
    server_.stop();
    if (listener_.joinable()) listener_.join();
    StopWorkers();
    stopped_cv_.notify_all();
  }

  void Wait() {
    std::unique_lock<std::mutex> lock(mutex_);
    stopped_cv_.wait(lock, [this] { return stopped_; });
  }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Runs `fn`, translating engine errors to their HTTP status.
  Handler Guard(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      const std::string session_id = req.matches.size() > 1 ? req.matches[1].str() : "";
      try {
        fn(req, res);
      } catch (const Error& e) {
        Reply(res, HttpStatusFor(e.code()), ErrorBody(e.code(), e.what(), session_id));
      } catch (const nlohmann::json::exception& e) {
        Reply(res, 400, ErrorBody(ErrorCode::kInvalidArgument, e.what(), session_id));
      } catch (const std::exception& e) {
        Reply(res, 500, ErrorBody(ErrorCode::kInternal, e.what(), session_id));
      }
    };
  }

  void Routes() {
    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      Reply(res, 200,
            {{"status", "ok"}, {"version", kEngineVersion}, {"isa", kernels::Active().isa}});
    });

    server_.Post("/v1/sessions", Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const SessionConfig config = ParseBody(req).get<SessionConfig>();
                   Reply(res, 201, engine_.CreateSession(config));
                 }));
    server_.Get(R"(/v1/sessions/([A-Za-z0-9_-]+))",
                Guard([this](const httplib::Request& req, httplib::Response& res) {
                  Reply(res, 200, engine_.GetSession(req.matches[1]));
                }));

    server_.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/scoping/decompose)",
                 Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   engine_.CheckStage(id, Stage::kScoping);
                   Submit(res, JobKind::kDecompose, id,
                          [this, id] { return nlohmann::json(engine_.Decompose(id)); });
                 }));
    server_.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/scoping/propose)",
                 Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   const nlohmann::json body = ParseBody(req);
                   const std::string unit_id = body.at("unit_id").get<std::string>();
                   const ProposalMode mode =
                       ParseProposalMode(body.value("mode", std::string("CATEGORY")));
                   engine_.CheckStage(id, Stage::kScoping);
                   Submit(res, JobKind::kPropose, id, [this, id, unit_id, mode] {
                     return nlohmann::json(engine_.Propose(id, unit_id, mode));
                   });
                 }));
    server_.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/scoping/decisions)",
                 Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const nlohmann::json body = ParseBody(req);
                   std::map<std::string, ScopingDecision> decisions;
                   const nlohmann::json given = body.value("decisions", nlohmann::json::object());
                   for (const auto& [pid, d] : given.items()) {
                     decisions[pid] = ParseScopingDecision(d.get<std::string>());
                   }
                   const Provenance by =
                       ParseProvenance(body.value("decided_by", std::string("USER")));
                   Reply(res, 200, engine_.ApplyDecisions(req.matches[1], decisions, by));
                 }));

    server_.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/rounds/next)",
                 Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   engine_.CheckStage(id, Stage::kIteration);
                   const Session s = engine_.GetSession(id);
                   if (const RoundRecord* pending = s.PendingRound()) {
                     throw Error(ErrorCode::kPendingLabels,
                                 "round " + std::to_string(pending->t) + " is still awaiting labels");
                   }
                   Submit(res, JobKind::kNextRound, id,
                          [this, id] { return nlohmann::json(engine_.NextRound(id)); });
                 }));
    server_.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/rounds/(\d+)/labels)",
                 Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   const int t = std::stoi(req.matches[2]);
                   const auto labels =
                       ParseBody(req).at("labels").get<std::vector<LabelInput>>();
                   engine_.ValidateLabels(id, t, labels);
                   Submit(res, JobKind::kRefine, id, [this, id, t, labels] {
                     return nlohmann::json(engine_.SubmitLabels(id, t, labels));
                   });
                 }));

    server_.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/definition/edits)",
                 Guard([this](const httplib::Request& req, httplib::Response& res) {
                   const auto edits =
                       ParseBody(req).at("edits").get<std::vector<DefinitionEdit>>();
                   Reply(res, 200, engine_.ManualEdit(req.matches[1], edits));
                 }));
    server_.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/definition)",
                Guard([this](const httplib::Request& req, httplib::Response& res) {
                  std::optional<int> version;
                  if (req.has_param("version")) {
                    try {
                      version = std::stoi(req.get_param_value("version"));
                    } catch (const std::exception&) {
                      throw Error(ErrorCode::kInvalidArgument, "version must be an integer");
                    }
                  }
                  const ConceptDefinition def = engine_.GetDefinition(req.matches[1], version);
                  nlohmann::json body = def;
                  body["rendered"] = RenderDefinition(def);
                  Reply(res, 200, body);
                }));
    server_.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/metrics)",
                Guard([this](const httplib::Request& req, httplib::Response& res) {
                  Reply(res, 200, engine_.Metrics(req.matches[1]));
                }));

    server_.Get(R"(/v1/jobs/([A-Za-z0-9_-]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  int wait_ms = 0;
                  if (req.has_param("wait_ms")) {
                    try {
                      wait_ms = std::clamp(std::stoi(req.get_param_value("wait_ms")), 0,
                                           options_.max_wait_ms);
                    } catch (const std::exception&) {
                      Reply(res, 400,
                            ErrorBody(ErrorCode::kInvalidArgument, "wait_ms must be an integer"));
                      return;
                    }
                  }
                  std::unique_lock<std::mutex> lock(mutex_);
                  const auto it = jobs_.find(req.matches[1]);
                  if (it == jobs_.end()) {
                    nlohmann::json body = ErrorBody(ErrorCode::kNotFound, "unknown job");
                    body["job_id"] = req.matches[1].str();
                    Reply(res, 404, body);
                    return;
                  }
                  const Job& job = it->second;
                  job_cv_.wait_for(lock, std::chrono::milliseconds(wait_ms),
                                   [&] { return job.status != JobStatus::kRunning || stopped_; });
                  Reply(res, 200, JobJson(job));
                });

    if (!options_.static_dir.empty() && std::filesystem::is_directory(options_.static_dir)) {
      server_.set_mount_point("/", options_.static_dir.string());
    }
  }

  void Submit(httplib::Response& res, JobKind kind, const std::string& session_id,
              std::function<nlohmann::json()> work) {
    std::string id;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "j%06zu", ++job_counter_);
      id = buf;
      jobs_[id] = Job{id, kind, session_id, JobStatus::kRunning, nullptr, nullptr};
      queue_.emplace_back(id, std::move(work));
    }
    queue_cv_.notify_one();
    Reply(res, 202, {{"job_id", id}, {"kind", ToString(kind)}, {"status", "RUNNING"}});
  }

  void WorkerLoop() {
    while (true) {
      std::pair<std::string, std::function<nlohmann::json()>> task;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        queue_cv_.wait(lock, [this] { return workers_stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      nlohmann::json result;
      nlohmann::json error;
      try {
        result = task.second();
      } catch (const Error& e) {
        error = ErrorBody(e.code(), e.what());
        error["http_status"] = HttpStatusFor(e.code());
      } catch (const std::exception& e) {
        error = ErrorBody(ErrorCode::kInternal, e.what());
        error["http_status"] = 500;
      }
      {
        std::lock_guard<std::mutex> lock(mutex_);
        Job& job = jobs_.at(task.first);
        if (error.is_null()) {
          job.result = std::move(result);
          job.status = JobStatus::kDone;
        } else {
          spdlog::warn("job {} failed: {}", job.id, error.at("message").get<std::string>());
          job.error = std::move(error);
          job.status = JobStatus::kFailed;
        }
      }
      job_cv_.notify_all();
    }
  }

  void StopWorkers() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      workers_stopping_ = true;
    }
    queue_cv_.notify_all();
    for (std::thread& w : workers_) {
      if (w.joinable()) w.join();
    }
    workers_.clear();
    job_cv_.notify_all();
  }

  Engine& engine_;
  ServerOptions options_;
  httplib::Server server_;
  std::thread listener_;
  std::vector<std::thread> workers_;
  int port_ = -1;

  std::mutex mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable job_cv_;
  std::condition_variable stopped_cv_;
  std::deque<std::pair<std::string, std::function<nlohmann::json()>>> queue_;
  std::map<std::string, Job> jobs_;
  size_t job_counter_ = 0;
  bool workers_stopping_ = false;
  bool stopped_ = false;
};

ApiServer::ApiServer(Engine& engine, ServerOptions options)
    : impl_(std::make_unique<Impl>(engine, std::move(options))) {}

ApiServer::~ApiServer() = default;

int ApiServer::Start() { return impl_->Start(); }
void ApiServer::Stop() { impl_->Stop(); }
void ApiServer::Wait() { impl_->Wait(); }

}  // namespace deliberate

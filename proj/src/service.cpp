/* Copyright 2026 The MetaInf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "metainf/service.h"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "metainf/error.h"
#include "metainf/json_io.h"

namespace metainf {

using nlohmann::json;

namespace {

int HttpStatusFor(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::kUsage:
    case ErrorCategory::kData:
      return 400;
    case ErrorCategory::kInfeasible:
      return 422;
    case ErrorCategory::kProvider:
      return 502;
    case ErrorCategory::kIo:
    case ErrorCategory::kIntegrity:
      return 500;
  }
  return 500;
}

ServiceResponse ErrorResponse(int status, const std::string& kind,
                              const std::string& message) {
  return {status, {{"v", 1}, {"error", kind}, {"message", message}}};
}

// Runs `fn`, turning library errors into JSON error responses.
template <typename Fn>
ServiceResponse Guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const InfeasibleError& e) {
    ServiceResponse r = ErrorResponse(422, "infeasible", e.what());
    r.body["cheapest_cost"] = e.cheapest_cost();
    r.body["budget"] = e.budget();
    return r;
  } catch (const Error& e) {
    return ErrorResponse(HttpStatusFor(e), ToString(e.category()), e.what());
  } catch (const json::exception& e) {
    return ErrorResponse(400, "usage", std::string("malformed JSON: ") + e.what());
  }
}

json ParseBody(const std::string& body) {
  json j = json::parse(body);
  if (!j.is_object()) throw UsageError("request body must be a JSON object");
  if (j.contains("v") && j.at("v") != 1) {
    throw UsageError("unsupported request version (expected \"v\": 1)");
  }
  return j;
}

const json& RequireObject(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_object()) {
    throw UsageError(std::string("field '") + field + "' must be an object");
  }
  return *it;
}

std::string RequireString(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw UsageError(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

int RequireInt(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer()) {
    throw UsageError(std::string("field '") + field + "' must be an integer");
  }
  return it->get<int>();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::shared_ptr<const Snapshot> MakeSnapshot(std::shared_ptr<const Selector> selector) {
  auto s = std::make_shared<Snapshot>();
  s->model = selector->ToJson();
  s->model_version = Sha256Hex(s->model.dump()).substr(0, 16);
  s->selector = std::move(selector);
  return s;
}

TrainOutcome TrainFromRecords(const RecordStore& store, const Catalog& catalog,
                              const SelectorSpec& spec,
                              const EmbeddingConfig& embedding,
                              std::shared_ptr<EmbeddingProvider> provider) {
  const PerformanceTensor tensor = store.AssembleTensor();
  TrainOutcome out;
  std::shared_ptr<const Featurizer> f;
  if (spec.kind != SelectorKind::kGlobalBest) {
    f = Featurizer::Fit(embedding, catalog, tensor, std::move(provider));
    out.warnings = f->warnings();
  }
  TrainingContext ctx{tensor, catalog, f};
  out.snapshot = MakeSnapshot(FitSelector(spec, ctx));
  out.train_rows = tensor.present_count();
  return out;
}

TaskProfile TaskFromRequest(const json& request) {
  const json& t = RequireObject(request, "task");
  TaskProfile task;
  task.description = RequireString(t, "description");
  task.batch_size = RequireInt(t, "batch_size");
  task.model = RequireString(request, "model");
  if (t.contains("prompt_count")) task.prompt_count = RequireInt(t, "prompt_count");
  if (t.contains("source_tag")) task.source_tag = RequireString(t, "source_tag");
  if (t.contains("id")) {
    task.id = RequireString(t, "id");
  } else {
    std::string key = task.description + '\0' + std::to_string(task.batch_size) +
                      '\0' + task.model + '\0' + std::to_string(task.prompt_count) +
                      '\0' + task.source_tag;
    task.id = "req-" + Sha256Hex(key).substr(0, 16);
  }
  try {
    task.Validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return task;
}

HardwareProfile HardwareFromRequest(const json& request, const Catalog& catalog) {
  const json& h = RequireObject(request, "hardware");
  HardwareProfile hw;
  hw.gpu_class = RequireString(h, "gpu_class");
  hw.gpu_count = RequireInt(h, "gpu_count");
  auto price = h.find("price_per_hour");
  if (price == h.end() || !price->is_number()) {
    throw UsageError("field 'price_per_hour' must be a number");
  }
  hw.price_per_hour = price->get<double>();

  const HardwareProfile* same = nullptr;
  const HardwareProfile* same_class = nullptr;
  for (const auto& [id, p] : catalog.hardware) {
    if (p.gpu_class != hw.gpu_class) continue;
    if (!same_class) same_class = &p;
    if (p.gpu_count == hw.gpu_count && !same) same = &p;
  }
  if (same) {
    hw.id = same->id;
    hw.memory_gb = same->memory_gb;
    hw.description = same->description;
  } else {
    std::string cls = hw.gpu_class;
    for (char& ch : cls) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    hw.id = cls + "x" + std::to_string(hw.gpu_count);
    hw.memory_gb = same_class ? same_class->memory_gb : 16.0;
  }
  if (h.contains("id")) hw.id = RequireString(h, "id");
  if (h.contains("memory_gb")) {
    if (!h.at("memory_gb").is_number()) throw UsageError("field 'memory_gb' must be a number");
    hw.memory_gb = h.at("memory_gb").get<double>();
  }
  try {
    hw.Validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return hw;
}

Budget BudgetFromRequest(const json& request, std::optional<double> default_budget) {
  auto it = request.find("budget");
  if (it == request.end() || it->is_null()) {
    return default_budget ? Budget{*default_budget} : Budget::Unlimited();
  }
  if (!it->is_number()) throw UsageError("field 'budget' must be a number or null");
  const double b = it->get<double>();
  if (!(b >= 0.0)) throw UsageError("budget must be >= 0");
  return Budget{b};
}

json SelectionToWire(const SelectionResult& r) {
  json j = r;
  j["v"] = 1;
  return j;
}

// ---------------------------------------------------------------------------

struct Service::Http {
  httplib::Server server;
};

Service::Service(AppConfig config, std::shared_ptr<EmbeddingProvider> provider,
                 OracleFactory oracle_factory)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      oracle_factory_(std::move(oracle_factory)) {
  config_.Validate();
}

Service::~Service() { Stop(); }

void Service::LoadState() {
  if (std::filesystem::exists(config_.catalog_path)) {
    catalog_ = Catalog::Load(config_.catalog_path);
  }
  {
    std::unique_lock lock(store_mutex_);
    if (std::filesystem::exists(config_.records_path)) {
      store_ = RecordStore::Load(config_.records_path);
    }
  }
  if (std::filesystem::exists(config_.model_path)) {
    std::ifstream in(config_.model_path);
    json j = json::parse(in);
    Install(MakeSnapshot(LoadSelector(j, provider_, oracle_factory_)));
  }
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

void Service::Install(std::shared_ptr<const Snapshot> snapshot) {
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snapshot);
}

std::size_t Service::record_count() const {
  std::shared_lock lock(store_mutex_);
  return store_.size();
}

ServiceResponse Service::Health() const {
  auto snap = snapshot();
  return {200,
          {{"v", 1},
           {"status", "ok"},
           {"model_version", snap ? json(snap->model_version) : json(nullptr)},
           {"records", record_count()}}};
}

ServiceResponse Service::HandleSelect(const std::string& body) const {
  // One snapshot for the whole request.
  auto snap = snapshot();
  if (!snap) {
    return ErrorResponse(503, "unavailable", "no trained model; POST /v1/train first");
  }
  ServiceResponse r = Guarded([&] {
    json req = ParseBody(body);
    SelectionRequest sr{TaskFromRequest(req), HardwareFromRequest(req, catalog_),
                        BudgetFromRequest(req, config_.default_budget),
                        snap->selector};
    return ServiceResponse{200, SelectionToWire(Select(sr))};
  });
  r.body["model_version"] = snap->model_version;
  return r;
}

ServiceResponse Service::HandleRecords(const std::string& body) {
  return Guarded([&] {
    std::istringstream in(body);
    std::unique_lock lock(store_mutex_);
    const std::size_t n = store_.Ingest(in, RecordFormat::kJsonl);
    if (config_.records_path.has_parent_path()) {
      std::filesystem::create_directories(config_.records_path.parent_path());
    }
    store_.Save(config_.records_path);
    return ServiceResponse{200, {{"v", 1}, {"ingested", n}, {"total", store_.size()}}};
  });
}

ServiceResponse Service::HandleTrain(const std::string& body) {
  return Guarded([&] {
    json req = body.empty() ? json::object() : ParseBody(body);
    SelectorSpec spec;
    spec.kind = config_.selector;
    if (req.contains("selector")) {
      auto k = ParseSelectorKind(RequireString(req, "selector"));
      if (!k) throw UsageError("unknown selector kind");
      spec.kind = *k;
    }
    EmbeddingConfig emb{config_.style, config_.rank, config_.provider};
    if (req.contains("style")) {
      auto s = ParsePromptStyle(RequireString(req, "style"));
      if (!s) throw UsageError("unknown prompt style");
      emb.style = *s;
    }
    if (req.contains("rank")) emb.rank = RequireInt(req, "rank");

    std::lock_guard train_lock(train_mutex_);
    RecordStore copy;
    {
      std::shared_lock lock(store_mutex_);
      copy = store_;
    }
    TrainOutcome out = TrainFromRecords(copy, catalog_, spec, emb, provider_);
    WriteFile(config_.model_path, out.snapshot->model.dump());
    Install(out.snapshot);
    return ServiceResponse{200,
                           {{"v", 1},
                            {"model_version", out.snapshot->model_version},
                            {"train_rows", out.train_rows},
                            {"warnings", out.warnings}}};
  });
}

int Service::Bind() {
  if (!http_) {
    http_ = std::make_unique<Http>();
    auto& s = http_->server;
    const auto timeout = std::chrono::milliseconds(
        static_cast<long long>(config_.request_timeout_s * 1000));
    s.set_read_timeout(timeout);
    s.set_write_timeout(timeout);
    auto reply = [](httplib::Response& res, const ServiceResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    s.Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, Health());
    });
    s.Post("/v1/select", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, HandleSelect(req.body));
    });
    s.Post("/v1/records", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, HandleRecords(req.body));
    });
    s.Post("/v1/train", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, HandleTrain(req.body));
    });
  }
  int port = config_.port;
  if (port == 0) {
    port = http_->server.bind_to_any_port(config_.host);
    if (port < 0) throw IoError("cannot bind " + config_.host);
  } else if (!http_->server.bind_to_port(config_.host, port)) {
    throw IoError("cannot bind " + config_.host + ":" + std::to_string(port));
  }
  return port;
}

void Service::Run() {
  if (!http_) throw UsageError("Bind() must be called before Run()");
  http_->server.listen_after_bind();
}

void Service::Stop() {
  if (http_) http_->server.stop();
}

}  // namespace metainf

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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "metainf/cli.h"
#include "metainf/config.h"
#include "metainf/error.h"
#include "metainf/service.h"
#include "support.h"

// After Eigen: <resolv.h> defines a `_res` macro.
#include <httplib.h>

using namespace metainf;
namespace fs = std::filesystem;

namespace {

EnvLookup Env(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("metainf_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int Cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::vector<const char*> argv{"metainf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = RunCli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

AppConfig ConfigIn(const fs::path& dir) {
  AppConfig c;
  c.SetDataDir(dir);
  c.port = 0;
  return c;
}

std::string SelectBody(const std::string& desc, int batch, const std::string& model,
                       const std::string& cls, int gpus, double price, nlohmann::json budget) {
  return nlohmann::json{{"v", 1},
                        {"task", {{"description", desc}, {"batch_size", batch}}},
                        {"model", model},
                        {"hardware", {{"gpu_class", cls}, {"gpu_count", gpus}, {"price_per_hour", price}}},
                        {"budget", budget}}
      .dump();
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("TOML values with environment overrides") {
    const std::string toml = R"(
[store]
data_dir = "/srv/metainf"
[embedding]
style = "cot"
rank = 32
[selector]
kind = "ridge"
[service]
port = 9000
default_budget = 0.5
)";
    AppConfig c = ParseConfigToml(toml, Env({{"METAINF_RANK", "16"}, {"METAINF_MODEL", "/tmp/m.json"}}));
    CHECK(c.records_path == fs::path("/srv/metainf/records.jsonl"));
    CHECK(c.model_path == fs::path("/tmp/m.json"));
    CHECK(c.style == PromptStyle::kCot);
    CHECK(c.rank == 16);
    CHECK(c.selector == SelectorKind::kRidge);
    CHECK(c.port == 9000);
    CHECK(*c.default_budget == 0.5);
  }

  TEST_CASE("endpoint variable switches to the HTTP provider") {
    AppConfig c = ParseConfigToml("", Env({{"METAINF_EMBED_ENDPOINT", "http://127.0.0.1:1/v1/embeddings"}}));
    CHECK(c.provider.kind == ProviderKind::kHttp);
  }

  TEST_CASE("invalid values are usage errors") {
    CHECK_THROWS_AS(ParseConfigToml("[embedding]\nrank = 0\n", Env({})), UsageError);
    CHECK_THROWS_AS(ParseConfigToml("[embedding]\nstyle = \"fancy\"\n", Env({})), UsageError);
    CHECK_THROWS_AS(ParseConfigToml("not toml = = 1", Env({})), UsageError);
    CHECK_THROWS_AS(ParseConfigToml("", Env({{"METAINF_PORT", "http"}})), UsageError);
  }
}

TEST_SUITE("service") {
  TEST_CASE("select before training is 503, health reports no model") {
    Service s(ConfigIn(TempDir("svc_empty")), testing::Fallback());
    CHECK(s.Health().status == 200);
    CHECK(s.Health().body["model_version"].is_null());
    CHECK(s.HandleSelect(SelectBody("x", 16, "m", "L4", 4, 1.0, nullptr)).status == 503);
  }

  TEST_CASE("records, training and selection end to end") {
    const fs::path dir = TempDir("svc_e2e");
    testing::ReferenceCatalog().Save(dir / "catalog.json");
    Service s(ConfigIn(dir), testing::Fallback());
    s.LoadState();

    std::string jsonl;
    for (const auto& r : testing::ReferenceStore().records()) jsonl += FormatJsonRecord(r) + "\n";
    auto rec = s.HandleRecords(jsonl);
    CHECK(rec.status == 200);
    CHECK(rec.body["ingested"] == 10);
    CHECK(s.HandleRecords("{broken").status == 400);

    auto bad = s.HandleTrain(R"({"selector":"random"})");
    CHECK(bad.status == 400);
    auto tr = s.HandleTrain(R"({"selector":"global_best"})");
    REQUIRE(tr.status == 200);
    CHECK(tr.body["train_rows"] == 10);
    CHECK(fs::exists(dir / "model.json"));
    const std::string version = tr.body["model_version"];

    auto ok = s.HandleSelect(SelectBody("chat", 16, "llama-3.1-8b", "L4", 4, 3.2, nullptr));
    REQUIRE(ok.status == 200);
    CHECK(ok.body["model_version"] == version);
    CHECK(ok.body["method_name"] == "Prefix Caching");
    CHECK(ok.body["v"] == 1);

    auto inf = s.HandleSelect(SelectBody("chat", 16, "llama-3.1-8b", "L4", 4, 3.2, 0.0));
    CHECK(inf.status == 422);
    CHECK(inf.body["error"] == "infeasible");
    CHECK(inf.body["cheapest_cost"].get<double>() > 0.0);
    CHECK(s.HandleSelect(R"({"v":1,"task":{}})").status == 400);
    CHECK(s.HandleSelect(R"({"v":2})").status == 400);

    // A fresh service restores the saved snapshot.
    Service again(ConfigIn(dir), testing::Fallback());
    again.LoadState();
    REQUIRE(again.snapshot());
    CHECK(again.snapshot()->model_version == version);
    CHECK(again.record_count() == 10);
  }

  TEST_CASE("responses equal library selection") {
    const fs::path dir = TempDir("svc_eq");
    Service s(ConfigIn(dir), testing::Fallback());
    const SynthData& d = testing::SmallSynth();
    s.Install(MakeSnapshot(MakeSynthOracle(d.spec)));
    Catalog empty;
    for (int i = 0; i < 20; ++i) {
      const auto& t = d.eval_tasks[i];
      const auto& hw = d.spec.hardware[i % d.spec.hardware.size()];
      const std::string body = SelectBody(t.description, t.batch_size, t.model, hw.gpu_class,
                                          hw.gpu_count, hw.price_per_hour, nullptr);
      auto res = s.HandleSelect(body);
      const auto req = nlohmann::json::parse(body);
      nlohmann::json lib = SelectionToWire(Select({TaskFromRequest(req), HardwareFromRequest(req, s.catalog()),
                                                   Budget::Unlimited(), s.snapshot()->selector}));
      lib["model_version"] = s.snapshot()->model_version;
      CHECK(res.body == lib);
    }
  }

  TEST_CASE("HTTP endpoints on an ephemeral port") {
    Service s(ConfigIn(TempDir("svc_http")), testing::Fallback());
    s.Install(MakeSnapshot(MakeSynthOracle(testing::SmallSynth().spec)));
    const int port = s.Bind();
    std::thread server([&] { s.Run(); });
    httplib::Client c("127.0.0.1", port);
    auto h = c.Get("/v1/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(nlohmann::json::parse(h->body)["status"] == "ok");
    auto r = c.Post("/v1/select", SelectBody("chat", 16, "llama-3.1-8b", "L4", 4, 3.2, nullptr),
                    "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(nlohmann::json::parse(r->body)["method_name"] == "All");
    s.Stop();
    server.join();
  }
}

TEST_SUITE("cli") {
  TEST_CASE("unknown flag exits 2 with usage text") {
    std::string err;
    CHECK(Cli({"evaluate", "--bogus"}, nullptr, &err) == kExitUsage);
    CHECK(err.find("Usage") != std::string::npos);
    CHECK(Cli({}) == kExitUsage);
  }

  TEST_CASE("synth, oracle train and select follow the reference table") {
    const std::string dir = TempDir("cli_oracle").string();
    std::string out;
    REQUIRE(Cli({"--data-dir", dir, "synth", "--seed", "7"}) == kExitOk);
    REQUIRE(Cli({"--data-dir", dir, "train", "--selector", "oracle"}) == kExitOk);
    REQUIRE(Cli({"--data-dir", dir, "select", "--task-desc", "chat", "--model", "llama-3.1-8b",
                 "--hardware", "l4x4", "--batch-size", "16"},
                &out) == kExitOk);
    CHECK(nlohmann::json::parse(out)["method_name"] == "All");
    REQUIRE(Cli({"--data-dir", dir, "select", "--task-desc", "chat", "--model", "llama-3.1-8b",
                 "--hardware", "l4x4", "--batch-size", "256"},
                &out) == kExitOk);
    CHECK(nlohmann::json::parse(out)["method_name"] == "Prefix Caching");
  }

  TEST_CASE("error categories map to exit codes") {
    const std::string dir = TempDir("cli_codes").string();
    REQUIRE(Cli({"--data-dir", dir, "synth"}) == kExitOk);
    REQUIRE(Cli({"--data-dir", dir, "train", "--selector", "global_best"}) == kExitOk);
    std::string out;
    CHECK(Cli({"--data-dir", dir, "select", "--task-desc", "x", "--model", "phi-2", "--hardware", "t4x4",
               "--budget", "0"},
              &out) == kExitInfeasible);
    CHECK(nlohmann::json::parse(out)["error"] == "infeasible");
    CHECK(Cli({"--data-dir", dir, "select", "--task-desc", "x", "--model", "phi-2", "--hardware", "nope"}) ==
          kExitData);
    CHECK(Cli({"--data-dir", dir, "train", "--selector", "random"}) == kExitUsage);
    CHECK(Cli({"--data-dir", dir, "ingest", (fs::path(dir) / "missing.jsonl").string()}) == kExitData);

    // Same key as a stored record, different runtime.
    std::ifstream in(fs::path(dir) / "records.jsonl");
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    auto rec = nlohmann::json::parse(line);
    rec["runtime_s"] = rec["runtime_s"].get<double>() * 2.0;
    std::ofstream(fs::path(dir) / "conflict.jsonl") << rec.dump() << "\n";
    CHECK(Cli({"--data-dir", dir, "ingest", (fs::path(dir) / "conflict.jsonl").string()}) == kExitData);
  }

  TEST_CASE("an unreachable embedding endpoint is a provider error") {
    const std::string dir = TempDir("cli_provider").string();
    REQUIRE(Cli({"--data-dir", dir, "synth"}) == kExitOk);
    const fs::path cfg = fs::path(dir) / "metainf.toml";
    std::ofstream(cfg) << "[embedding]\nprovider = \"http\"\nendpoint = \"http://127.0.0.1:9/v1/embeddings\"\n"
                          "timeout_s = 1.0\n";
    CHECK(Cli({"--config", cfg.string(), "--data-dir", dir, "train"}) == kExitProvider);
  }
}

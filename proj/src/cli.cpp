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

#include "metainf/cli.h"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <optional>
#include <pthread.h>
#include <thread>

#include "metainf/config.h"
#include "metainf/error.h"
#include "metainf/json_io.h"
#include "metainf/protocol.h"
#include "metainf/service.h"
#include "metainf/synth.h"

namespace metainf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int ExitCodeFor(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return kExitUsage;
    case ErrorCategory::kData:
    case ErrorCategory::kIo: return kExitData;
    case ErrorCategory::kInfeasible: return kExitInfeasible;
    case ErrorCategory::kProvider: return kExitProvider;
    case ErrorCategory::kIntegrity: return kExitIntegrity;
  }
  return kExitIntegrity;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

json ReadJson(const fs::path& path) {
  try {
    return json::parse(ReadText(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

fs::path SpecPathFor(const AppConfig& cfg) {
  return cfg.catalog_path.parent_path() / "synth_spec.json";
}

std::shared_ptr<EmbeddingProvider> ProviderFor(const AppConfig& cfg) {
  return std::make_shared<CachingProvider>(MakeProvider(cfg.provider));
}

PromptStyle StyleArg(const std::string& s) {
  auto p = ParsePromptStyle(s);
  if (!p) throw UsageError("unknown prompt style '" + s + "'");
  return *p;
}

SynthSpec SpecArg(const std::string& file, std::optional<uint64_t> seed) {
  SynthSpec spec = file.empty() ? DefaultSynthSpec() : SynthSpec::FromJson(ReadJson(file));
  if (seed) spec.seed = *seed;
  spec.Validate();
  return spec;
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

Catalog LoadCatalogIfAny(const fs::path& path) {
  return fs::exists(path) ? Catalog::Load(path) : Catalog{};
}

RecordStore LoadStoreIfAny(const fs::path& path) {
  return fs::exists(path) ? RecordStore::Load(path) : RecordStore{};
}

// Blocks SIGINT/SIGTERM in every thread and stops `service` on the first one.
class SignalStopper {
 public:
  explicit SignalStopper(Service& service) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    thread_ = std::thread([this, &service] {
      int sig = 0;
      sigwait(&set_, &sig);
      service.Stop();
    });
  }
  ~SignalStopper() {
    // Wake the waiter if the server stopped on its own.
    pthread_kill(thread_.native_handle(), SIGTERM);
    thread_.join();
    pthread_sigmask(SIG_UNBLOCK, &set_, nullptr);
  }

 private:
  sigset_t set_;
  std::thread thread_;
};

struct Options {
  std::string config_file;
  std::string data_dir;

  std::string ingest_path, ingest_format, ingest_catalog;

  uint64_t synth_seed = 7;
  std::string synth_out, synth_spec;

  std::string train_selector, train_style;
  int train_rank = 0;

  std::string task_desc, model, hardware;
  int batch_size = 16;
  int prompt_count = 1000;
  std::optional<double> price, budget;

  int trials = 1000;
  uint64_t seed = 7;
  std::optional<uint64_t> eval_synth_seed;
  std::string eval_spec, eval_style, out_dir;
  int eval_rank = 0;
  std::vector<std::string> styles = {"one_hot", "basic", "rich", "cot"};
  std::vector<int> ranks = {64, 256};

  std::string host;
  std::optional<int> port;
};

AppConfig ResolveConfig(const Options& o) {
  AppConfig cfg = LoadConfig(o.config_file.empty()
                                 ? std::nullopt
                                 : std::optional<fs::path>(o.config_file));
  if (!o.data_dir.empty()) cfg.SetDataDir(o.data_dir);
  cfg.Validate();
  return cfg;
}

int CmdIngest(const Options& o, const AppConfig& cfg, std::ostream& out, std::ostream& err) {
  RecordFormat fmt = RecordFormat::kJsonl;
  if (!o.ingest_format.empty()) {
    auto f = ParseRecordFormat(o.ingest_format);
    if (!f) throw UsageError("unknown record format '" + o.ingest_format + "'");
    fmt = *f;
  } else if (fs::path(o.ingest_path).extension() == ".csv") {
    fmt = RecordFormat::kCsv;
  }
  RecordStore store = LoadStoreIfAny(cfg.records_path);
  std::ifstream in(o.ingest_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + o.ingest_path);
  const std::size_t n = store.Ingest(in, fmt);
  EnsureParent(cfg.records_path);
  store.Save(cfg.records_path);

  std::size_t catalog_entries = 0;
  if (!o.ingest_catalog.empty()) {
    Catalog cat = LoadCatalogIfAny(cfg.catalog_path);
    Catalog add = Catalog::Load(o.ingest_catalog);
    catalog_entries = add.tasks.size() + add.models.size() + add.hardware.size();
    cat.Merge(add);
    EnsureParent(cfg.catalog_path);
    cat.Save(cfg.catalog_path);
  }
  err << "ingested " << n << " records into " << cfg.records_path.string() << "\n";
  out << json{{"v", 1},
              {"ingested", n},
              {"total", store.size()},
              {"catalog_entries", catalog_entries}}
             .dump()
      << "\n";
  return kExitOk;
}

int CmdSynth(const Options& o, AppConfig cfg, std::ostream& out, std::ostream& err) {
  if (!o.synth_out.empty()) cfg.SetDataDir(o.synth_out);
  const SynthSpec spec = SpecArg(o.synth_spec, o.synth_seed);
  const SynthData data = GenerateSynthetic(spec);
  EnsureParent(cfg.records_path);
  EnsureParent(cfg.catalog_path);
  data.store.Save(cfg.records_path);
  data.catalog.Save(cfg.catalog_path);
  const fs::path dir = cfg.catalog_path.parent_path();
  WriteText(dir / "eval_tasks.json", json(data.eval_tasks).dump(2) + "\n");
  WriteText(SpecPathFor(cfg), spec.ToJson().dump(2) + "\n");
  err << "wrote synthetic data (seed " << spec.seed << ") to " << dir.string() << "\n";
  out << json{{"v", 1},
              {"seed", spec.seed},
              {"records", data.store.size()},
              {"train_tasks", data.catalog.tasks.size()},
              {"eval_tasks", data.eval_tasks.size()},
              {"records_path", cfg.records_path.string()},
              {"catalog_path", cfg.catalog_path.string()}}
             .dump()
      << "\n";
  return kExitOk;
}

int CmdTrain(const Options& o, AppConfig cfg, std::ostream& out, std::ostream& err) {
  if (!o.train_selector.empty()) {
    auto k = ParseSelectorKind(o.train_selector);
    if (!k) throw UsageError("unknown selector kind '" + o.train_selector + "'");
    cfg.selector = *k;
  }
  if (!o.train_style.empty()) cfg.style = StyleArg(o.train_style);
  if (o.train_rank != 0) cfg.rank = o.train_rank;
  cfg.Validate();

  std::shared_ptr<const Snapshot> snap;
  std::size_t rows = 0;
  std::vector<std::string> warnings;
  if (cfg.selector == SelectorKind::kOracle) {
    // Ground truth is only known for synthetic data.
    const fs::path p = SpecPathFor(cfg);
    if (!fs::exists(p)) {
      throw UsageError("the oracle selector needs " + p.string() + " (run synth first)");
    }
    snap = MakeSnapshot(MakeSynthOracle(SynthSpec::FromJson(ReadJson(p))));
  } else if (cfg.selector == SelectorKind::kRandom) {
    throw UsageError("the random selector is evaluation-only");
  } else {
    const RecordStore store = RecordStore::Load(cfg.records_path);
    const Catalog catalog = Catalog::Load(cfg.catalog_path);
    SelectorSpec spec;
    spec.kind = cfg.selector;
    TrainOutcome t = TrainFromRecords(store, catalog, spec,
                                      {cfg.style, cfg.rank, cfg.provider},
                                      ProviderFor(cfg));
    snap = t.snapshot;
    rows = t.train_rows;
    warnings = t.warnings;
  }
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  WriteText(cfg.model_path, snap->model.dump());
  err << "saved " << ToString(cfg.selector) << " to " << cfg.model_path.string() << "\n";
  out << json{{"v", 1},
              {"selector", ToString(cfg.selector)},
              {"model_version", snap->model_version},
              {"train_rows", rows},
              {"warnings", warnings}}
             .dump()
      << "\n";
  return kExitOk;
}

int CmdSelect(const Options& o, const AppConfig& cfg, std::ostream& out, std::ostream&) {
  const Catalog catalog = LoadCatalogIfAny(cfg.catalog_path);
  if (!fs::exists(cfg.model_path)) {
    throw UsageError("no trained model at " + cfg.model_path.string() + " (run train first)");
  }
  auto snap = MakeSnapshot(
      LoadSelector(ReadJson(cfg.model_path), ProviderFor(cfg), SynthOracleFactory()));

  HardwareProfile hw = catalog.hardware_profile(o.hardware);
  if (o.price) hw.price_per_hour = *o.price;
  json req = {{"v", 1},
              {"task",
               {{"description", o.task_desc},
                {"batch_size", o.batch_size},
                {"prompt_count", o.prompt_count}}},
              {"model", o.model},
              {"budget", o.budget ? json(*o.budget) : json(nullptr)}};
  SelectionRequest sr{TaskFromRequest(req), hw,
                      BudgetFromRequest(req, cfg.default_budget), snap->selector};
  json res = SelectionToWire(Select(sr));
  res["model_version"] = snap->model_version;
  out << res.dump() << "\n";
  return kExitOk;
}

ExperimentConfig ExperimentFor(const Options& o, const AppConfig& cfg) {
  ExperimentConfig ec;
  ec.embedding = {cfg.style, cfg.rank, cfg.provider};
  if (!o.eval_style.empty()) ec.embedding.style = StyleArg(o.eval_style);
  if (o.eval_rank != 0) ec.embedding.rank = o.eval_rank;
  return ec;
}

int CmdEvaluate(const Options& o, const AppConfig& cfg, std::ostream& out, std::ostream& err) {
  const SynthData data = GenerateSynthetic(SpecArg(o.eval_spec, o.eval_synth_seed));
  const ProtocolReport rep =
      RunExperiment(ExperimentFor(o, cfg), data, ProviderFor(cfg), o.trials, o.seed);
  if (!o.out_dir.empty()) {
    const fs::path d = o.out_dir;
    WriteText(d / "summary.csv", rep.SummaryCsv());
    WriteText(d / "trials.csv", rep.TrialCsv());
    WriteText(d / "report.json", rep.ToJson().dump(2) + "\n");
    err << "wrote reports to " << d.string() << "\n";
  }
  out << rep.ToJson().dump(2) << "\n";
  return kExitOk;
}

int CmdAblate(const Options& o, const AppConfig& cfg, std::ostream& out, std::ostream& err) {
  const SynthData data = GenerateSynthetic(SpecArg(o.eval_spec, o.eval_synth_seed));
  std::vector<PromptStyle> styles;
  for (const auto& s : o.styles) styles.push_back(StyleArg(s));
  for (int k : o.ranks) {
    if (k < 1) throw UsageError("ranks must be >= 1");
  }
  const AblationReport rep = RunAblation(ExperimentFor(o, cfg), data, ProviderFor(cfg),
                                         styles, o.ranks, o.trials, o.seed);
  if (!o.out_dir.empty()) {
    const fs::path d = o.out_dir;
    WriteText(d / "ablation.csv", rep.Csv());
    WriteText(d / "ablation.json", rep.ToJson().dump(2) + "\n");
    err << "wrote ablation to " << d.string() << "\n";
  }
  out << rep.ToJson().dump(2) << "\n";
  return kExitOk;
}

int CmdServe(const Options& o, AppConfig cfg, std::ostream& out, std::ostream& err) {
  if (!o.host.empty()) cfg.host = o.host;
  if (o.port) cfg.port = *o.port;
  cfg.Validate();
  Service service(cfg, ProviderFor(cfg), SynthOracleFactory());
  service.LoadState();
  if (!service.snapshot() && service.record_count() > 0) {
    err << "no model at " << cfg.model_path.string() << "; training at startup\n";
    ServiceResponse r = service.HandleTrain("");
    if (r.status != 200) err << "startup training failed: " << r.body.dump() << "\n";
  }
  if (!service.snapshot()) err << "serving without a model; /v1/select returns 503\n";
  const int port = service.Bind();
  out << json{{"v", 1}, {"host", cfg.host}, {"port", port}}.dump() << std::endl;
  err << "listening on " << cfg.host << ":" << port << "\n";
  SignalStopper stopper(service);
  service.Run();
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Zero-shot selection of LLM inference acceleration methods", "metainf"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_file, "TOML configuration file");
  app.add_option("--data-dir", o.data_dir, "Directory holding records, catalog and model");

  auto* ingest = app.add_subcommand("ingest", "Append performance records to the store");
  ingest->add_option("path", o.ingest_path, "JSONL or CSV records")->required();
  ingest->add_option("--format", o.ingest_format, "jsonl or csv (default: by extension)");
  ingest->add_option("--catalog", o.ingest_catalog, "Catalog JSON to merge");

  auto* synth = app.add_subcommand("synth", "Generate calibrated synthetic data");
  synth->add_option("--seed", o.synth_seed, "Generator seed");
  synth->add_option("--out", o.synth_out, "Output directory (default: data dir)");
  synth->add_option("--spec", o.synth_spec, "Generator spec JSON");

  auto* train = app.add_subcommand("train", "Fit a selector and save it");
  train->add_option("--selector", o.train_selector, "Selector kind");
  train->add_option("--style", o.train_style, "Prompt style");
  train->add_option("--rank", o.train_rank, "SVD rank");

  auto* select = app.add_subcommand("select", "Pick a method for one task");
  select->add_option("--task-desc", o.task_desc, "Task description")->required();
  select->add_option("--model", o.model, "Served model id")->required();
  select->add_option("--hardware", o.hardware, "Catalog hardware id")->required();
  select->add_option("--batch-size", o.batch_size, "Batch size");
  select->add_option("--prompt-count", o.prompt_count, "Prompt count");
  select->add_option("--price", o.price, "Override price per hour");
  select->add_option("--budget", o.budget, "Cost budget (default: unlimited)");

  auto* evaluate = app.add_subcommand("evaluate", "Run the selection protocol on synthetic data");
  auto* ablate = app.add_subcommand("ablate", "Prompt style and rank ablation");
  for (auto* sub : {evaluate, ablate}) {
    sub->add_option("--trials", o.trials, "Number of trials");
    sub->add_option("--seed", o.seed, "Trial sampling seed");
    sub->add_option("--synth-seed", o.eval_synth_seed, "Generator seed");
    sub->add_option("--spec", o.eval_spec, "Generator spec JSON");
    sub->add_option("--out-dir", o.out_dir, "Write CSV and JSON reports here");
  }
  evaluate->add_option("--style", o.eval_style, "Prompt style");
  evaluate->add_option("--rank", o.eval_rank, "SVD rank");
  ablate->add_option("--styles", o.styles, "Prompt styles");
  ablate->add_option("--ranks", o.ranks, "SVD ranks");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    const AppConfig cfg = ResolveConfig(o);
    if (*ingest) return CmdIngest(o, cfg, out, err);
    if (*synth) return CmdSynth(o, cfg, out, err);
    if (*train) return CmdTrain(o, cfg, out, err);
    if (*select) return CmdSelect(o, cfg, out, err);
    if (*evaluate) return CmdEvaluate(o, cfg, out, err);
    if (*ablate) return CmdAblate(o, cfg, out, err);
    if (*serve) return CmdServe(o, cfg, out, err);
    err << app.help();
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    out << json{{"v", 1},
                {"error", "infeasible"},
                {"cheapest_cost", e.cheapest_cost()},
                {"budget", e.budget()}}
               .dump()
        << "\n";
    err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error (" << ToString(e.category()) << "): " << e.what() << "\n";
    return ExitCodeFor(e.category());
  } catch (const json::exception& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace metainf

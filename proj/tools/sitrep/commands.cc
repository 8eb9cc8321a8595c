#include "commands.h"

#include <pthread.h>

#include <charconv>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "sitrep/dag.h"
#include "sitrep/error.h"
#include "sitrep/evaluation.h"
#include "sitrep/http_server.h"
#include "sitrep/service.h"
#include "sitrep/split.h"
#include "sitrep/synthetic.h"

namespace sitrep::cli {

namespace {

namespace fs = std::filesystem;

nlohmann::json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void WriteJson(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// Output locations are checked before any work starts.
void CheckOutputPath(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) {
    throw ConfigError("output directory '" + parent.string() + "' does not exist");
  }
}

nlohmann::json ClassCountsJson(const DatasetTable& table) {
  const auto counts = table.ClassCounts();
  nlohmann::json j = nlohmann::json::object();
  for (SeverityClass c : kAllSeverityClasses) {
    j[std::string(SeverityName(c))] = counts[ClassIndex(c)];
  }
  return j;
}

struct TrainOptions {
  std::string config_path;
  std::string preset = "default";
  int epochs = 0;
  std::int64_t seed = -1;

  void Register(CLI::App* sub) {
    sub->add_option("--train-config", config_path, "MLP training config (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "Architecture preset")
        ->check(CLI::IsMember({"default", "five-layer"}));
    sub->add_option("--epochs", epochs, "Override the number of epochs")
        ->check(CLI::PositiveNumber);
    sub->add_option("--train-seed", seed, "Override the training seed")
        ->check(CLI::NonNegativeNumber);
  }

  TrainConfig Build() const {
    TrainConfig config =
        preset == "five-layer" ? TrainConfig::FiveLayerPreset() : TrainConfig{};
    if (!config_path.empty()) config = TrainConfig::FromJson(ReadJson(config_path));
    if (epochs > 0) config.epochs = epochs;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    config.Validate();
    return config;
  }
};

// Flags shared by every command that answers queries against loaded models.
struct StateOptions {
  std::string data;
  std::string models;
  std::string geometry;
  std::string manifest;
  std::string defaults;
  TrainOptions train;

  void Register(CLI::App* sub) {
    sub->add_option("--data", data, "County dataset (CSV)")
        ->envname("SITREP_DATA")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--models", models, "Directory holding <dag>.json checkpoints")
        ->envname("SITREP_MODELS")
        ->check(CLI::ExistingDirectory);
    sub->add_option("--geometry", geometry, "County geometry (GeoJSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--manifest", manifest, "Group manifest (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--defaults", defaults, "Service defaults (JSON)")
        ->check(CLI::ExistingFile);
    train.Register(sub);
  }

  ServiceOptions Build(std::vector<std::string> dags) const {
    ServiceOptions options;
    options.data_path = data;
    options.models_dir = models;
    options.geometry_path = geometry;
    options.manifest_path = manifest;
    options.dags = std::move(dags);
    options.train = train.Build();
    if (!defaults.empty()) options.defaults = ServiceDefaults::FromJson(ReadJson(defaults));
    return options;
  }

  std::shared_ptr<AppState> Load(const std::string& dag) const {
    auto state = LoadAppState(Build({dag}));
    for (const auto& w : state->warnings) std::cerr << "warning: " << w << '\n';
    return state;
  }
};

struct RecordOptions {
  std::string fips;
  std::string event;
  std::string dag{kFlatDag};

  void Register(CLI::App* sub) {
    sub->add_option("--fips", fips, "County FIPS code")->required();
    sub->add_option("--event", event, "Event id (required when the county has several)");
    sub->add_option("--dag", dag, "dag1 (flat classifier), dag2 or dag3 (causal)");
  }
};

std::pair<std::string, double> ParseAssignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("expected name=value, got '" + text + "'", "set");
  }
  const std::string name = text.substr(0, eq);
  const std::string value_text = text.substr(eq + 1);
  double value = 0.0;
  const auto* end = value_text.data() + value_text.size();
  auto [ptr, ec] = std::from_chars(value_text.data(), end, value);
  if (value_text.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError("'" + value_text + "' is not a number", name);
  }
  return {name, value};
}

void AddSynth(CLI::App& app, Action& action) {
  struct Options {
    std::string out;
    std::string truth;
    std::string geometry;
    std::string config;
    std::string preset = "default";
    int counties = 0;
    int events = 0;
    std::string dag;
    std::int64_t seed = -1;
    double noise = -1.0;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("synth", "Generate a synthetic dataset from a known SCM");
  sub->add_option("--out", o->out, "Output CSV")->required();
  sub->add_option("--truth", o->truth, "Write the ground-truth equations (JSON)");
  sub->add_option("--geometry", o->geometry, "Write grid geometry (GeoJSON)");
  sub->add_option("--config", o->config, "Generator config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--preset", o->preset, "Generator preset")
      ->check(CLI::IsMember({"default", "separable"}));
  sub->add_option("--counties", o->counties, "Number of records")->check(CLI::PositiveNumber);
  sub->add_option("--events", o->events, "Number of events")->check(CLI::PositiveNumber);
  sub->add_option("--dag", o->dag, "Generating DAG")
      ->check(CLI::IsMember({"dag1", "dag2", "dag3"}));
  sub->add_option("--seed", o->seed, "Generator seed")->check(CLI::NonNegativeNumber);
  sub->add_option("--noise", o->noise, "Relative noise of non-root equations")
      ->check(CLI::NonNegativeNumber);
  sub->callback([o, &action]() {
    action = [o]() {
      CheckOutputPath(o->out);
      CheckOutputPath(o->truth);
      CheckOutputPath(o->geometry);
      SyntheticConfig config =
          o->preset == "separable" ? SyntheticConfig::Separable() : SyntheticConfig{};
      if (!o->config.empty()) config = SyntheticConfig::FromJson(ReadJson(o->config));
      if (o->counties > 0) config.counties = o->counties;
      if (o->events > 0) config.events = o->events;
      if (!o->dag.empty()) config.dag = o->dag;
      if (o->seed >= 0) config.seed = static_cast<std::uint64_t>(o->seed);
      if (o->noise >= 0.0) config.noise_scale = o->noise;
      const SyntheticData data = GenerateSynthetic(config);
      SaveDataset(data.table, o->out);
      if (!o->truth.empty()) WriteJson(data.truth.ToJson(), o->truth);
      if (!o->geometry.empty()) WriteJson(SyntheticGeometry(data.table), o->geometry);
      return CommandOutput{"synth",
                           {{"out", o->out},
                            {"records", data.table.size()},
                            {"events", data.table.Events()},
                            {"class_counts", ClassCountsJson(data.table)},
                            {"config", data.config.ToJson()}}};
    };
  });
}

void AddIngest(CLI::App& app, Action& action) {
  struct Options {
    std::string data;
    std::string manifest;
    std::string geometry;
    std::string out;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("ingest", "Validate a dataset and its geometry");
  sub->add_option("--data", o->data, "County dataset (CSV)")
      ->envname("SITREP_DATA")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--manifest", o->manifest, "Group manifest (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--geometry", o->geometry, "County geometry (GeoJSON)")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Rewrite the dataset in schema order");
  sub->callback([o, &action]() {
    action = [o]() {
      CheckOutputPath(o->out);
      const FeatureSchema schema = LoadSchema(o->manifest);
      const DatasetTable table = LoadDataset(o->data, schema);
      nlohmann::json body = {{"records", table.size()},
                             {"events", table.Events()},
                             {"fully_labeled", table.fully_labeled()},
                             {"class_counts", ClassCountsJson(table)},
                             {"features", schema.size()},
                             {"schema_hash", schema.Hash()}};
      std::vector<std::string> warnings;
      if (!o->geometry.empty()) {
        const GeometryCollection geometry = LoadGeometries(o->geometry);
        warnings = geometry.warnings;
        std::set<std::string> missing;
        for (const auto& r : table.records()) {
          if (!geometry.Find(r.fips)) missing.insert(r.fips);
        }
        for (const auto& fips : missing) warnings.push_back("no geometry for county " + fips);
        body["geometry_counties"] = geometry.counties.size();
        body["missing_geometry"] = missing;
      }
      body["warnings"] = warnings;
      if (!o->out.empty()) {
        SaveDataset(table, o->out);
        body["out"] = o->out;
      }
      return CommandOutput{"ingest", body};
    };
  });
}

void AddTrain(CLI::App& app, Action& action) {
  struct Options {
    std::string data;
    std::string manifest;
    std::string out;
    std::vector<std::string> dags;
    std::string dag_file;
    TrainOptions train;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("train", "Fit the flat classifier and the causal models");
  sub->add_option("--data", o->data, "Labeled county dataset (CSV)")
      ->envname("SITREP_DATA")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--manifest", o->manifest, "Group manifest (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Checkpoint directory")
      ->envname("SITREP_MODELS")
      ->required()
      ->check(CLI::ExistingDirectory);
  sub->add_option("--dag", o->dags, "DAGs to fit (default: dag1 dag2 dag3)")
      ->check(CLI::IsMember({"dag1", "dag2", "dag3"}));
  sub->add_option("--dag-file", o->dag_file, "Fit an extra causal model from a DAG file")
      ->check(CLI::ExistingFile);
  o->train.Register(sub);
  sub->callback([o, &action]() {
    action = [o]() {
      const TrainConfig config = o->train.Build();
      const FeatureSchema schema = LoadSchema(o->manifest);
      std::vector<CausalDag> dags;
      std::vector<std::string> names = o->dags;
      if (names.empty()) names = {"dag1", "dag2", "dag3"};
      std::optional<CausalDag> custom;
      if (!o->dag_file.empty()) custom = CausalDag::FromJson(ReadJson(o->dag_file));
      const DatasetTable table = LoadDataset(o->data, schema);
      nlohmann::json models = nlohmann::json::array();
      for (const auto& name : names) {
        const std::string path = ModelPath(o->out, name);
        if (name == kFlatDag) {
          TrainClassifier(table, config).Save(path);
          models.push_back({{"dag", name}, {"kind", "mlp"}, {"path", path}});
        } else {
          FitScm(table, ExpandDag(BuiltinDag(name), schema), config).Save(path);
          models.push_back({{"dag", name}, {"kind", "scm"}, {"path", path}});
        }
      }
      if (custom) {
        const std::string path = ModelPath(o->out, custom->name());
        FitScm(table, ExpandDag(*custom, schema), config).Save(path);
        models.push_back({{"dag", custom->name()}, {"kind", "scm"}, {"path", path}});
      }
      return CommandOutput{"train",
                           {{"models", models},
                            {"records", table.size()},
                            {"schema_hash", schema.Hash()},
                            {"train_config", config.ToJson()}}};
    };
  });
}

void AddEval(CLI::App& app, Action& action) {
  struct Options {
    std::string data;
    std::string manifest;
    std::string dag{kFlatDag};
    int folds = 5;
    std::uint64_t seed = 7;
    TrainOptions train;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("eval", "Stratified k-fold macro-F1");
  sub->add_option("--data", o->data, "Labeled county dataset (CSV)")
      ->envname("SITREP_DATA")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--manifest", o->manifest, "Group manifest (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--dag", o->dag, "Model to evaluate")
      ->check(CLI::IsMember({"dag1", "dag2", "dag3"}));
  sub->add_option("--folds", o->folds, "Number of folds")->check(CLI::Range(2, 1000));
  sub->add_option("--seed", o->seed, "Split seed");
  o->train.Register(sub);
  sub->callback([o, &action]() {
    action = [o]() {
      const TrainConfig config = o->train.Build();
      const FeatureSchema schema = LoadSchema(o->manifest);
      const DatasetTable table = LoadDataset(o->data, schema);
      const SplitPlan plan = StratifiedKFold(table, o->folds, o->seed);
      EvalReport report;
      if (o->dag == kFlatDag) {
        report = EvaluateMacroF1(table, plan, config);
      } else {
        const FeatureDag dag = ExpandDag(BuiltinDag(o->dag), schema);
        report = EvaluateMacroF1(table, plan, [&](const DatasetTable& train) {
          return std::make_unique<ScmModel>(
              std::make_shared<StructuralModel>(FitScm(train, dag, config)));
        });
      }
      nlohmann::json body = report.ToJson();
      body["dag"] = o->dag;
      body["folds"] = o->folds;
      body["seed"] = o->seed;
      body["train_config"] = config.ToJson();
      return CommandOutput{"eval", body};
    };
  });
}

void AddPredict(CLI::App& app, Action& action) {
  struct Options {
    StateOptions state;
    std::string event;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("predict", "Classify every county of an event with dag1");
  o->state.Register(sub);
  sub->add_option("--event", o->event, "Event id")->required();
  sub->callback([o, &action]() {
    action = [o]() {
      const auto state = o->state.Load(std::string(kFlatDag));
      return CommandOutput{"predict", CountiesPayload(*state, o->event)};
    };
  });
}

void AddSimulate(CLI::App& app, Action& action) {
  struct Options {
    StateOptions state;
    RecordOptions record;
    std::vector<std::string> sets;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("simulate", "Counterfactual severity under interventions");
  o->state.Register(sub);
  o->record.Register(sub);
  sub->add_option("--set", o->sets, "Intervention name=value (repeatable)");
  sub->callback([o, &action]() {
    action = [o]() {
      SimulateRequest request;
      request.fips = o->record.fips;
      request.event = o->record.event;
      request.dag = o->record.dag;
      for (const auto& s : o->sets) {
        auto [name, value] = ParseAssignment(s);
        request.interventions[name] = value;
      }
      const auto state = o->state.Load(request.dag);
      return CommandOutput{"simulate", SimulatePayload(*state, request)};
    };
  });
}

void AddAttribute(CLI::App& app, Action& action) {
  struct Options {
    StateOptions state;
    RecordOptions record;
    std::string level = "feature";
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("attribute", "Necessity scores by feature, group or source");
  o->state.Register(sub);
  o->record.Register(sub);
  sub->add_option("--level", o->level, "feature, group or source");
  sub->add_option("--seed", o->seed, "Sampling seed");
  sub->add_option("--n", o->samples, "Samples per unit")->check(CLI::PositiveNumber);
  sub->callback([o, &action]() {
    action = [o]() {
      AttributionQuery query;
      query.fips = o->record.fips;
      query.event = o->record.event;
      query.dag = o->record.dag;
      query.level = ParseLevel(o->level);
      query.seed = o->seed;
      query.samples = o->samples;
      const auto state = o->state.Load(query.dag);
      return CommandOutput{"attribute", AttributionPayload(*state, query)};
    };
  });
}

void AddRecourse(CLI::App& app, Action& action) {
  struct Options {
    StateOptions state;
    RecordOptions record;
    std::string desired;
    std::optional<int> max_features;
    std::optional<int> num_suggestions;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> immutable;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("recourse", "Feature changes that reach a desired severity");
  o->state.Register(sub);
  o->record.Register(sub);
  sub->add_option("--desired", o->desired, "Low, Medium or High")->required();
  sub->add_option("--max-features", o->max_features, "Change budget k");
  sub->add_option("--num-suggestions", o->num_suggestions, "Number of suggestions m");
  sub->add_option("--seed", o->seed, "Search seed");
  sub->add_option("--immutable", o->immutable, "Feature that may not change (repeatable)");
  sub->callback([o, &action]() {
    action = [o]() {
      RecourseQuery query;
      query.fips = o->record.fips;
      query.event = o->record.event;
      query.dag = o->record.dag;
      query.desired = ParseSeverity(o->desired);
      query.max_features = o->max_features;
      query.num_suggestions = o->num_suggestions;
      query.seed = o->seed;
      query.immutable.insert(o->immutable.begin(), o->immutable.end());
      const auto state = o->state.Load(query.dag);
      return CommandOutput{"recourse", RecoursePayload(*state, query)};
    };
  });
}

void AddValidate(CLI::App& app, Action& action) {
  struct Options {
    StateOptions state;
    std::string suggestions;
    std::optional<int> max_features;
    std::vector<std::string> immutable;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("validate", "Re-check the output of `recourse --json`");
  o->state.Register(sub);
  sub->add_option("--suggestions", o->suggestions, "Recourse output (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--max-features", o->max_features, "Budget to check against");
  sub->add_option("--immutable", o->immutable, "Feature that may not change (repeatable)");
  sub->callback([o, &action]() {
    action = [o]() {
      const nlohmann::json input = ReadJson(o->suggestions);
      std::string fips, event, dag, desired;
      int budget = 0;
      try {
        fips = input.at("fips").get<std::string>();
        event = input.at("event").get<std::string>();
        dag = input.value("dag", std::string(kFlatDag));
        desired = input.at("desired").get<std::string>();
        budget = input.at("max_features").get<int>();
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("not a recourse payload: ") + e.what(), "suggestions");
      }
      const auto state = o->state.Load(dag);
      const auto& record = state->dataset.record(state->RecordIndex(fips, event));
      RecourseRequest request;
      request.features = record.features;
      request.desired = ParseSeverity(desired);
      request.max_features = o->max_features.value_or(budget);
      request.immutable.insert(o->immutable.begin(), o->immutable.end());
      nlohmann::json verdicts = nlohmann::json::array();
      bool all_ok = true;
      for (const auto& s : input.value("suggestions", nlohmann::json::array())) {
        const auto suggestion = RecourseSuggestion::FromJson(s, state->schema());
        const auto verdict =
            ValidateRecourse(state->Model(dag), state->schema(), request, suggestion);
        all_ok = all_ok && verdict.ok();
        verdicts.push_back(verdict.ToJson());
      }
      CommandOutput out{"validate",
                        {{"fips", fips},
                         {"event", event},
                         {"dag", dag},
                         {"all_ok", all_ok},
                         {"verdicts", verdicts}}};
      out.exit_code = all_ok ? 0 : 1;
      return out;
    };
  });
}

void AddServe(CLI::App& app, Action& action) {
  struct Options {
    StateOptions state;
    std::string addr = "127.0.0.1:8080";
    std::vector<std::string> dags = {"dag1", "dag2", "dag3"};
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("serve", "Run the HTTP/JSON API");
  o->state.Register(sub);
  sub->add_option("--addr", o->addr, "Listen address host:port")->envname("SITREP_ADDR");
  sub->add_option("--dag", o->dags, "Models to load")
      ->check(CLI::IsMember({"dag1", "dag2", "dag3"}));
  sub->callback([o, &action]() {
    action = [o]() {
      const auto [host, port] = ParseAddress(o->addr);
      const ServiceOptions options = o->state.Build(o->dags);
      auto loader = [options]() { return LoadAppState(options); };
      auto initial = loader();
      for (const auto& w : initial->warnings) std::cerr << "warning: " << w << '\n';
      auto service = std::make_shared<Service>(std::move(initial), loader);
      HttpServer server(service);

      // Shut down cleanly on SIGINT/SIGTERM via a dedicated waiter thread.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      std::thread waiter([&server, signals]() {
        int received = 0;
        sigwait(&signals, &received);
        server.Stop();
      });
      std::cerr << "listening on " << host << ":" << port << '\n';
      try {
        server.Listen(host, port);
      } catch (...) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
        throw;
      }
      if (waiter.joinable()) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
      }
      return CommandOutput{"serve", {{"status", "stopped"}}};
    };
  });
}

}  // namespace

void RegisterCommands(CLI::App& app, Action& action) {
  AddSynth(app, action);
  AddIngest(app, action);
  AddTrain(app, action);
  AddEval(app, action);
  AddPredict(app, action);
  AddSimulate(app, action);
  AddAttribute(app, action);
  AddRecourse(app, action);
  AddValidate(app, action);
  AddServe(app, action);
}

}  // namespace sitrep::cli

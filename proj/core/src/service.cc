#include "sitrep/service.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <utility>

#include "sitrep/dag.h"
#include "sitrep/error.h"

namespace sitrep {

namespace {

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

template <typename T>
T ParseNumber(std::string_view text, const std::string& field) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError("'" + std::string(text) + "' is not a valid " + field, field);
  }
  return value;
}

template <typename T>
T Field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("missing or malformed field '") + key + "'", key);
  }
}

template <typename T>
std::optional<T> OptionalField(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return Field<T>(j, key);
}

std::string RecordId(const CountyRecord& r) { return r.fips + ":" + r.event_id; }

}  // namespace

nlohmann::json ServiceDefaults::ToJson() const {
  return {{"attribution_samples", attribution_samples},
          {"seed", seed},
          {"max_features", max_features},
          {"num_suggestions", num_suggestions},
          {"threads", threads},
          {"population", search.population},
          {"generations", search.generations},
          {"refine_steps", search.refine_steps}};
}

ServiceDefaults ServiceDefaults::FromJson(const nlohmann::json& j) {
  ServiceDefaults d;
  try {
    d.attribution_samples = j.value("attribution_samples", d.attribution_samples);
    d.seed = j.value("seed", d.seed);
    d.max_features = j.value("max_features", d.max_features);
    d.num_suggestions = j.value("num_suggestions", d.num_suggestions);
    d.threads = j.value("threads", d.threads);
    d.search.population = j.value("population", d.search.population);
    d.search.generations = j.value("generations", d.search.generations);
    d.search.refine_steps = j.value("refine_steps", d.search.refine_steps);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed service defaults: ") + e.what());
  }
  if (d.attribution_samples <= 0 || d.max_features <= 0 || d.num_suggestions <= 0 ||
      d.threads == 0) {
    throw ConfigError("service defaults must be positive");
  }
  return d;
}

const SeverityModel& AppState::Model(std::string_view dag) const {
  auto it = models.find(dag);
  if (it == models.end()) {
    throw ValidationError("dag '" + std::string(dag) + "' is not loaded", "dag");
  }
  return *it->second;
}

std::size_t AppState::RecordIndex(std::string_view fips, std::string_view event) const {
  if (!event.empty()) {
    if (auto i = dataset.Find(fips, event)) return *i;
    throw NotFoundError("no record for county " + std::string(fips) + " in event '" +
                        std::string(event) + "'");
  }
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.record(i).fips != fips) continue;
    if (found) {
      throw ValidationError("county " + std::string(fips) +
                                " appears in several events; pass an event",
                            "event");
    }
    found = i;
  }
  if (!found) throw NotFoundError("unknown county " + std::string(fips));
  return *found;
}

std::string AppState::CountyName(std::string_view fips) const {
  if (const auto* g = geometry.Find(fips)) return g->name;
  return std::string(fips);
}

std::shared_ptr<AppState> MakeAppState(
    DatasetTable dataset, GeometryCollection geometry,
    std::shared_ptr<const MlpModel> classifier,
    std::map<std::string, std::shared_ptr<const StructuralModel>> scms,
    ServiceDefaults defaults) {
  if (!classifier) throw ConfigError("the flat classifier is required");
  if (dataset.empty()) throw ConfigError("the dataset is empty");
  const std::string hash = dataset.schema().Hash();
  if (classifier->schema_hash() != hash) {
    throw ConfigError("dag1 classifier was fitted against another schema");
  }
  auto state = std::make_shared<AppState>();
  state->models.emplace(std::string(kFlatDag),
                        std::make_shared<ClassifierModel>(classifier));
  for (const auto& [name, scm] : scms) {
    if (!scm) throw ConfigError("missing model for '" + name + "'");
    if (name == kFlatDag) throw ConfigError("dag1 is reserved for the flat classifier");
    if (scm->schema_hash() != hash) {
      throw ConfigError(name + " was fitted against another schema");
    }
    state->models.emplace(name, std::make_shared<ScmModel>(scm));
  }
  state->space = FeatureSpace::FromTable(dataset);
  state->dataset = std::move(dataset);
  state->geometry = std::move(geometry);
  state->classifier = std::move(classifier);
  state->scms = std::move(scms);
  state->defaults = defaults;
  return state;
}

std::string ModelPath(const std::string& models_dir, std::string_view dag) {
  return (std::filesystem::path(models_dir) / (std::string(dag) + ".json")).string();
}

FeatureSchema LoadSchema(const std::string& manifest_path) {
  if (manifest_path.empty()) return DefaultSchema();
  return DefaultSchema().WithManifest(GroupManifest::FromJson(ReadJsonFile(manifest_path)));
}

std::shared_ptr<AppState> LoadAppState(const ServiceOptions& options) {
  if (options.data_path.empty()) throw ConfigError("no dataset path given");
  const FeatureSchema schema = LoadSchema(options.manifest_path);
  DatasetTable table = LoadDataset(options.data_path, schema);
  GeometryCollection geometry;
  if (!options.geometry_path.empty()) geometry = LoadGeometries(options.geometry_path);

  std::vector<std::string> warnings;
  auto checkpoint = [&](std::string_view dag) -> std::optional<std::string> {
    if (options.models_dir.empty()) return std::nullopt;
    std::string path = ModelPath(options.models_dir, dag);
    if (std::filesystem::exists(path)) return path;
    return std::nullopt;
  };
  auto note_training = [&](std::string_view dag) {
    warnings.push_back("no checkpoint for " + std::string(dag) +
                       "; trained from the loaded dataset");
  };

  std::shared_ptr<const MlpModel> classifier;
  if (auto path = checkpoint(kFlatDag)) {
    classifier = std::make_shared<MlpModel>(MlpModel::Load(*path));
  } else {
    note_training(kFlatDag);
    classifier = std::make_shared<MlpModel>(TrainClassifier(table, options.train));
  }
  std::map<std::string, std::shared_ptr<const StructuralModel>> scms;
  for (const auto& dag : options.dags) {
    if (dag == kFlatDag) continue;
    if (auto path = checkpoint(dag)) {
      scms[dag] = std::make_shared<StructuralModel>(StructuralModel::Load(*path, schema));
    } else {
      note_training(dag);
      scms[dag] = std::make_shared<StructuralModel>(
          FitScm(table, ExpandDag(BuiltinDag(dag), schema), options.train));
    }
  }
  auto state = MakeAppState(std::move(table), std::move(geometry), std::move(classifier),
                            std::move(scms), options.defaults);
  state->warnings = std::move(warnings);
  state->warnings.insert(state->warnings.end(), state->geometry.warnings.begin(),
                         state->geometry.warnings.end());
  return state;
}

SimulateRequest SimulateRequest::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  SimulateRequest r;
  r.fips = Field<std::string>(j, "fips");
  r.event = OptionalField<std::string>(j, "event").value_or("");
  r.dag = OptionalField<std::string>(j, "dag").value_or(std::string(kFlatDag));
  if (j.contains("interventions") && !j["interventions"].is_null()) {
    const auto& iv = j["interventions"];
    if (!iv.is_object()) throw ValidationError("interventions must be an object", "interventions");
    for (const auto& [name, value] : iv.items()) {
      if (!value.is_number()) {
        throw ValidationError("intervention on '" + name + "' is not a number", name);
      }
      r.interventions[name] = value.get<double>();
    }
  }
  return r;
}

RecourseQuery RecourseQuery::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  RecourseQuery q;
  q.fips = Field<std::string>(j, "fips");
  q.event = OptionalField<std::string>(j, "event").value_or("");
  q.dag = OptionalField<std::string>(j, "dag").value_or(std::string(kFlatDag));
  q.desired = ParseSeverity(Field<std::string>(j, "desired"));
  q.max_features = OptionalField<int>(j, "max_features");
  q.num_suggestions = OptionalField<int>(j, "num_suggestions");
  q.seed = OptionalField<std::uint64_t>(j, "seed");
  if (auto immutable = OptionalField<std::vector<std::string>>(j, "immutable")) {
    q.immutable.insert(immutable->begin(), immutable->end());
  }
  return q;
}

nlohmann::json PredictionJson(const Prediction& p) {
  return {{"class", SeverityName(p.label)}, {"probabilities", p.probabilities}};
}

nlohmann::json CountiesPayload(const AppState& state, std::string_view event) {
  const auto indices = state.dataset.RecordsForEvent(event);
  if (indices.empty()) throw NotFoundError("unknown event '" + std::string(event) + "'");
  const SeverityModel& model = state.Model(kFlatDag);
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i : indices) {
    const auto& r = state.dataset.record(i);
    const auto p = model.Predict(r.features);
    list.push_back({{"fips", r.fips},
                    {"name", state.CountyName(r.fips)},
                    {"predicted_class", SeverityName(p.label)},
                    {"probabilities", p.probabilities}});
  }
  return {{"event", event}, {"counties", list}};
}

nlohmann::json CountyPayload(const AppState& state, std::string_view fips,
                             std::string_view event) {
  const std::size_t i = state.RecordIndex(fips, event);
  const auto& r = state.dataset.record(i);
  const auto& schema = state.schema();
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    features.push_back({{"name", f.name},
                        {"value", r.features[j]},
                        {"source", SourceName(f.source)},
                        {"group", f.group},
                        {"unit", UnitName(f.unit)},
                        {"slider_max", state.space.sampler().Quantile(j, 0.99)}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : schema.manifest().groups()) {
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t j : schema.GroupMembers(g.id)) members.push_back(schema.feature(j).name);
    groups.push_back({{"id", g.id}, {"display_name", g.display_name}, {"features", members}});
  }
  nlohmann::json sources = nlohmann::json::array();
  for (Source s : kAllSources) {
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t j : schema.SourceMembers(s)) members.push_back(schema.feature(j).name);
    sources.push_back({{"id", SourceName(s)}, {"features", members}});
  }
  nlohmann::json out = {{"fips", r.fips},
                        {"event", r.event_id},
                        {"name", state.CountyName(r.fips)},
                        {"features", features},
                        {"prediction", PredictionJson(state.Model(kFlatDag).Predict(r.features))},
                        {"groups", groups},
                        {"sources", sources}};
  if (r.damage_dollars) out["damage_dollars"] = *r.damage_dollars;
  return out;
}

nlohmann::json SimulatePayload(const AppState& state, const SimulateRequest& request) {
  const SeverityModel& model = state.Model(request.dag);
  const auto& r = state.dataset.record(state.RecordIndex(request.fips, request.event));
  const auto& schema = state.schema();
  const auto resolved = ResolveInterventions(schema, request.interventions);

  CounterfactualResult cf;
  auto scm = state.scms.find(request.dag);
  if (scm != state.scms.end()) {
    cf = scm->second->Counterfactual(r.features, resolved);
  } else {
    const std::size_t n = schema.size();
    cf.factual = r.features;
    cf.values = r.features;
    cf.noise.assign(n, 0.0);
    cf.clamped.assign(n, false);
    cf.intervened.assign(n, false);
    for (const auto& [j, v] : resolved) {
      cf.values[j] = v;
      cf.intervened[j] = true;
    }
    cf.factual_prediction = model.Predict(cf.factual);
    cf.prediction = model.Predict(cf.values);
    cf.interventions = request.interventions;
  }

  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    nodes.push_back({{"name", schema.feature(j).name},
                     {"factual", cf.factual[j]},
                     {"value", cf.values[j]},
                     {"intervened", static_cast<bool>(cf.intervened[j])},
                     {"clamped", static_cast<bool>(cf.clamped[j])}});
  }
  nlohmann::json interventions = nlohmann::json::object();
  for (const auto& [name, value] : request.interventions) interventions[name] = value;
  return {{"fips", r.fips},
          {"event", r.event_id},
          {"dag", request.dag},
          {"interventions", interventions},
          {"factual_prediction", PredictionJson(cf.factual_prediction)},
          {"prediction", PredictionJson(cf.prediction)},
          {"nodes", nodes}};
}

nlohmann::json AttributionPayload(const AppState& state, const AttributionQuery& query) {
  const SeverityModel& model = state.Model(query.dag);
  const auto& r = state.dataset.record(state.RecordIndex(query.fips, query.event));
  AttributionOptions options;
  options.samples = query.samples.value_or(state.defaults.attribution_samples);
  options.seed = query.seed.value_or(state.defaults.seed);
  options.threads = state.defaults.threads;
  if (options.samples <= 0) throw ValidationError("n must be positive", "n");
  AttributionReport report = ComputeNecessityReport(model, state.space, r.features,
                                                    query.level, options, query.dag,
                                                    RecordId(r));
  if (query.level == AttributionLevel::kFeature) report.scores = TopKFeatures(report, 20);
  nlohmann::json out = report.ToJson();
  out["fips"] = r.fips;
  out["event"] = r.event_id;
  out["prediction"] = PredictionJson(model.Predict(r.features));
  return out;
}

nlohmann::json RecoursePayload(const AppState& state, const RecourseQuery& query) {
  const SeverityModel& model = state.Model(query.dag);
  const auto& r = state.dataset.record(state.RecordIndex(query.fips, query.event));
  RecourseRequest request;
  request.features = r.features;
  request.desired = query.desired;
  request.max_features = query.max_features.value_or(state.defaults.max_features);
  request.num_suggestions = query.num_suggestions.value_or(state.defaults.num_suggestions);
  request.seed = query.seed.value_or(state.defaults.seed);
  request.immutable = query.immutable;
  const RecourseResult result =
      GenerateRecourse(model, state.space, request, state.defaults.search);
  nlohmann::json out = result.ToJson();
  out["fips"] = r.fips;
  out["event"] = r.event_id;
  out["dag"] = query.dag;
  return out;
}

nlohmann::json GeometryPayload(const AppState& state, std::string_view event) {
  const SeverityModel& model = state.Model(kFlatDag);
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i : state.dataset.RecordsForEvent(event)) {
    const auto& r = state.dataset.record(i);
    const auto p = model.Predict(r.features);
    const auto* g = state.geometry.Find(r.fips);
    nlohmann::json properties = {{"fips", r.fips},
                                 {"name", state.CountyName(r.fips)},
                                 {"event", r.event_id},
                                 {"predicted_class", SeverityName(p.label)},
                                 {"probabilities", p.probabilities}};
    nlohmann::json geometry = nullptr;
    if (g && !g->polygons.empty()) {
      geometry = g->GeometryJson();
    } else {
      properties["warning"] = "no geometry for county " + r.fips;
    }
    features.push_back(
        {{"type", "Feature"}, {"geometry", geometry}, {"properties", properties}});
  }
  return {{"type", "FeatureCollection"}, {"event", event}, {"features", features}};
}

ApiResponse ErrorResponse(int status, std::string_view error, std::string_view detail,
                          const std::optional<std::string>& field) {
  ApiResponse response;
  response.status = status;
  response.body = {{"error", error}, {"detail", detail}};
  if (field) response.body["field"] = *field;
  return response;
}

namespace {

std::string QueryValue(const ApiRequest& request, const std::string& key) {
  auto it = request.query.find(key);
  return it == request.query.end() ? std::string() : it->second;
}

std::optional<std::string> QueryOptional(const ApiRequest& request, const std::string& key) {
  auto it = request.query.find(key);
  if (it == request.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

nlohmann::json ParseBody(const ApiRequest& request) {
  try {
    return nlohmann::json::parse(request.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("request body is not valid JSON: ") + e.what(), "body");
  }
}

// Splits "/api/x/y" into {"api", "x", "y"}.
std::vector<std::string> PathSegments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t end = std::min(path.find('/', start), path.size());
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

ApiResponse Ok(nlohmann::json body) {
  ApiResponse response;
  response.body = std::move(body);
  return response;
}

ApiResponse Route(const AppState& state, const ApiRequest& request) {
  const auto seg = PathSegments(request.path);
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";
  if (seg.size() < 2 || seg[0] != "api") {
    return ErrorResponse(404, "not_found", "no route for " + request.path);
  }
  const std::string& name = seg[1];
  auto method_error = [&]() {
    return ErrorResponse(405, "method_not_allowed",
                         request.method + " is not supported on " + request.path);
  };
  if (name == "health" && seg.size() == 2) {
    if (!get) return method_error();
    nlohmann::json dags = nlohmann::json::array();
    for (const auto& [dag, model] : state.models) dags.push_back(dag);
    return Ok({{"status", "ok"},
               {"version", state.version},
               {"records", state.dataset.size()},
               {"events", state.dataset.Events()},
               {"dags", dags},
               {"warnings", state.warnings}});
  }
  if (name == "counties" && seg.size() == 2) {
    if (!get) return method_error();
    return Ok(CountiesPayload(state, QueryValue(request, "event")));
  }
  if (name == "county" && seg.size() == 3) {
    if (!get) return method_error();
    return Ok(CountyPayload(state, seg[2], QueryValue(request, "event")));
  }
  if (name == "simulate" && seg.size() == 2) {
    if (!post) return method_error();
    return Ok(SimulatePayload(state, SimulateRequest::FromJson(ParseBody(request))));
  }
  if (name == "attribution" && seg.size() == 3) {
    if (!get) return method_error();
    AttributionQuery q;
    q.fips = seg[2];
    q.event = QueryValue(request, "event");
    q.dag = QueryOptional(request, "dag").value_or(std::string(kFlatDag));
    q.level = ParseLevel(QueryOptional(request, "level").value_or("feature"));
    if (auto seed = QueryOptional(request, "seed")) {
      q.seed = ParseNumber<std::uint64_t>(*seed, "seed");
    }
    if (auto n = QueryOptional(request, "n")) q.samples = ParseNumber<int>(*n, "n");
    return Ok(AttributionPayload(state, q));
  }
  if (name == "recourse" && seg.size() == 2) {
    if (!post) return method_error();
    return Ok(RecoursePayload(state, RecourseQuery::FromJson(ParseBody(request))));
  }
  if (name == "geometry" && seg.size() == 2) {
    if (!get) return method_error();
    return Ok(GeometryPayload(state, QueryValue(request, "event")));
  }
  return ErrorResponse(404, "not_found", "no route for " + request.path);
}

}  // namespace

ApiResponse Dispatch(const AppState& state, const ApiRequest& request) {
  ApiResponse response;
  try {
    response = Route(state, request);
  } catch (const ValidationError& e) {
    response = ErrorResponse(422, "validation_error", e.what(), e.field());
  } catch (const ConstraintError& e) {
    response = ErrorResponse(422, "constraint_error", e.what());
  } catch (const NotFoundError& e) {
    response = ErrorResponse(404, "not_found", e.what());
  } catch (const Error& e) {
    response = ErrorResponse(500, "server_error", e.what());
  } catch (const std::exception& e) {
    response = ErrorResponse(500, "internal_error", e.what());
  }
  response.version = state.version;
  return response;
}

Service::Service(std::shared_ptr<AppState> initial, Loader loader)
    : loader_(std::move(loader)) {
  if (!initial) throw ConfigError("service needs an initial state");
  if (initial->version == 0) initial->version = 1;
  current_ = std::move(initial);
}

std::shared_ptr<const AppState> Service::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

void Service::Install(std::shared_ptr<AppState> state) {
  std::lock_guard lock(mu_);
  state->version = current_->version + 1;
  current_ = std::move(state);
}

std::uint64_t Service::Reload() {
  std::lock_guard reload_lock(reload_mu_);
  if (!loader_) throw ConfigError("this service has no reload source");
  auto state = loader_();
  if (!state) throw ConfigError("reload produced no state");
  Install(state);
  return state->version;
}

ApiResponse Service::Handle(const ApiRequest& request) {
  if (request.path == "/api/admin/reload") {
    if (request.method != "POST") {
      return ErrorResponse(405, "method_not_allowed", "use POST to reload");
    }
    try {
      const std::uint64_t version = Reload();
      ApiResponse response = Ok({{"status", "reloaded"}, {"version", version}});
      response.version = version;
      return response;
    } catch (const std::exception& e) {
      ApiResponse response = ErrorResponse(500, "reload_failed", e.what());
      response.version = snapshot()->version;
      return response;
    }
  }
  const auto state = snapshot();
  return Dispatch(*state, request);
}

}  // namespace sitrep

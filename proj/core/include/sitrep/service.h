#ifndef SITREP_SERVICE_H_
#define SITREP_SERVICE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/attribution.h"
#include "sitrep/dataset.h"
#include "sitrep/feature_space.h"
#include "sitrep/geometry.h"
#include "sitrep/mlp.h"
#include "sitrep/recourse.h"
#include "sitrep/scm.h"

namespace sitrep {

// Seeds and budgets used when a request leaves them out.
struct ServiceDefaults {
  int attribution_samples = 500;
  std::uint64_t seed = 0;
  int max_features = 5;
  int num_suggestions = 3;
  unsigned threads = 1;
  RecourseSearchConfig search;

  nlohmann::json ToJson() const;
  static ServiceDefaults FromJson(const nlohmann::json& j);
};

inline constexpr std::string_view kFlatDag = "dag1";

// Everything a request reads. Built once and never mutated afterwards.
struct AppState {
  DatasetTable dataset;
  GeometryCollection geometry;
  FeatureSpace space;
  std::shared_ptr<const MlpModel> classifier;
  std::map<std::string, std::shared_ptr<const StructuralModel>> scms;
  // dag1 -> flat classifier, every SCM -> its causal view.
  std::map<std::string, std::shared_ptr<const SeverityModel>, std::less<>> models;
  ServiceDefaults defaults;
  std::uint64_t version = 0;
  std::vector<std::string> warnings;

  const FeatureSchema& schema() const { return dataset.schema(); }
  // ValidationError (field "dag") for a name that was not loaded.
  const SeverityModel& Model(std::string_view dag) const;
  // NotFoundError for an unknown (fips, event). When `event` is empty the fips
  // must identify a single record.
  std::size_t RecordIndex(std::string_view fips, std::string_view event) const;
  std::string CountyName(std::string_view fips) const;
};

// Checks schema hashes and builds the model views and feature space. Throws
// ConfigError when a model was fitted against another schema.
std::shared_ptr<AppState> MakeAppState(
    DatasetTable dataset, GeometryCollection geometry,
    std::shared_ptr<const MlpModel> classifier,
    std::map<std::string, std::shared_ptr<const StructuralModel>> scms,
    ServiceDefaults defaults = {});

struct ServiceOptions {
  std::string data_path;
  std::string models_dir;     // <dir>/<dag>.json; empty trains in memory
  std::string geometry_path;  // optional GeoJSON
  std::string manifest_path;  // optional group manifest
  std::vector<std::string> dags = {"dag1", "dag2", "dag3"};
  TrainConfig train;
  ServiceDefaults defaults;
};

std::string ModelPath(const std::string& models_dir, std::string_view dag);
FeatureSchema LoadSchema(const std::string& manifest_path);

// Loads data, geometry and checkpoints. Missing checkpoints are trained from
// the (labeled) dataset with a warning recorded on the state.
std::shared_ptr<AppState> LoadAppState(const ServiceOptions& options);

// Request payloads shared by the CLI and the HTTP API.
struct SimulateRequest {
  std::string fips;
  std::string event;
  std::string dag{kFlatDag};
  InterventionSet interventions;

  static SimulateRequest FromJson(const nlohmann::json& j);
};

struct AttributionQuery {
  std::string fips;
  std::string event;
  std::string dag{kFlatDag};
  AttributionLevel level = AttributionLevel::kFeature;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
};

struct RecourseQuery {
  std::string fips;
  std::string event;
  std::string dag{kFlatDag};
  SeverityClass desired = SeverityClass::kLow;
  std::optional<int> max_features;
  std::optional<int> num_suggestions;
  std::optional<std::uint64_t> seed;
  std::set<std::string> immutable;

  static RecourseQuery FromJson(const nlohmann::json& j);
};

nlohmann::json PredictionJson(const Prediction& p);
nlohmann::json CountiesPayload(const AppState& state, std::string_view event);
nlohmann::json CountyPayload(const AppState& state, std::string_view fips,
                             std::string_view event);
nlohmann::json SimulatePayload(const AppState& state, const SimulateRequest& request);
nlohmann::json AttributionPayload(const AppState& state, const AttributionQuery& query);
nlohmann::json RecoursePayload(const AppState& state, const RecourseQuery& query);
// Unknown events give an empty collection.
nlohmann::json GeometryPayload(const AppState& state, std::string_view event);

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
  std::uint64_t version = 0;
};

// {error, detail, field?}
ApiResponse ErrorResponse(int status, std::string_view error, std::string_view detail,
                          const std::optional<std::string>& field = std::nullopt);

// Routes one request against a fixed snapshot.
ApiResponse Dispatch(const AppState& state, const ApiRequest& request);

// Current snapshot plus an optional loader for POST /api/admin/reload.
class Service {
 public:
  using Loader = std::function<std::shared_ptr<AppState>()>;

  explicit Service(std::shared_ptr<AppState> initial, Loader loader = {});

  std::shared_ptr<const AppState> snapshot() const;
  // Builds a new state with the loader and swaps it in. Returns the version.
  std::uint64_t Reload();
  ApiResponse Handle(const ApiRequest& request);

 private:
  void Install(std::shared_ptr<AppState> state);

  mutable std::mutex mu_;
  std::shared_ptr<const AppState> current_;
  std::mutex reload_mu_;
  Loader loader_;
};

}  // namespace sitrep

#endif  // SITREP_SERVICE_H_

#include "sitrep/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sitrep/dag.h"
#include "sitrep/error.h"

namespace sitrep {

namespace {

double NodeScale(const FeatureDescriptor& f, const SyntheticConfig& config) {
  return f.source == Source::kSatellite ? config.satellite_scale
                                        : config.mention_scale;
}

std::vector<NodeEquation> SampleEquations(const FeatureDag& dag,
                                          const FeatureSchema& schema,
                                          const SyntheticConfig& config) {
  // Coefficients come from their own stream so changing the county count
  // leaves the ground truth untouched.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<NodeEquation> out(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto& eq = out[j];
    const auto& f = schema.feature(j);
    const double scale = NodeScale(f, config);
    eq.node = f.name;
    eq.root_scale = scale;
    const auto& parents = dag.parents(j);
    if (parents.empty()) {
      eq.root = true;
      continue;
    }
    eq.root = false;
    eq.intercept = 0.2 * scale;
    eq.noise_sd = config.noise_scale * scale;
    std::vector<std::size_t> active;
    for (std::size_t p : parents) {
      if (unit(rng) < config.edge_density) active.push_back(p);
    }
    if (active.empty()) {
      active.push_back(parents[static_cast<std::size_t>(unit(rng) * parents.size()) %
                               parents.size()]);
    }
    for (std::size_t p : active) {
      const double parent_scale = NodeScale(schema.feature(p), config);
      const double c = (0.2 + 0.8 * unit(rng)) * scale / parent_scale /
                       static_cast<double>(active.size());
      eq.coefficients.emplace_back(schema.feature(p).name, c);
    }
  }
  return out;
}

void CheckEquations(const std::vector<NodeEquation>& eqs, const FeatureDag& dag,
                    const FeatureSchema& schema) {
  if (eqs.size() != schema.size()) {
    throw ConfigError("synthetic config lists " + std::to_string(eqs.size()) +
                      " equations, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t j = 0; j < eqs.size(); ++j) {
    if (eqs[j].node != schema.feature(j).name) {
      throw ConfigError("equation " + std::to_string(j) + " is for '" +
                        eqs[j].node + "', expected '" + schema.feature(j).name +
                        "'");
    }
    const auto& parents = dag.parents(j);
    for (const auto& [name, coef] : eqs[j].coefficients) {
      const std::size_t p = schema.IndexOf(name);
      if (!std::binary_search(parents.begin(), parents.end(), p)) {
        throw ConfigError("equation for '" + eqs[j].node + "' uses '" + name +
                          "', which is not a parent in dag '" + dag.name() + "'");
      }
    }
  }
}

nlohmann::json EquationJson(const NodeEquation& eq) {
  nlohmann::json coefs = nlohmann::json::object();
  for (const auto& [name, c] : eq.coefficients) coefs[name] = c;
  return {{"node", eq.node},       {"root", eq.root},
          {"root_scale", eq.root_scale}, {"intercept", eq.intercept},
          {"coefficients", coefs}, {"noise_sd", eq.noise_sd}};
}

NodeEquation EquationFromJson(const nlohmann::json& j) {
  NodeEquation eq;
  eq.node = j.at("node").get<std::string>();
  eq.root = j.value("root", false);
  eq.root_scale = j.value("root_scale", 0.0);
  eq.intercept = j.value("intercept", 0.0);
  eq.noise_sd = j.value("noise_sd", 0.0);
  const nlohmann::json coefficients = j.value("coefficients", nlohmann::json::object());
  for (const auto& [name, c] : coefficients.items()) {
    eq.coefficients.emplace_back(name, c.get<double>());
  }
  return eq;
}

nlohmann::json WeightsJson(const std::vector<std::pair<std::string, double>>& w) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, v] : w) out.push_back({{"feature", name}, {"weight", v}});
  return out;
}

std::vector<std::pair<std::string, double>> WeightsFromJson(const nlohmann::json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& e : j) {
    out.emplace_back(e.at("feature").get<std::string>(), e.at("weight").get<double>());
  }
  return out;
}

}  // namespace

double DamageModel::Score(const FeatureSchema& schema,
                          std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += weights[i].second * x[schema.IndexOf(weights[i].first)] / scales[i];
  }
  return s;
}

double DamageModel::DeterministicDamage(const FeatureSchema& schema,
                                        std::span<const double> x) const {
  return std::pow(10.0, offset + slope * Score(schema, x));
}

nlohmann::json SyntheticConfig::ToJson() const {
  nlohmann::json j = {{"counties", counties},
                      {"events", events},
                      {"dag", dag},
                      {"noise_scale", noise_scale},
                      {"edge_density", edge_density},
                      {"satellite_scale", satellite_scale},
                      {"mention_scale", mention_scale},
                      {"damage_weights", WeightsJson(damage_weights)},
                      {"damage_noise", damage_noise},
                      {"label_margin", label_margin},
                      {"seed", seed}};
  if (damage_offset) j["damage_offset"] = *damage_offset;
  if (damage_slope) j["damage_slope"] = *damage_slope;
  if (!equations.empty()) {
    j["equations"] = nlohmann::json::array();
    for (const auto& eq : equations) j["equations"].push_back(EquationJson(eq));
  }
  return j;
}

SyntheticConfig SyntheticConfig::FromJson(const nlohmann::json& j) {
  SyntheticConfig c;
  try {
    c.counties = j.value("counties", c.counties);
    c.events = j.value("events", c.events);
    c.dag = j.value("dag", c.dag);
    c.noise_scale = j.value("noise_scale", c.noise_scale);
    c.edge_density = j.value("edge_density", c.edge_density);
    c.satellite_scale = j.value("satellite_scale", c.satellite_scale);
    c.mention_scale = j.value("mention_scale", c.mention_scale);
    if (j.contains("damage_weights")) {
      c.damage_weights = WeightsFromJson(j["damage_weights"]);
    }
    c.damage_noise = j.value("damage_noise", c.damage_noise);
    c.label_margin = j.value("label_margin", c.label_margin);
    if (j.contains("damage_offset")) c.damage_offset = j["damage_offset"].get<double>();
    if (j.contains("damage_slope")) c.damage_slope = j["damage_slope"].get<double>();
    if (j.contains("equations")) {
      for (const auto& e : j["equations"]) c.equations.push_back(EquationFromJson(e));
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed synthetic config: ") + e.what());
  }
  return c;
}

nlohmann::json GroundTruth::ToJson() const {
  nlohmann::json eqs = nlohmann::json::array();
  for (const auto& eq : equations) eqs.push_back(EquationJson(eq));
  return {{"dag", dag},
          {"equations", eqs},
          {"damage",
           {{"weights", WeightsJson(damage.weights)},
            {"scales", damage.scales},
            {"offset", damage.offset},
            {"slope", damage.slope},
            {"noise", damage.noise}}}};
}

GroundTruth GroundTruth::FromJson(const nlohmann::json& j) {
  GroundTruth t;
  try {
    t.dag = j.at("dag").get<std::string>();
    for (const auto& e : j.at("equations")) t.equations.push_back(EquationFromJson(e));
    const auto& d = j.at("damage");
    t.damage.weights = WeightsFromJson(d.at("weights"));
    t.damage.scales = d.at("scales").get<std::vector<double>>();
    t.damage.offset = d.at("offset").get<double>();
    t.damage.slope = d.at("slope").get<double>();
    t.damage.noise = d.at("noise").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed ground truth: ") + e.what());
  }
  return t;
}

SyntheticConfig SyntheticConfig::Separable() {
  SyntheticConfig c;
  c.counties = 3000;
  c.damage_noise = 0.0;
  c.label_margin = 0.2;
  return c;
}

SyntheticData GenerateSynthetic(const SyntheticConfig& config,
                                const FeatureSchema& schema) {
  if (config.counties < 3 || config.counties > 25000) {
    throw ConfigError("synthetic county count must be in [3, 25000]");
  }
  if (config.events < 1) throw ConfigError("synthetic event count must be >= 1");
  if (config.noise_scale < 0.0 || config.damage_noise < 0.0 || config.label_margin < 0.0) {
    throw ConfigError("noise scales must be nonnegative");
  }
  if (config.edge_density <= 0.0 || config.edge_density > 1.0) {
    throw ConfigError("edge_density must be in (0, 1]");
  }
  if (config.damage_weights.empty()) {
    throw ConfigError("damage_weights must name at least one feature");
  }

  const FeatureDag dag = ExpandDag(BuiltinDag(config.dag), schema);
  SyntheticData out;
  out.config = config;
  out.truth.dag = config.dag;
  if (config.equations.empty()) {
    out.truth.equations = SampleEquations(dag, schema, config);
  } else {
    CheckEquations(config.equations, dag, schema);
    out.truth.equations = config.equations;
  }

  struct Term {
    std::size_t parent;
    double coef;
  };
  std::vector<std::vector<Term>> terms(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    for (const auto& [name, c] : out.truth.equations[j].coefficients) {
      terms[j].push_back({schema.IndexOf(name), c});
    }
  }

  std::mt19937_64 rng(config.seed);
  std::gamma_distribution<double> gamma(2.0, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& order = dag.topological_order();
  const std::size_t n = static_cast<std::size_t>(config.counties);

  auto draw_features = [&](CountyRecord& r) {
    r.features.assign(schema.size(), 0.0);
    for (std::size_t node : order) {
      if (node == dag.severity_node()) continue;
      const auto& eq = out.truth.equations[node];
      double v;
      if (eq.root) {
        v = eq.root_scale * gamma(rng);
      } else {
        v = eq.intercept;
        for (const auto& t : terms[node]) v += t.coef * r.features[t.parent];
        if (eq.noise_sd > 0.0) v += eq.noise_sd * normal(rng);
      }
      r.features[node] = std::max(0.0, v);
    }
  };

  std::vector<CountyRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.fips = std::to_string(48001 + 2 * i);
    r.event_id = "event_" + std::to_string(i % config.events + 1);
    draw_features(r);
  }

  auto& damage = out.truth.damage;
  damage.weights = config.damage_weights;
  for (const auto& [name, w] : damage.weights) {
    damage.scales.push_back(NodeScale(schema.feature(schema.IndexOf(name)), config));
  }
  damage.noise = config.damage_noise;
  if (config.damage_offset && config.damage_slope) {
    damage.offset = *config.damage_offset;
    damage.slope = *config.damage_slope;
  } else {
    std::vector<double> scores;
    scores.reserve(n);
    for (const auto& r : records) scores.push_back(damage.Score(schema, r.features));
    std::sort(scores.begin(), scores.end());
    const double q_low = scores[n / 3];
    const double q_high = scores[2 * n / 3];
    if (!(q_high > q_low)) {
      throw CalibrationError(
          "damage score has no spread; cannot place the severity thresholds");
    }
    damage.slope = 1.0 / (q_high - q_low);
    damage.offset = 4.0 - damage.slope * q_low;
    out.config.damage_offset = damage.offset;
    out.config.damage_slope = damage.slope;
  }

  // Records within label_margin decades of a threshold are redrawn.
  auto near_threshold = [&](double log_damage) {
    return std::abs(log_damage - 4.0) < config.label_margin ||
           std::abs(log_damage - 5.0) < config.label_margin;
  };
  for (auto& r : records) {
    for (int attempt = 0;; ++attempt) {
      double log_damage = damage.offset + damage.slope * damage.Score(schema, r.features);
      if (damage.noise > 0.0) log_damage += damage.noise * normal(rng);
      if (!near_threshold(log_damage)) {
        r.damage_dollars = std::pow(10.0, log_damage);
        break;
      }
      if (attempt == 10000) {
        throw CalibrationError("label_margin leaves no room between the severity thresholds");
      }
      draw_features(r);
    }
  }

  out.table = DatasetTable(schema, std::move(records));
  const auto counts = out.table.ClassCounts();
  for (SeverityClass c : kAllSeverityClasses) {
    if (counts[ClassIndex(c)] == 0) {
      throw CalibrationError("synthetic labels contain no " +
                             std::string(SeverityName(c)) +
                             " records; adjust damage_offset/damage_slope");
    }
  }
  return out;
}

nlohmann::json SyntheticGeometry(const DatasetTable& table) {
  std::set<std::string> fips;
  for (const auto& r : table.records()) fips.insert(r.fips);
  const int columns =
      std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(fips.size())))));
  constexpr double kCell = 0.25;
  nlohmann::json features = nlohmann::json::array();
  int k = 0;
  for (const auto& code : fips) {
    const double lon = -104.0 + (k % columns) * kCell;
    const double lat = 26.0 + (k / columns) * kCell;
    nlohmann::json ring = {{lon, lat},
                           {lon + kCell, lat},
                           {lon + kCell, lat + kCell},
                           {lon, lat + kCell},
                           {lon, lat}};
    features.push_back(
        {{"type", "Feature"},
         {"properties", {{"fips", code}, {"name", "Synthetic County " + code}}},
         {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    ++k;
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace sitrep

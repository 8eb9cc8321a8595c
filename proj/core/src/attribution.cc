#include "sitrep/attribution.h"

#include <algorithm>
#include <random>
#include <thread>

#include "sitrep/error.h"

namespace sitrep {

namespace {

void CheckUnit(std::span<const std::size_t> unit, std::size_t width) {
  if (unit.empty()) throw ValidationError("attribution unit must not be empty", "unit");
  for (std::size_t j : unit) {
    if (j >= width) throw ValidationError("attribution unit index out of range", "unit");
  }
}

// SplitMix64 finalizer.
std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

template <typename ScoreFn>
AttributionReport BuildReport(const FeatureSchema& schema, AttributionLevel level,
                              const AttributionOptions& options, std::string metric,
                              std::string model_id, std::string record_id,
                              ScoreFn score) {
  if (options.samples <= 0) {
    throw ValidationError("sample count must be positive", "n");
  }
  const auto units = UnitsForLevel(schema, level);
  AttributionReport report;
  report.level = level;
  report.metric = std::move(metric);
  report.model_id = std::move(model_id);
  report.record_id = std::move(record_id);
  report.seed = options.seed;
  report.n = options.samples;
  report.scores.resize(units.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t u = begin; u < end; ++u) {
      report.scores[u] = {units[u].name,
                          score(units[u].features, UnitSeed(options.seed, units[u].name)),
                          options.samples, u};
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, units.size()));
  if (threads == 1) {
    work(0, units.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (units.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(units.size(), begin + chunk);
      pool.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return report;
}

}  // namespace

std::string_view LevelName(AttributionLevel level) {
  switch (level) {
    case AttributionLevel::kFeature:
      return "feature";
    case AttributionLevel::kGroup:
      return "group";
    case AttributionLevel::kSource:
      return "source";
  }
  return "unknown";
}

AttributionLevel ParseLevel(std::string_view text) {
  if (text == "feature") return AttributionLevel::kFeature;
  if (text == "group") return AttributionLevel::kGroup;
  if (text == "source") return AttributionLevel::kSource;
  throw ValidationError("level must be feature, group or source, got '" +
                            std::string(text) + "'",
                        "level");
}

std::vector<AttributionUnit> UnitsForLevel(const FeatureSchema& schema,
                                           AttributionLevel level) {
  std::vector<AttributionUnit> units;
  switch (level) {
    case AttributionLevel::kFeature:
      for (std::size_t j = 0; j < schema.size(); ++j) {
        units.push_back({schema.feature(j).name, {j}});
      }
      break;
    case AttributionLevel::kGroup:
      for (const auto& g : schema.manifest().groups()) {
        auto members = schema.GroupMembers(g.id);
        if (!members.empty()) units.push_back({g.id, std::move(members)});
      }
      break;
    case AttributionLevel::kSource:
      for (Source s : kAllSources) {
        auto members = schema.SourceMembers(s);
        if (!members.empty()) units.push_back({std::string(SourceName(s)), std::move(members)});
      }
      break;
  }
  return units;
}

double NecessityScore(const SeverityModel& model, std::span<const double> record,
                      std::span<const std::size_t> unit,
                      const PerturbationSampler& sampler, int samples,
                      std::uint64_t seed) {
  if (samples <= 0) throw ValidationError("sample count must be positive", "n");
  CheckUnit(unit, record.size());
  const SeverityClass factual = model.Predict(record).label;

  std::vector<std::size_t> changed;
  for (std::size_t j : unit) {
    if (sampler.perturbs(j)) changed.push_back(j);
  }
  if (changed.empty()) return 0.0;

  std::mt19937_64 rng(seed);
  std::vector<double> modified(record.begin(), record.end());
  int flips = 0;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t j : changed) modified[j] = sampler.Draw(j, rng);
    if (model.PredictWithChanges(record, modified, changed).label != factual) ++flips;
  }
  return static_cast<double>(flips) / samples;
}

double ExhaustiveNecessityOracle(const SeverityModel& model,
                                 std::span<const double> record,
                                 std::span<const std::size_t> unit,
                                 const std::vector<std::vector<double>>& grid) {
  CheckUnit(unit, record.size());
  if (grid.size() != unit.size()) {
    throw ValidationError("oracle grid must list values for every unit feature", "grid");
  }
  std::size_t total = 1;
  for (const auto& values : grid) {
    if (values.empty()) throw ValidationError("oracle grid axis is empty", "grid");
    if (total > kMaxOracleGridSize / values.size()) {
      throw ValidationError("oracle grid exceeds " + std::to_string(kMaxOracleGridSize) +
                                " combinations",
                            "grid");
    }
    total *= values.size();
  }
  const SeverityClass factual = model.Predict(record).label;
  std::vector<double> modified(record.begin(), record.end());
  std::vector<std::size_t> digit(unit.size(), 0);
  std::size_t flips = 0;
  for (std::size_t combo = 0; combo < total; ++combo) {
    for (std::size_t k = 0; k < unit.size(); ++k) modified[unit[k]] = grid[k][digit[k]];
    if (model.PredictWithChanges(record, modified, unit).label != factual) ++flips;
    for (std::size_t k = 0; k < unit.size(); ++k) {
      if (++digit[k] < grid[k].size()) break;
      digit[k] = 0;
    }
  }
  return static_cast<double>(flips) / static_cast<double>(total);
}

std::vector<std::vector<double>> ContrastRows(
    const SeverityModel& model, std::span<const std::vector<double>> pool,
    SeverityClass factual_class) {
  std::vector<std::vector<double>> out;
  for (const auto& row : pool) {
    if (model.Predict(row).label != factual_class) out.push_back(row);
  }
  return out;
}

namespace {

bool Transplant(const SeverityModel& model, std::span<const double> record,
                std::span<const std::size_t> unit, const std::vector<double>& contrast,
                SeverityClass factual, std::vector<double>& scratch) {
  scratch = contrast;
  for (std::size_t j : unit) scratch[j] = record[j];
  return model.PredictWithChanges(contrast, scratch, unit).label == factual;
}

double SufficiencyFromContrast(const SeverityModel& model, std::span<const double> record,
                               std::span<const std::size_t> unit,
                               const std::vector<std::vector<double>>& contrast,
                               SeverityClass factual, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, contrast.size() - 1);
  std::vector<double> scratch;
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    if (Transplant(model, record, unit, contrast[pick(rng)], factual, scratch)) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

void RequireContrast(const std::vector<std::vector<double>>& contrast,
                     SeverityClass factual) {
  if (contrast.empty()) {
    throw ValidationError("no contrast records: every pool record is predicted " +
                              std::string(SeverityName(factual)),
                          "pool");
  }
}

}  // namespace

double SufficiencyScore(const SeverityModel& model, std::span<const double> record,
                        std::span<const std::size_t> unit,
                        std::span<const std::vector<double>> pool, int samples,
                        std::uint64_t seed) {
  if (samples <= 0) throw ValidationError("sample count must be positive", "n");
  CheckUnit(unit, record.size());
  const SeverityClass factual = model.Predict(record).label;
  const auto contrast = ContrastRows(model, pool, factual);
  RequireContrast(contrast, factual);
  return SufficiencyFromContrast(model, record, unit, contrast, factual, samples, seed);
}

double ExhaustiveSufficiencyOracle(const SeverityModel& model,
                                   std::span<const double> record,
                                   std::span<const std::size_t> unit,
                                   std::span<const std::vector<double>> pool) {
  CheckUnit(unit, record.size());
  const SeverityClass factual = model.Predict(record).label;
  const auto contrast = ContrastRows(model, pool, factual);
  RequireContrast(contrast, factual);
  std::vector<double> scratch;
  std::size_t hits = 0;
  for (const auto& row : contrast) {
    if (Transplant(model, record, unit, row, factual, scratch)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(contrast.size());
}

nlohmann::json AttributionReport::ToJson() const {
  nlohmann::json scores_json = nlohmann::json::array();
  for (const auto& s : scores) {
    scores_json.push_back(
        {{"unit", s.unit}, {"alpha", s.alpha}, {"n_effective", s.n_effective}});
  }
  return {{"level", LevelName(level)}, {"metric", metric},   {"model_id", model_id},
          {"record_id", record_id},    {"seed", seed},       {"n", n},
          {"scores", scores_json}};
}

std::uint64_t UnitSeed(std::uint64_t seed, std::string_view unit) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : unit) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return Mix(seed ^ Mix(h));
}

AttributionReport ComputeNecessityReport(const SeverityModel& model,
                                         const FeatureSpace& space,
                                         std::span<const double> record,
                                         AttributionLevel level,
                                         const AttributionOptions& options,
                                         std::string model_id, std::string record_id) {
  if (record.size() != space.size()) {
    throw ValidationError("record width does not match the schema");
  }
  return BuildReport(space.schema(), level, options, "necessity", std::move(model_id),
                     std::move(record_id),
                     [&](const std::vector<std::size_t>& unit, std::uint64_t seed) {
                       return NecessityScore(model, record, unit, space.sampler(),
                                             options.samples, seed);
                     });
}

AttributionReport ComputeSufficiencyReport(const SeverityModel& model,
                                           const FeatureSpace& space,
                                           std::span<const double> record,
                                           std::span<const std::vector<double>> pool,
                                           AttributionLevel level,
                                           const AttributionOptions& options,
                                           std::string model_id, std::string record_id) {
  if (record.size() != space.size()) {
    throw ValidationError("record width does not match the schema");
  }
  const SeverityClass factual = model.Predict(record).label;
  const auto contrast = ContrastRows(model, pool, factual);
  RequireContrast(contrast, factual);
  return BuildReport(space.schema(), level, options, "sufficiency", std::move(model_id),
                     std::move(record_id),
                     [&](const std::vector<std::size_t>& unit, std::uint64_t seed) {
                       return SufficiencyFromContrast(model, record, unit, contrast,
                                                      factual, options.samples, seed);
                     });
}

std::vector<UnitScore> TopKFeatures(const AttributionReport& report, std::size_t k) {
  if (report.level != AttributionLevel::kFeature) {
    throw ValidationError("top-k ranking needs a feature-level report", "level");
  }
  std::vector<UnitScore> ranked = report.scores;
  std::sort(ranked.begin(), ranked.end(), [](const UnitScore& a, const UnitScore& b) {
    if (a.alpha != b.alpha) return a.alpha > b.alpha;
    return a.order < b.order;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace sitrep

#include "sitrep/recourse.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "sitrep/error.h"

namespace sitrep {

namespace {

// Sparse delta: (feature, new value), sorted by feature.
using Delta = std::vector<std::pair<std::size_t, double>>;

struct Scored {
  Delta delta;
  bool valid = false;
  double desired_probability = 0.0;
  double distance = 0.0;
  Prediction prediction;
};

bool Better(const Scored& a, const Scored& b) {
  if (a.valid != b.valid) return a.valid;
  if (!a.valid && a.desired_probability != b.desired_probability) {
    return a.desired_probability > b.desired_probability;
  }
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.delta.size() != b.delta.size()) return a.delta.size() < b.delta.size();
  return a.delta < b.delta;
}

class Search {
 public:
  Search(const SeverityModel& model, const FeatureSpace& space,
         const RecourseRequest& request, std::vector<std::size_t> mutable_features,
         const RecourseSearchConfig& config)
      : model_(model),
        space_(space),
        request_(request),
        mutable_(std::move(mutable_features)),
        config_(config),
        budget_(std::min<std::size_t>(static_cast<std::size_t>(request.max_features),
                                      mutable_.size())),
        rng_(request.seed) {}

  std::vector<Scored> Run() {
    std::vector<Scored> population;
    std::set<Delta> seen;
    while (population.size() < static_cast<std::size_t>(config_.population)) {
      AddUnique(RandomDelta(), population, seen);
    }
    for (int gen = 0; gen < config_.generations; ++gen) {
      std::sort(population.begin(), population.end(), Better);
      for (const auto& s : population) {
        if (s.valid) archive_.emplace(s.delta, s);
      }
      const std::size_t elite = std::max<std::size_t>(2, population.size() / 10);
      std::vector<Scored> next(population.begin(),
                               population.begin() + static_cast<long>(std::min(elite, population.size())));
      std::set<Delta> next_seen;
      for (const auto& s : next) next_seen.insert(s.delta);
      int attempts = 0;
      while (next.size() < population.size() && attempts < 20 * config_.population) {
        ++attempts;
        const auto& a = Tournament(population);
        const auto& b = Tournament(population);
        AddUnique(Mutate(Crossover(a.delta, b.delta)), next, next_seen);
      }
      while (next.size() < population.size()) AddUnique(RandomDelta(), next, next_seen);
      population = std::move(next);
    }
    for (const auto& s : population) {
      if (s.valid) archive_.emplace(s.delta, s);
    }
    std::vector<Scored> valid;
    for (auto& [delta, s] : archive_) valid.push_back(s);
    std::sort(valid.begin(), valid.end(), Better);
    return valid;
  }

  Scored Evaluate(const Delta& delta) const {
    std::vector<double> x = request_.features;
    for (const auto& [j, v] : delta) x[j] = v;
    Scored s;
    s.delta = delta;
    s.prediction = model_.Predict(x);
    s.valid = s.prediction.label == request_.desired;
    s.desired_probability = s.prediction.probabilities[ClassIndex(request_.desired)];
    s.distance = space_.StandardizedL1(x, request_.features);
    return s;
  }

  // Drops changes that are not needed, then bisects each remaining value
  // toward its factual value while the prediction stays at the desired class.
  Scored Refine(Scored s) const {
    bool dropped = true;
    while (dropped && s.delta.size() > 1) {
      dropped = false;
      for (std::size_t k = 0; k < s.delta.size(); ++k) {
        Delta smaller = s.delta;
        smaller.erase(smaller.begin() + static_cast<long>(k));
        Scored t = Evaluate(smaller);
        if (t.valid) {
          s = std::move(t);
          dropped = true;
          break;
        }
      }
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < s.delta.size(); ++k) {
        const double origin = request_.features[s.delta[k].first];
        double good = s.delta[k].second;
        double bad = origin;
        for (int step = 0; step < config_.refine_steps; ++step) {
          const double mid = 0.5 * (good + bad);
          if (mid == good || mid == bad) break;
          Delta probe = s.delta;
          probe[k].second = mid;
          if (Evaluate(probe).valid) {
            good = mid;
          } else {
            bad = mid;
          }
        }
        s.delta[k].second = good;
      }
      s = Evaluate(s.delta);
    }
    return s;
  }

 private:
  double Propose(std::size_t j) {
    const auto& sampler = space_.sampler();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double v;
    if (unit(rng_) < 0.5) {
      v = sampler.Draw(j, rng_);
    } else {
      v = sampler.min(j) + unit(rng_) * (sampler.max(j) - sampler.min(j));
    }
    return std::max(0.0, v);
  }

  Delta Normalize(Delta d) const {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            d.end());
    std::erase_if(d, [&](const auto& c) { return c.second == request_.features[c.first]; });
    return d;
  }

  Delta RandomDelta() {
    std::uniform_int_distribution<std::size_t> count(1, budget_);
    std::vector<std::size_t> pool = mutable_;
    std::shuffle(pool.begin(), pool.end(), rng_);
    const std::size_t c = count(rng_);
    Delta d;
    for (std::size_t i = 0; i < c; ++i) d.emplace_back(pool[i], Propose(pool[i]));
    return Normalize(std::move(d));
  }

  const Scored& Tournament(const std::vector<Scored>& population) {
    std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
    const Scored* best = &population[pick(rng_)];
    for (int i = 0; i < 2; ++i) {
      const Scored* other = &population[pick(rng_)];
      if (Better(*other, *best)) best = other;
    }
    return *best;
  }

  Delta Crossover(const Delta& a, const Delta& b) {
    std::map<std::size_t, double> merged;
    std::bernoulli_distribution coin(0.5);
    for (const auto& [j, v] : a) merged[j] = v;
    for (const auto& [j, v] : b) {
      auto it = merged.find(j);
      if (it == merged.end() || coin(rng_)) merged[j] = v;
    }
    Delta d(merged.begin(), merged.end());
    while (d.size() > budget_) {
      std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
      d.erase(d.begin() + static_cast<long>(pick(rng_)));
    }
    return d;
  }

  Delta Mutate(Delta d) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = unit(rng_);
    auto pick_change = [&]() {
      std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
      return pick(rng_);
    };
    if (d.empty() || (r < 0.2 && d.size() < budget_)) {
      std::uniform_int_distribution<std::size_t> pick(0, mutable_.size() - 1);
      const std::size_t j = mutable_[pick(rng_)];
      d.emplace_back(j, Propose(j));
    } else if (r < 0.4 && d.size() > 1) {
      d.erase(d.begin() + static_cast<long>(pick_change()));
    } else if (r < 0.7) {
      const std::size_t k = pick_change();
      d[k].second = Propose(d[k].first);
    } else {
      const std::size_t k = pick_change();
      const double origin = request_.features[d[k].first];
      d[k].second = origin + unit(rng_) * (d[k].second - origin);
    }
    return Normalize(std::move(d));
  }

  void AddUnique(Delta d, std::vector<Scored>& out, std::set<Delta>& seen) {
    if (d.empty() || !seen.insert(d).second) return;
    out.push_back(Evaluate(d));
  }

  const SeverityModel& model_;
  const FeatureSpace& space_;
  const RecourseRequest& request_;
  std::vector<std::size_t> mutable_;
  RecourseSearchConfig config_;
  std::size_t budget_;
  std::mt19937_64 rng_;
  std::map<Delta, Scored> archive_;
};

RecourseSuggestion ToSuggestion(const Scored& s, const FeatureSpace& space,
                                const RecourseRequest& request) {
  RecourseSuggestion out;
  for (const auto& [j, v] : s.delta) {
    out.changes.push_back({j, space.schema().feature(j).name, request.features[j], v});
  }
  out.result = s.prediction;
  out.distance = s.distance;
  return out;
}

std::vector<double> Apply(const RecourseRequest& request, const Delta& delta) {
  std::vector<double> x = request.features;
  for (const auto& [j, v] : delta) x[j] = v;
  return x;
}

}  // namespace

std::string_view RecourseStatusName(RecourseStatus status) {
  switch (status) {
    case RecourseStatus::kOk:
      return "ok";
    case RecourseStatus::kAlreadyAtDesired:
      return "already_at_desired";
    case RecourseStatus::kNoRecourseFound:
      return "no_recourse_found";
  }
  return "unknown";
}

nlohmann::json RecourseSuggestion::ToJson(std::uint64_t seed) const {
  nlohmann::json changes_json = nlohmann::json::array();
  for (const auto& c : changes) {
    changes_json.push_back({{"feature", c.name}, {"from", c.from}, {"to", c.to}});
  }
  return {{"changes", changes_json},
          {"resulting_class", SeverityName(result.label)},
          {"probabilities", result.probabilities},
          {"distance", distance},
          {"seed", seed}};
}

RecourseSuggestion RecourseSuggestion::FromJson(const nlohmann::json& j,
                                                const FeatureSchema& schema) {
  RecourseSuggestion s;
  try {
    for (const auto& c : j.at("changes")) {
      FeatureChange change;
      change.name = c.at("feature").get<std::string>();
      change.feature = schema.IndexOf(change.name);
      change.from = c.at("from").get<double>();
      change.to = c.at("to").get<double>();
      s.changes.push_back(std::move(change));
    }
    s.result.label = ParseSeverity(j.at("resulting_class").get<std::string>());
    if (j.contains("probabilities")) {
      s.result.probabilities = j["probabilities"].get<std::array<double, 3>>();
    }
    s.distance = j.value("distance", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed suggestion: ") + e.what(), "suggestion");
  }
  std::sort(s.changes.begin(), s.changes.end(),
            [](const auto& a, const auto& b) { return a.feature < b.feature; });
  return s;
}

nlohmann::json RecourseResult::ToJson() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : suggestions) list.push_back(s.ToJson(seed));
  return {{"status", RecourseStatusName(status)},
          {"current_class", SeverityName(current.label)},
          {"current_probabilities", current.probabilities},
          {"desired", SeverityName(desired)},
          {"max_features", max_features},
          {"seed", seed},
          {"suggestions", list}};
}

RecourseResult GenerateRecourse(const SeverityModel& model, const FeatureSpace& space,
                                const RecourseRequest& request,
                                const RecourseSearchConfig& search) {
  if (request.max_features < 1) {
    throw ValidationError("max_features must be >= 1", "max_features");
  }
  if (request.num_suggestions < 1) {
    throw ValidationError("num_suggestions must be >= 1", "num_suggestions");
  }
  if (search.population < 2 || search.generations < 0 || search.refine_steps < 0) {
    throw ConfigError("invalid recourse search configuration");
  }
  if (request.features.size() != space.size()) {
    throw ValidationError("record width does not match the schema");
  }
  for (const auto& name : request.immutable) {
    if (!space.schema().Find(name)) {
      throw ValidationError("unknown immutable feature '" + name + "'", "immutable");
    }
  }
  std::vector<std::size_t> mutable_features;
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (!request.immutable.count(space.schema().feature(j).name)) {
      mutable_features.push_back(j);
    }
  }
  if (mutable_features.empty()) {
    throw ConstraintError("every feature is immutable; no recourse is possible");
  }

  RecourseResult result;
  result.current = model.Predict(request.features);
  result.desired = request.desired;
  result.max_features = request.max_features;
  result.seed = request.seed;
  if (result.current.label == request.desired) {
    result.status = RecourseStatus::kAlreadyAtDesired;
    RecourseSuggestion empty;
    empty.result = result.current;
    result.suggestions.push_back(std::move(empty));
    return result;
  }

  Search engine(model, space, request, mutable_features, search);
  const auto valid = engine.Run();
  const std::size_t m = static_cast<std::size_t>(request.num_suggestions);
  // Best candidate per changed-feature set, so refinement starts from
  // structurally different deltas.
  std::vector<const Scored*> shortlist;
  std::set<std::vector<std::size_t>> supports;
  for (const auto& s : valid) {
    std::vector<std::size_t> support;
    for (const auto& c : s.delta) support.push_back(c.first);
    if (supports.insert(std::move(support)).second) shortlist.push_back(&s);
  }

  std::vector<Scored> refined;
  std::set<Delta> unique;
  const std::size_t max_refined = 5 * m;
  for (std::size_t i = 0; i < shortlist.size() && refined.size() < max_refined; ++i) {
    if (i >= 20 * m && refined.size() >= m) break;
    Scored s = engine.Refine(*shortlist[i]);
    if (s.valid && unique.insert(s.delta).second) refined.push_back(std::move(s));
  }
  std::sort(refined.begin(), refined.end(), Better);

  // Greedy max-min diversification seeded with the closest suggestion.
  std::vector<std::size_t> chosen;
  std::vector<std::vector<double>> points;
  for (const auto& s : refined) points.push_back(Apply(request, s.delta));
  if (!refined.empty()) chosen.push_back(0);
  while (chosen.size() < m) {
    std::size_t best = refined.size();
    double best_gap = 0.0;
    for (std::size_t i = 0; i < refined.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t c : chosen) gap = std::min(gap, space.StandardizedL1(points[i], points[c]));
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best == refined.size()) break;
    chosen.push_back(best);
  }
  for (std::size_t i : chosen) result.suggestions.push_back(ToSuggestion(refined[i], space, request));
  result.status =
      result.suggestions.empty() ? RecourseStatus::kNoRecourseFound : RecourseStatus::kOk;
  return result;
}

nlohmann::json RecourseVerdict::ToJson() const {
  return {{"ok", ok()},
          {"well_formed", well_formed},
          {"reaches_desired", reaches_desired},
          {"nonnegative", nonnegative},
          {"within_budget", within_budget},
          {"respects_immutable", respects_immutable},
          {"failures", failures}};
}

RecourseVerdict ValidateRecourse(const SeverityModel& model, const FeatureSchema& schema,
                                 const RecourseRequest& request,
                                 const RecourseSuggestion& suggestion) {
  RecourseVerdict v;
  std::vector<double> x = request.features;
  std::set<std::size_t> touched;
  if (x.size() != schema.size()) {
    v.well_formed = false;
    v.failures.push_back("record width does not match the schema");
  }
  for (const auto& c : suggestion.changes) {
    if (c.feature >= schema.size() || schema.feature(c.feature).name != c.name) {
      v.well_formed = false;
      v.failures.push_back("unknown feature '" + c.name + "'");
      continue;
    }
    if (!touched.insert(c.feature).second) {
      v.well_formed = false;
      v.failures.push_back("feature '" + c.name + "' changed twice");
    }
    if (!std::isfinite(c.to)) {
      v.well_formed = false;
      v.failures.push_back("feature '" + c.name + "' has a non-finite value");
      continue;
    }
    if (v.well_formed && c.from != x[c.feature]) {
      v.well_formed = false;
      v.failures.push_back("feature '" + c.name + "' does not start from the record value");
    }
    if (c.to < 0.0) {
      v.nonnegative = false;
      v.failures.push_back("feature '" + c.name + "' would become negative");
    }
    if (request.immutable.count(c.name)) {
      v.respects_immutable = false;
      v.failures.push_back("feature '" + c.name + "' is immutable");
    }
    if (v.well_formed) x[c.feature] = c.to;
  }
  if (suggestion.changes.size() > static_cast<std::size_t>(std::max(0, request.max_features))) {
    v.within_budget = false;
    v.failures.push_back("changes " + std::to_string(suggestion.changes.size()) +
                         " features, budget is " + std::to_string(request.max_features));
  }
  if (!v.well_formed) {
    v.reaches_desired = false;
  } else {
    const auto p = model.Predict(x);
    if (p.label != request.desired) {
      v.reaches_desired = false;
      v.failures.push_back("prediction is " + std::string(SeverityName(p.label)) +
                           ", desired " + std::string(SeverityName(request.desired)));
    }
  }
  return v;
}

}  // namespace sitrep

#include "sitrep/schema.h"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <set>
#include <utility>

#include "sitrep/error.h"

namespace sitrep {

std::string_view SourceName(Source s) {
  switch (s) {
    case Source::kSatellite:
      return "satellite";
    case Source::kNews:
      return "news";
    case Source::kReddit:
      return "reddit";
  }
  return "unknown";
}

Source ParseSource(std::string_view text) {
  for (Source s : kAllSources) {
    if (SourceName(s) == text) return s;
  }
  throw ConfigError("unknown feature source '" + std::string(text) + "'");
}

std::string_view UnitName(Unit u) {
  return u == Unit::kSquareMeters ? "square-meters" : "mention-count";
}

Unit ParseUnit(std::string_view text) {
  if (text == "square-meters") return Unit::kSquareMeters;
  if (text == "mention-count") return Unit::kMentionCount;
  throw ConfigError("unknown feature unit '" + std::string(text) + "'");
}

GroupManifest::GroupManifest(std::vector<GroupInfo> groups,
                             std::map<std::string, std::string> assignment)
    : groups_(std::move(groups)), assignment_(std::move(assignment)) {
  std::set<std::string> ids;
  for (const auto& g : groups_) {
    if (g.id.empty()) throw ConfigError("group id must not be empty");
    if (!ids.insert(g.id).second) {
      throw ConfigError("duplicate group id '" + g.id + "'");
    }
  }
  for (const auto& [feature, group] : assignment_) {
    if (!ids.count(group)) {
      throw ConfigError("feature '" + feature + "' assigned to unknown group '" +
                        group + "'");
    }
  }
}

bool GroupManifest::HasGroup(std::string_view id) const {
  return std::any_of(groups_.begin(), groups_.end(),
                     [&](const GroupInfo& g) { return g.id == id; });
}

const std::string& GroupManifest::GroupOf(std::string_view feature) const {
  auto it = assignment_.find(std::string(feature));
  if (it == assignment_.end()) {
    throw ConfigError("feature '" + std::string(feature) +
                      "' has no group assignment");
  }
  return it->second;
}

nlohmann::json GroupManifest::ToJson() const {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : groups_) {
    groups.push_back({{"id", g.id}, {"display_name", g.display_name}});
  }
  return {{"version", 1}, {"groups", groups}, {"assignment", assignment_}};
}

GroupManifest GroupManifest::FromJson(const nlohmann::json& j) {
  try {
    std::vector<GroupInfo> groups;
    for (const auto& g : j.at("groups")) {
      groups.push_back({g.at("id").get<std::string>(),
                        g.value("display_name", g.at("id").get<std::string>())});
    }
    return GroupManifest(
        std::move(groups),
        j.at("assignment").get<std::map<std::string, std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed group manifest: ") + e.what());
  }
}

FeatureSchema::FeatureSchema(std::vector<FeatureDescriptor> features,
                             GroupManifest manifest, int version)
    : features_(std::move(features)),
      manifest_(std::move(manifest)),
      version_(version) {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    auto& f = features_[i];
    if (f.name.empty()) throw ConfigError("feature name must not be empty");
    if (!index_.emplace(f.name, i).second) {
      throw ConfigError("duplicate feature name '" + f.name + "'");
    }
    const bool area = f.source == Source::kSatellite;
    if (area != (f.unit == Unit::kSquareMeters)) {
      throw ConfigError("feature '" + f.name + "' has unit " +
                        std::string(UnitName(f.unit)) + " inconsistent with source " +
                        std::string(SourceName(f.source)));
    }
    f.group = manifest_.GroupOf(f.name);
  }
  for (const auto& [feature, group] : manifest_.assignment()) {
    if (!index_.count(feature)) {
      throw ConfigError("group manifest assigns unknown feature '" + feature +
                        "'");
    }
  }
}

std::optional<std::size_t> FeatureSchema::Find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::IndexOf(std::string_view name) const {
  auto idx = Find(name);
  if (!idx) {
    throw ValidationError("unknown feature '" + std::string(name) + "'",
                          std::string(name));
  }
  return *idx;
}

std::vector<std::size_t> FeatureSchema::GroupMembers(
    std::string_view group) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].group == group) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FeatureSchema::SourceMembers(Source source) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].source == source) out.push_back(i);
  }
  return out;
}

std::string FeatureSchema::Hash() const {
  // FNV-1a over a canonical text rendering.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& f : features_) {
    mix(f.name);
    mix(SourceName(f.source));
    mix(UnitName(f.unit));
    mix(f.group);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FeatureSchema FeatureSchema::WithManifest(GroupManifest manifest) const {
  return FeatureSchema(features_, std::move(manifest), version_);
}

nlohmann::json FeatureSchema::ToJson() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : features_) {
    features.push_back({{"name", f.name},
                        {"source", SourceName(f.source)},
                        {"unit", UnitName(f.unit)}});
  }
  return {{"version", version_}, {"features", features}};
}

FeatureSchema FeatureSchema::FromJson(const nlohmann::json& schema_json,
                                      const GroupManifest& manifest) {
  std::vector<FeatureDescriptor> features;
  int version = 1;
  try {
    version = schema_json.value("version", 1);
    for (const auto& f : schema_json.at("features")) {
      FeatureDescriptor d;
      d.name = f.at("name").get<std::string>();
      d.source = ParseSource(f.at("source").get<std::string>());
      d.unit = ParseUnit(f.at("unit").get<std::string>());
      features.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schema manifest: ") + e.what());
  }
  return FeatureSchema(std::move(features), manifest, version);
}

std::string SatelliteFeatureName(std::string_view from, std::string_view to) {
  return "sat_" + std::string(from) + "_to_" + std::string(to);
}

namespace {

bool IsVegetation(std::string_view c) {
  return c == "trees" || c == "grass" || c == "shrub_and_scrub" ||
         c == "crops" || c == "flooded_vegetation";
}

// Groups are checked in declaration order; the first match wins.
std::string SatelliteGroup(std::string_view from, std::string_view to) {
  if (to == "water" || to == "flooded_vegetation") return "flood_surface";
  const bool vegetation_source = from == "trees" || from == "grass" ||
                                 from == "shrub_and_scrub" || from == "crops";
  if (vegetation_source && !IsVegetation(to)) return "vegetation_loss";
  if (from == "built" || to == "built") return "infrastructure";
  return "other_landcover";
}

std::string MentionGroup(std::string_view topic) {
  if (topic == "powerline" || topic == "roof" || topic == "infrastructure") {
    return "infrastructure";
  }
  if (topic == "road" || topic == "bridge") return "mobility";
  return "other_landcover";
}

std::vector<FeatureDescriptor> DefaultFeatures() {
  std::vector<FeatureDescriptor> out;
  for (auto from : kLandCoverClasses) {
    for (auto to : kLandCoverClasses) {
      out.push_back({SatelliteFeatureName(from, to), Source::kSatellite, "",
                     Unit::kSquareMeters});
    }
  }
  for (Source s : {Source::kNews, Source::kReddit}) {
    for (auto topic : kMentionTopics) {
      out.push_back({std::string(SourceName(s)) + "_" + std::string(topic) +
                         "_mentions",
                     s, "", Unit::kMentionCount});
    }
  }
  return out;
}

}  // namespace

GroupManifest DefaultManifest() {
  std::vector<GroupInfo> groups = {
      {"flood_surface", "Flood surface increase"},
      {"vegetation_loss", "Vegetation loss"},
      {"infrastructure", "Infrastructure damage"},
      {"mobility", "Mobility disruption"},
      {"other_landcover", "Other land cover and mentions"},
  };
  std::map<std::string, std::string> assignment;
  for (auto from : kLandCoverClasses) {
    for (auto to : kLandCoverClasses) {
      assignment[SatelliteFeatureName(from, to)] = SatelliteGroup(from, to);
    }
  }
  for (Source s : {Source::kNews, Source::kReddit}) {
    for (auto topic : kMentionTopics) {
      assignment[std::string(SourceName(s)) + "_" + std::string(topic) +
                 "_mentions"] = MentionGroup(topic);
    }
  }
  return GroupManifest(std::move(groups), std::move(assignment));
}

const FeatureSchema& DefaultSchema() {
  static const FeatureSchema schema(DefaultFeatures(), DefaultManifest());
  return schema;
}

}  // namespace sitrep

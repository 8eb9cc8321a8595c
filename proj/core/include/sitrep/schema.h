#ifndef SITREP_SCHEMA_H_
#define SITREP_SCHEMA_H_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sitrep {

enum class Source { kSatellite, kNews, kReddit };
enum class Unit { kSquareMeters, kMentionCount };

inline constexpr std::array<Source, 3> kAllSources = {
    Source::kSatellite, Source::kNews, Source::kReddit};

std::string_view SourceName(Source s);  // "satellite", "news", "reddit"
Source ParseSource(std::string_view text);
std::string_view UnitName(Unit u);      // "square-meters", "mention-count"
Unit ParseUnit(std::string_view text);

// Dynamic World land-cover classes, in the order used to build the
// transition features.
inline constexpr std::array<std::string_view, 9> kLandCoverClasses = {
    "water", "trees", "grass", "flooded_vegetation", "crops",
    "shrub_and_scrub", "built", "bare", "snow_and_ice"};

// Damage topics extracted from news and reddit text.
inline constexpr std::array<std::string_view, 6> kMentionTopics = {
    "powerline", "roof", "infrastructure", "tree", "road", "bridge"};

struct FeatureDescriptor {
  std::string name;
  Source source = Source::kSatellite;
  std::string group;
  Unit unit = Unit::kSquareMeters;
};

struct GroupInfo {
  std::string id;
  std::string display_name;
};

// Assignment of every feature to exactly one group.
class GroupManifest {
 public:
  GroupManifest() = default;
  // Throws ConfigError on duplicate group ids or assignment to an unknown group.
  GroupManifest(std::vector<GroupInfo> groups,
                std::map<std::string, std::string> assignment);

  const std::vector<GroupInfo>& groups() const { return groups_; }
  const std::map<std::string, std::string>& assignment() const {
    return assignment_;
  }
  bool HasGroup(std::string_view id) const;
  // Throws ConfigError when the feature is unassigned.
  const std::string& GroupOf(std::string_view feature) const;

  nlohmann::json ToJson() const;
  static GroupManifest FromJson(const nlohmann::json& j);

 private:
  std::vector<GroupInfo> groups_;
  std::map<std::string, std::string> assignment_;
};

// Ordered feature list. Feature index == column index of a FeatureVector.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Group tags on `features` are overwritten from `manifest`, which must cover
  // every feature exactly. Throws ConfigError.
  FeatureSchema(std::vector<FeatureDescriptor> features, GroupManifest manifest,
                int version = 1);

  std::size_t size() const { return features_.size(); }
  const std::vector<FeatureDescriptor>& features() const { return features_; }
  const FeatureDescriptor& feature(std::size_t i) const { return features_[i]; }
  const GroupManifest& manifest() const { return manifest_; }
  int version() const { return version_; }

  std::optional<std::size_t> Find(std::string_view name) const;
  // Throws ValidationError naming the feature.
  std::size_t IndexOf(std::string_view name) const;

  std::vector<std::size_t> GroupMembers(std::string_view group) const;
  std::vector<std::size_t> SourceMembers(Source source) const;

  // Stable digest of names, sources, units and group assignment.
  std::string Hash() const;

  // Replaces the group assignment, keeping features and order.
  FeatureSchema WithManifest(GroupManifest manifest) const;

  // {"version", "features": [{name, source, unit}]}; groups live in the
  // separate manifest file.
  nlohmann::json ToJson() const;
  static FeatureSchema FromJson(const nlohmann::json& schema_json,
                                const GroupManifest& manifest);

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.Hash() == b.Hash();
  }

 private:
  std::vector<FeatureDescriptor> features_;
  GroupManifest manifest_;
  std::map<std::string, std::size_t, std::less<>> index_;
  int version_ = 1;
};

// The 93-feature county schema: 81 satellite transitions, 6 news, 6 reddit.
const FeatureSchema& DefaultSchema();

// flood_surface, vegetation_loss, infrastructure, mobility, other_landcover.
GroupManifest DefaultManifest();

std::string SatelliteFeatureName(std::string_view from, std::string_view to);

}  // namespace sitrep

#endif  // SITREP_SCHEMA_H_

#ifndef SITREP_DAG_H_
#define SITREP_DAG_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/schema.h"

namespace sitrep {

inline constexpr std::string_view kSeverityNode = "severity";

struct GroupEdge {
  std::string from;
  std::string to;

  friend bool operator==(const GroupEdge&, const GroupEdge&) = default;
};

// Group-level causal structure with severity as the unique sink.
//
// Construction validates that the graph is acyclic, that severity has no
// outgoing edges and that severity is reachable from every group.
class CausalDag {
 public:
  // Throws ConfigError for unknown endpoints and StructuralError for cycles or
  // unreachable severity.
  CausalDag(std::string name, std::vector<std::string> groups,
            std::vector<GroupEdge> edges);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& groups() const { return groups_; }
  const std::vector<GroupEdge>& edges() const { return edges_; }

  nlohmann::json ToJson() const;
  static CausalDag FromJson(const nlohmann::json& j);

 private:
  std::string name_;
  std::vector<std::string> groups_;
  std::vector<GroupEdge> edges_;
};

// Feature-level expansion of a CausalDag. Nodes 0..n-1 are schema features,
// node n is severity.
class FeatureDag {
 public:
  FeatureDag() = default;

  const std::string& name() const { return name_; }
  std::size_t feature_count() const { return names_.size() - 1; }
  std::size_t node_count() const { return names_.size(); }
  std::size_t severity_node() const { return names_.size() - 1; }
  const std::string& node_name(std::size_t node) const { return names_[node]; }

  // Parents and children sorted by schema index.
  const std::vector<std::size_t>& parents(std::size_t node) const {
    return parents_[node];
  }
  const std::vector<std::size_t>& children(std::size_t node) const {
    return children_[node];
  }
  std::vector<std::pair<std::size_t, std::size_t>> Edges() const;
  std::size_t edge_count() const;

  const std::vector<std::size_t>& topological_order() const { return order_; }

  // Every node reachable from `node` along directed edges, excluding itself.
  std::vector<bool> Descendants(std::size_t node) const;
  std::vector<bool> Ancestors(std::size_t node) const;

  const CausalDag& source() const { return *source_; }

 private:
  friend FeatureDag ExpandDag(const CausalDag& dag, const FeatureSchema& schema);

  std::string name_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> order_;
  std::shared_ptr<const CausalDag> source_;
};

// Complete bipartite expansion of every group edge onto the schema's features.
// Throws ConfigError when a dag group is missing from the schema's manifest or
// a manifest group is absent from the dag.
FeatureDag ExpandDag(const CausalDag& dag, const FeatureSchema& schema);

// Kahn's algorithm with ties broken by node index. Throws StructuralError
// naming one edge on a cycle.
std::vector<std::size_t> TopologicalOrder(
    std::size_t node_count,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges,
    const std::vector<std::string>* names = nullptr);

// dag1 (independent effects), dag2 (mediation through infrastructure) and
// dag3 (flood as root cause).
std::vector<CausalDag> BuiltinDags();
// Throws NotFoundError for names other than dag1/dag2/dag3.
CausalDag BuiltinDag(std::string_view name);

}  // namespace sitrep

#endif  // SITREP_DAG_H_

#include "sitrep/dag.h"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <queue>
#include <set>

#include "sitrep/error.h"

namespace sitrep {

namespace {

// Returns one edge lying on a cycle, or nullopt. Iterative DFS with colours.
std::optional<std::pair<std::size_t, std::size_t>> FindCycleEdge(
    std::size_t n, const std::vector<std::vector<std::size_t>>& adjacency) {
  enum Colour { kWhite, kGrey, kBlack };
  std::vector<Colour> colour(n, kWhite);
  for (std::size_t start = 0; start < n; ++start) {
    if (colour[start] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack = {{start, 0}};
    colour[start] = kGrey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < adjacency[node].size()) {
        const std::size_t child = adjacency[node][next++];
        if (colour[child] == kGrey) return std::make_pair(node, child);
        if (colour[child] == kWhite) {
          colour[child] = kGrey;
          stack.emplace_back(child, 0);
        }
      } else {
        colour[node] = kBlack;
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

std::string NodeLabel(std::size_t i, const std::vector<std::string>* names) {
  return names ? (*names)[i] : std::to_string(i);
}

std::vector<bool> Reach(std::size_t node,
                        const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<std::size_t> stack = {node};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<std::size_t> TopologicalOrder(
    std::size_t node_count,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges,
    const std::vector<std::string>* names) {
  std::vector<std::vector<std::size_t>> adjacency(node_count);
  std::vector<std::size_t> in_degree(node_count, 0);
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count) {
      throw StructuralError("edge endpoint out of range");
    }
    adjacency[u].push_back(v);
    ++in_degree[v];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>,
                      std::greater<std::size_t>>
      ready;
  for (std::size_t i = 0; i < node_count; ++i) {
    if (in_degree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(node_count);
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    order.push_back(u);
    for (std::size_t v : adjacency[u]) {
      if (--in_degree[v] == 0) ready.push(v);
    }
  }
  if (order.size() != node_count) {
    auto edge = FindCycleEdge(node_count, adjacency);
    std::string detail =
        edge ? NodeLabel(edge->first, names) + " -> " +
                   NodeLabel(edge->second, names)
             : std::string("unknown");
    throw StructuralError("graph contains a cycle through edge " + detail);
  }
  return order;
}

CausalDag::CausalDag(std::string name, std::vector<std::string> groups,
                     std::vector<GroupEdge> edges)
    : name_(std::move(name)), groups_(std::move(groups)), edges_(std::move(edges)) {
  // Node index: groups in declaration order, then severity.
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i] == kSeverityNode) {
      throw ConfigError("'severity' is reserved and cannot be a group");
    }
    if (!index.emplace(groups_[i], i).second) {
      throw ConfigError("dag '" + name_ + "' lists group '" + groups_[i] +
                        "' twice");
    }
  }
  const std::size_t severity = groups_.size();
  index.emplace(std::string(kSeverityNode), severity);

  std::vector<std::string> names = groups_;
  names.emplace_back(kSeverityNode);
  std::vector<std::pair<std::size_t, std::size_t>> indexed;
  std::set<std::pair<std::size_t, std::size_t>> unique;
  for (const auto& e : edges_) {
    auto from = index.find(e.from);
    auto to = index.find(e.to);
    if (from == index.end() || to == index.end()) {
      throw ConfigError("dag '" + name_ + "' edge " + e.from + " -> " + e.to +
                        " references an undeclared node");
    }
    if (from->second == severity) {
      throw StructuralError("severity must not have outgoing edges (edge " +
                            e.from + " -> " + e.to + ")");
    }
    if (from->second == to->second) {
      throw StructuralError("self loop on '" + e.from + "'");
    }
    if (!unique.emplace(from->second, to->second).second) {
      throw ConfigError("duplicate edge " + e.from + " -> " + e.to);
    }
    indexed.emplace_back(from->second, to->second);
  }
  TopologicalOrder(names.size(), indexed, &names);

  std::vector<std::vector<std::size_t>> reverse(names.size());
  for (auto [u, v] : indexed) reverse[v].push_back(u);
  auto reaches_severity = Reach(severity, reverse);
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (!reaches_severity[i]) {
      throw StructuralError("severity is not reachable from group '" +
                            groups_[i] + "' in dag '" + name_ + "'");
    }
  }
}

nlohmann::json CausalDag::ToJson() const {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) edges.push_back({e.from, e.to});
  return {{"name", name_}, {"groups", groups_}, {"edges", edges}};
}

CausalDag CausalDag::FromJson(const nlohmann::json& j) {
  try {
    std::vector<GroupEdge> edges;
    for (const auto& e : j.at("edges")) {
      if (e.is_array()) {
        edges.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
      } else {
        edges.push_back(
            {e.at("from").get<std::string>(), e.at("to").get<std::string>()});
      }
    }
    return CausalDag(j.at("name").get<std::string>(),
                     j.at("groups").get<std::vector<std::string>>(),
                     std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed dag config: ") + e.what());
  }
}

std::vector<std::pair<std::size_t, std::size_t>> FeatureDag::Edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t v = 0; v < parents_.size(); ++v) {
    for (std::size_t u : parents_[v]) out.emplace_back(u, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t FeatureDag::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : parents_) n += p.size();
  return n;
}

std::vector<bool> FeatureDag::Descendants(std::size_t node) const {
  return Reach(node, children_);
}

std::vector<bool> FeatureDag::Ancestors(std::size_t node) const {
  return Reach(node, parents_);
}

FeatureDag ExpandDag(const CausalDag& dag, const FeatureSchema& schema) {
  const auto& manifest = schema.manifest();
  for (const auto& g : dag.groups()) {
    if (!manifest.HasGroup(g)) {
      throw ConfigError("dag '" + dag.name() + "' group '" + g +
                        "' is absent from the group manifest");
    }
  }
  for (const auto& g : manifest.groups()) {
    if (std::find(dag.groups().begin(), dag.groups().end(), g.id) ==
            dag.groups().end() &&
        !schema.GroupMembers(g.id).empty()) {
      throw ConfigError("manifest group '" + g.id + "' is absent from dag '" +
                        dag.name() + "'");
    }
  }

  FeatureDag out;
  out.name_ = dag.name();
  out.source_ = std::make_shared<const CausalDag>(dag);
  const std::size_t n = schema.size();
  for (const auto& f : schema.features()) out.names_.push_back(f.name);
  out.names_.emplace_back(kSeverityNode);
  out.parents_.assign(n + 1, {});
  out.children_.assign(n + 1, {});

  auto members = [&](const std::string& node) {
    if (node == kSeverityNode) return std::vector<std::size_t>{n};
    return schema.GroupMembers(node);
  };
  for (const auto& e : dag.edges()) {
    const auto from = members(e.from);
    const auto to = members(e.to);
    for (std::size_t u : from) {
      for (std::size_t v : to) {
        out.parents_[v].push_back(u);
        out.children_[u].push_back(v);
      }
    }
  }
  for (auto& p : out.parents_) std::sort(p.begin(), p.end());
  for (auto& c : out.children_) std::sort(c.begin(), c.end());
  out.order_ = TopologicalOrder(n + 1, out.Edges(), &out.names_);
  return out;
}

std::vector<CausalDag> BuiltinDags() {
  const std::vector<std::string> groups = {"flood_surface", "vegetation_loss",
                                           "infrastructure", "mobility",
                                           "other_landcover"};
  const std::string sev(kSeverityNode);
  std::vector<GroupEdge> all_to_severity;
  for (const auto& g : groups) all_to_severity.push_back({g, sev});

  std::vector<GroupEdge> dag2 = {
      {"flood_surface", "infrastructure"},
      {"vegetation_loss", "infrastructure"},
      {"infrastructure", "mobility"},
  };
  dag2.insert(dag2.end(), all_to_severity.begin(), all_to_severity.end());

  std::vector<GroupEdge> dag3;
  for (const auto& g : groups) {
    if (g != "flood_surface") dag3.push_back({"flood_surface", g});
  }
  dag3.insert(dag3.end(), all_to_severity.begin(), all_to_severity.end());

  return {CausalDag("dag1", groups, all_to_severity),
          CausalDag("dag2", groups, std::move(dag2)),
          CausalDag("dag3", groups, std::move(dag3))};
}

CausalDag BuiltinDag(std::string_view name) {
  for (auto& dag : BuiltinDags()) {
    if (dag.name() == name) return dag;
  }
  throw NotFoundError("unknown dag '" + std::string(name) +
                      "' (expected dag1, dag2 or dag3)");
}

}  // namespace sitrep

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mba/dataset.hpp"
#include "mba/errors.hpp"
#include "mba/format.hpp"
#include "mba/mining.hpp"

namespace mba {

// Item co-occurrence graph: one undirected edge per item pair seen
// together often enough, classified weak/medium/strong for rendering.
// Thin dotted lines are weak associations, bold lines strong ones.

enum class WeightMetric { count, support, lift };

inline WeightMetric parse_weight_metric(const std::string& name) {
  if (name == "count") return WeightMetric::count;
  if (name == "support") return WeightMetric::support;
  if (name == "lift") return WeightMetric::lift;
  throw Error::config("unknown weight metric: " + name);
}

enum class EdgeStrength { weak, medium, strong };

inline std::string to_string(EdgeStrength s) {
  switch (s) {
    case EdgeStrength::weak: return "weak";
    case EdgeStrength::medium: return "medium";
    default: return "strong";
  }
}

struct CoocNode {
  std::string id;
  std::string label;
  std::uint64_t count = 0;
};

struct CoocEdge {
  std::string a, b;  // a < b, stored once per unordered pair
  std::uint64_t count = 0;
  double support_pct = 0.0;
  double lift = 0.0;
  double weight = 0.0;
  EdgeStrength strength = EdgeStrength::medium;
};

struct CoocGraph {
  std::vector<CoocNode> nodes;  // sorted by id
  std::vector<CoocEdge> edges;  // sorted by (a, b)
  std::uint64_t n_baskets = 0;
  WeightMetric metric = WeightMetric::lift;
  bool classified = false;
};

/// One edge per unordered item pair with pair count >= min_pair_count.
/// Virtual items are excluded unless requested; node labels resolve
/// through the catalog when one is given.
inline CoocGraph build_multiweb(const BitmapIndex& index,
                                std::uint64_t min_pair_count,
                                WeightMetric metric = WeightMetric::lift,
                                const ItemCatalog* catalog = nullptr,
                                bool include_virtual = false) {
  if (min_pair_count < 1)
    throw Error::config("min_pair_count must be >= 1");
  CoocGraph graph;
  graph.n_baskets = index.n_baskets();
  graph.metric = metric;

  std::vector<std::uint32_t> cols;
  for (std::uint32_t col = 0; col < index.n_items(); ++col)
    if (include_virtual || !index.is_virtual(col)) cols.push_back(col);

  std::map<std::string, std::uint64_t> node_counts;
  const double n = static_cast<double>(index.n_baskets());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      const std::uint32_t pair[2] = {cols[i], cols[j]};
      const std::uint64_t count = index.support_of_columns(pair);
      if (count < min_pair_count) continue;
      CoocEdge edge;
      edge.a = index.item_name(cols[i]);
      edge.b = index.item_name(cols[j]);
      edge.count = count;
      edge.support_pct = 100.0 * static_cast<double>(count) / n;
      edge.lift = (static_cast<double>(count) * n) /
                  (static_cast<double>(index.count(cols[i])) *
                   static_cast<double>(index.count(cols[j])));
      switch (metric) {
        case WeightMetric::count:
          edge.weight = static_cast<double>(count);
          break;
        case WeightMetric::support:
          edge.weight = edge.support_pct;
          break;
        case WeightMetric::lift:
          edge.weight = edge.lift;
          break;
      }
      node_counts[edge.a] = index.count(cols[i]);
      node_counts[edge.b] = index.count(cols[j]);
      graph.edges.push_back(std::move(edge));
    }
  }
  for (const auto& [id, count] : node_counts) {
    const ItemCatalog::Entry* entry = catalog ? catalog->find(id) : nullptr;
    graph.nodes.push_back({id, entry ? entry->name : id, count});
  }
  // column order is identifier order, so edges arrive sorted by (a, b)
  return graph;
}

namespace detail {

/// Sort-based percentile: value at index floor(m * pct / 100) of the
/// ascending weights.
inline double weight_percentile(std::vector<double> weights, unsigned pct) {
  std::sort(weights.begin(), weights.end());
  std::size_t idx = weights.size() * pct / 100;
  if (idx >= weights.size()) idx = weights.size() - 1;
  return weights[idx];
}

}  // namespace detail

/// Classifies edges by weight: below t_weak is weak, at or above
/// t_strong is strong, medium between. Explicit thresholds must satisfy
/// t_weak < t_strong. Defaults are the 33rd/67th percentiles; when those
/// coincide (degenerate weight distribution) ties classify medium.
inline CoocGraph classify_edges(CoocGraph graph, double t_weak,
                                double t_strong) {
  if (!(t_weak < t_strong))
    throw Error::config("classify_edges requires t_weak < t_strong");
  for (auto& edge : graph.edges) {
    if (edge.weight < t_weak)
      edge.strength = EdgeStrength::weak;
    else if (edge.weight >= t_strong)
      edge.strength = EdgeStrength::strong;
    else
      edge.strength = EdgeStrength::medium;
  }
  graph.classified = true;
  return graph;
}

inline CoocGraph classify_edges(CoocGraph graph) {
  if (graph.edges.empty()) {
    graph.classified = true;
    return graph;
  }
  std::vector<double> weights;
  weights.reserve(graph.edges.size());
  for (const auto& edge : graph.edges) weights.push_back(edge.weight);
  const double t_weak = detail::weight_percentile(weights, 33);
  const double t_strong = detail::weight_percentile(weights, 67);
  if (t_weak < t_strong) return classify_edges(std::move(graph), t_weak, t_strong);
  for (auto& edge : graph.edges) {
    if (edge.weight < t_weak)
      edge.strength = EdgeStrength::weak;
    else if (edge.weight > t_strong)
      edge.strength = EdgeStrength::strong;
    else
      edge.strength = EdgeStrength::medium;
  }
  graph.classified = true;
  return graph;
}

namespace detail {

inline std::string dot_quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline const char* dot_style(EdgeStrength s) {
  switch (s) {
    case EdgeStrength::weak: return "style=dotted, penwidth=1";
    case EdgeStrength::medium: return "style=solid, penwidth=2";
    default: return "style=bold, penwidth=4";
  }
}

}  // namespace detail

/// DOT text for a classified graph; nodes and edges in sorted order so
/// the output is byte-stable.
inline std::string export_dot(const CoocGraph& graph) {
  if (!graph.classified)
    throw Error::config("export_dot: classify edges first");
  std::string out = "graph multiweb {\n";
  for (const auto& node : graph.nodes) {
    out += "  " + detail::dot_quote(node.id) +
           " [label=" + detail::dot_quote(node.label) + "];\n";
  }
  for (const auto& edge : graph.edges) {
    out += "  " + detail::dot_quote(edge.a) + " -- " +
           detail::dot_quote(edge.b) + " [" +
           detail::dot_style(edge.strength) + "];\n";
  }
  out += "}\n";
  return out;
}

inline void write_edges_csv(std::ostream& out, const CoocGraph& graph) {
  out << "item_a;item_b;count;support_pct;lift;strength\n";
  for (const auto& edge : graph.edges)
    out << edge.a << ';' << edge.b << ';' << edge.count << ';'
        << render_percent(edge.count, graph.n_baskets, 3) << ';'
        << render_fixed(edge.lift, 3) << ';' << to_string(edge.strength)
        << '\n';
}

}  // namespace mba

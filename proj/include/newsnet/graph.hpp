#pragma once
// Weekly weighted entity co-occurrence graphs and their structural measures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "newsnet/core.hpp"
#include "newsnet/ingest.hpp"

namespace newsnet {

/// Co-occurrence weights are sums of 1/(r_u r_v) with ranks in 1..5, so every
/// weight is an exact multiple of 1/3600 (lcm of all rank products).
inline constexpr std::int64_t kWeightUnitsPerOne = 3600;

inline std::int64_t pair_weight_units(int rank_u, int rank_v) {
  return kWeightUnitsPerOne / (static_cast<std::int64_t>(rank_u) * rank_v);
}

/// Rational edge threshold: edges with weight <= num/den are dropped.
struct EdgeThreshold {
  std::int64_t num = 1;
  std::int64_t den = 6;

  bool keeps(std::int64_t units) const { return units * den > num * kWeightUnitsPerOne; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  static EdgeThreshold parse(std::string_view s) {
    auto parts = split(s, '/');
    if (parts.size() != 2) throw ParseError("edge threshold must be 'num/den', got '" + std::string(s) + "'");
    EdgeThreshold t{parse_long(parts[0]), parse_long(parts[1])};
    if (t.num < 0 || t.den <= 0) throw ParseError("edge threshold must be a nonnegative fraction");
    return t;
  }
};

struct Edge {
  int u = 0;  // u < v; node indices follow lexicographic label order
  int v = 0;
  double weight = 0.0;
  std::int64_t units = -1;              // exact weight in 1/3600 units, -1 when not rational
  std::vector<std::string> articles;    // provenance, sorted
};

struct Neighbor {
  int node;
  double weight;
};

/// Weighted undirected simple graph with lexicographically ordered node
/// labels and a per-node sentiment attribute. Immutable once built.
class WeeklyGraph {
 public:
  WeeklyGraph() = default;

  /// Labels may be given in any order; edges refer to labels. Duplicate
  /// edges are summed; self-loops and nonpositive weights are rejected.
  static WeeklyGraph from_edges(const std::vector<std::tuple<std::string, std::string, double>>& edges,
                                std::vector<std::string> extra_nodes = {}, Date week = {}) {
    std::set<std::string> labels(extra_nodes.begin(), extra_nodes.end());
    for (const auto& [a, b, w] : edges) {
      labels.insert(a);
      labels.insert(b);
    }
    WeeklyGraph g;
    g.week_end_ = week;
    g.nodes_.assign(labels.begin(), labels.end());
    g.sentiment_.assign(g.nodes_.size(), 0.0);
    std::map<std::pair<int, int>, double> acc;
    for (const auto& [a, b, w] : edges) {
      if (a == b) throw Error("self-loop on '" + a + "'");
      if (!(w > 0.0) || !std::isfinite(w)) throw Error("edge weight must be positive and finite");
      int u = g.index_of(a), v = g.index_of(b);
      if (u > v) std::swap(u, v);
      acc[{u, v}] += w;
    }
    for (const auto& [uv, w] : acc) g.edges_.push_back({uv.first, uv.second, w, -1, {}});
    g.build_adjacency();
    return g;
  }

  /// Assembles a graph from already-indexed parts. Edges must satisfy u < v.
  static WeeklyGraph from_parts(Date week, std::vector<std::string> nodes, std::vector<double> sentiment,
                                std::vector<Edge> edges) {
    WeeklyGraph g;
    g.week_end_ = week;
    g.nodes_ = std::move(nodes);
    if (!std::is_sorted(g.nodes_.begin(), g.nodes_.end()) ||
        std::adjacent_find(g.nodes_.begin(), g.nodes_.end()) != g.nodes_.end())
      throw Error("graph node labels must be sorted and unique");
    g.sentiment_ = std::move(sentiment);
    if (g.sentiment_.size() != g.nodes_.size()) g.sentiment_.assign(g.nodes_.size(), 0.0);
    g.edges_ = std::move(edges);
    for (const auto& e : g.edges_)
      if (e.u >= e.v || e.v >= static_cast<int>(g.nodes_.size()))
        throw Error("malformed edge in graph parts");
    std::sort(g.edges_.begin(), g.edges_.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    g.build_adjacency();
    return g;
  }

  Date week_end() const { return week_end_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& label(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& sentiment() const { return sentiment_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(int i) const { return adj_[static_cast<std::size_t>(i)]; }

  std::optional<int> find(std::string_view label) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), label);
    if (it == nodes_.end() || *it != label) return std::nullopt;
    return static_cast<int>(it - nodes_.begin());
  }
  int index_of(std::string_view label) const {
    auto i = find(label);
    if (!i) throw Error("unknown node '" + std::string(label) + "'");
    return *i;
  }

  double weight(int u, int v) const {
    for (const auto& n : adj_[static_cast<std::size_t>(u)])
      if (n.node == v) return n.weight;
    return 0.0;
  }

  double total_weight() const {
    double w = 0.0;
    for (const auto& e : edges_) w += e.weight;
    return w;
  }

  /// Induced subgraph on the given node indices.
  WeeklyGraph subgraph(const std::vector<int>& keep) const {
    std::vector<int> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> remap(nodes_.size(), -1);
    std::vector<std::string> nodes;
    std::vector<double> sent;
    for (int old : sorted) {
      remap[static_cast<std::size_t>(old)] = static_cast<int>(nodes.size());
      nodes.push_back(nodes_[static_cast<std::size_t>(old)]);
      sent.push_back(sentiment_[static_cast<std::size_t>(old)]);
    }
    std::vector<Edge> edges;
    for (const auto& e : edges_) {
      int u = remap[static_cast<std::size_t>(e.u)], v = remap[static_cast<std::size_t>(e.v)];
      if (u >= 0 && v >= 0) {
        Edge ne = e;
        ne.u = u;
        ne.v = v;
        edges.push_back(std::move(ne));
      }
    }
    return from_parts(week_end_, std::move(nodes), std::move(sent), std::move(edges));
  }

 private:
  void build_adjacency() {
    adj_.assign(nodes_.size(), {});
    for (const auto& e : edges_) {
      adj_[static_cast<std::size_t>(e.u)].push_back({e.v, e.weight});
      adj_[static_cast<std::size_t>(e.v)].push_back({e.u, e.weight});
    }
    for (auto& a : adj_)
      std::sort(a.begin(), a.end(), [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
  }

  Date week_end_{};
  std::vector<std::string> nodes_;
  std::vector<double> sentiment_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adj_;
};

/// Node-aligned values (index i belongs to graph.label(i)).
using NodeValues = std::vector<double>;

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// All entities of the week as nodes, summed inverse-rank-product weights,
/// thresholded. Nodes whose every edge was dropped stay as isolated nodes.
inline WeeklyGraph co_occurrence_graph(const WeeklyCorpus& corpus, EdgeThreshold threshold = {}) {
  std::map<std::string, std::vector<double>> sentiment;
  std::map<std::pair<std::string, std::string>, std::pair<std::int64_t, std::set<std::string>>> pairs;
  for (const auto& a : corpus.articles) {
    for (const auto& e : a.entities) sentiment[e.text].push_back(weighted_entity_sentiment(e));
    for (std::size_t i = 0; i < a.entities.size(); ++i) {
      for (std::size_t j = i + 1; j < a.entities.size(); ++j) {
        const auto& x = a.entities[i];
        const auto& y = a.entities[j];
        auto key = x.text < y.text ? std::make_pair(x.text, y.text) : std::make_pair(y.text, x.text);
        auto& slot = pairs[key];
        slot.first += pair_weight_units(x.rank, y.rank);
        slot.second.insert(a.article_id);
      }
    }
  }
  std::vector<std::string> nodes;
  std::vector<double> sent;
  for (auto& [label, s] : sentiment) {
    // sorted summation keeps the mean independent of article order
    std::sort(s.begin(), s.end());
    nodes.push_back(label);
    sent.push_back(std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size()));
  }
  auto idx = [&](const std::string& l) {
    return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), l) - nodes.begin());
  };
  std::vector<Edge> edges;
  for (auto& [key, slot] : pairs) {
    if (!threshold.keeps(slot.first)) continue;
    Edge e;
    e.u = idx(key.first);
    e.v = idx(key.second);
    e.units = slot.first;
    e.weight = static_cast<double>(slot.first) / static_cast<double>(kWeightUnitsPerOne);
    e.articles.assign(slot.second.begin(), slot.second.end());
    edges.push_back(std::move(e));
  }
  return WeeklyGraph::from_parts(corpus.week_end, std::move(nodes), std::move(sent), std::move(edges));
}

/// Connected components as sorted node-index lists, ordered by smallest member.
inline std::vector<std::vector<int>> connected_components(const WeeklyGraph& g) {
  std::vector<int> comp(g.size(), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < static_cast<int>(g.size()); ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<int> members{s}, stack{s};
    comp[static_cast<std::size_t>(s)] = static_cast<int>(out.size());
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (const auto& n : g.neighbors(x)) {
        if (comp[static_cast<std::size_t>(n.node)] < 0) {
          comp[static_cast<std::size_t>(n.node)] = static_cast<int>(out.size());
          members.push_back(n.node);
          stack.push_back(n.node);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

/// Largest component; equal sizes resolve to the one holding the
/// lexicographically smallest label.
inline std::vector<int> giant_component_nodes(const WeeklyGraph& g) {
  auto comps = connected_components(g);
  if (comps.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < comps.size(); ++i)
    if (comps[i].size() > comps[best].size()) best = i;  // comps ordered by smallest member
  return comps[best];
}

inline WeeklyGraph giant_component(const WeeklyGraph& g) { return g.subgraph(giant_component_nodes(g)); }

/// |giant component| / |all nodes of the thresholded graph, isolated included|.
inline double giant_ratio(const WeeklyGraph& thresholded) {
  if (thresholded.empty()) return 0.0;
  return static_cast<double>(giant_component_nodes(thresholded).size()) /
         static_cast<double>(thresholded.size());
}

struct GraphBuild {
  WeeklyGraph graph;       // giant component
  std::size_t total_nodes = 0;
  double giant_ratio = 0.0;
};

/// Co-occurrence graph reduced to its giant component. A week with no
/// surviving edge is degenerate and rejected.
inline GraphBuild build_graph(const WeeklyCorpus& corpus, EdgeThreshold threshold = {}) {
  if (corpus.articles.empty()) throw Error("week " + corpus.week_end.str() + " has no articles");
  WeeklyGraph full = co_occurrence_graph(corpus, threshold);
  if (full.edges().empty())
    throw Error("degenerate week " + corpus.week_end.str() + ": no edge survives the threshold");
  GraphBuild b;
  b.total_nodes = full.size();
  b.giant_ratio = giant_ratio(full);
  b.graph = giant_component(full);
  return b;
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

inline NodeValues degree_centrality(const WeeklyGraph& g) {
  NodeValues d(g.size(), 0.0);
  for (const auto& e : g.edges()) {
    d[static_cast<std::size_t>(e.u)] += e.weight;
    d[static_cast<std::size_t>(e.v)] += e.weight;
  }
  return d;
}

struct EigenvectorResult {
  NodeValues values;  // nonnegative, unit Euclidean norm
  double eigenvalue = 0.0;
  int iterations = 0;
};

/// Perron vector of the weighted adjacency matrix by power iteration. The
/// iteration runs on A + cI with c = max degree / 2, which has the same
/// eigenvectors and a strictly dominant Perron eigenvalue even on bipartite
/// graphs. Stops once successive iterates differ by < tol (max-norm) and the
/// eigen-residual |Ax - lambda x| is also below tol.
inline EigenvectorResult eigenvector_centrality(const WeeklyGraph& g, double tol = 1e-10,
                                                int max_iter = 10000) {
  const std::size_t n = g.size();
  EigenvectorResult r;
  if (n == 0) return r;
  auto deg = degree_centrality(g);
  double shift = 0.5 * *std::max_element(deg.begin(), deg.end());
  if (shift <= 0.0) shift = 1.0;

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), ax(n), next(n);
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& nb : g.neighbors(static_cast<int>(i))) s += nb.weight * x[static_cast<std::size_t>(nb.node)];
      ax[i] = s;
    }
    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += x[i] * ax[i];
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(ax[i] - lambda * x[i]));

    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = ax[i] + shift * x[i];
      norm += next[i] * next[i];
    }
    norm = std::sqrt(norm);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      diff = std::max(diff, std::abs(next[i] - x[i]));
    }
    bool done = diff < tol && residual < tol;
    std::swap(x, next);
    if (done) {
      r.values = x;
      r.eigenvalue = lambda;
      r.iterations = it;
      return r;
    }
  }
  throw ConvergenceError("eigenvector centrality did not converge", max_iter);
}

/// Mean local clustering coefficient on the unweighted skeleton; nodes of
/// degree < 2 contribute 0.
inline double avg_clustering_coefficient(const WeeklyGraph& g) {
  if (g.empty()) return 0.0;
  double total = 0.0;
  for (int v = 0; v < static_cast<int>(g.size()); ++v) {
    const auto& nb = g.neighbors(v);
    std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (g.weight(nb[i].node, nb[j].node) > 0.0) ++links;
    total += 2.0 * static_cast<double>(links) / static_cast<double>(k * (k - 1));
  }
  return total / static_cast<double>(g.size());
}

struct RankedNode {
  std::string node;
  double value = 0.0;
};

/// Highest values first; equal values by label.
inline std::vector<RankedNode> top_nodes(const WeeklyGraph& g, const NodeValues& values, std::size_t count) {
  std::vector<int> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
  });
  std::vector<RankedNode> out;
  for (std::size_t i = 0; i < std::min(count, order.size()); ++i)
    out.push_back({g.label(order[i]), values[static_cast<std::size_t>(order[i])]});
  return out;
}

struct CentralityReport {
  Date week_end;
  std::vector<std::string> nodes;
  NodeValues degree;
  NodeValues eigenvector;
  NodeValues sentiment;
  std::vector<RankedNode> top3_by_degree;
  std::vector<RankedNode> top3_by_eigenvector;
};

inline CentralityReport centrality_report(const WeeklyGraph& g, double tol = 1e-10, int max_iter = 10000) {
  CentralityReport r;
  r.week_end = g.week_end();
  r.nodes = g.nodes();
  r.degree = degree_centrality(g);
  r.eigenvector = eigenvector_centrality(g, tol, max_iter).values;
  r.sentiment = g.sentiment();
  r.top3_by_degree = top_nodes(g, r.degree, 3);
  r.top3_by_eigenvector = top_nodes(g, r.eigenvector, 3);
  return r;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string to_graphml(const WeeklyGraph& g) {
  std::string s =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
      "  <key id=\"sentiment\" for=\"node\" attr.name=\"sentiment\" attr.type=\"double\"/>\n"
      "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      "  <graph id=\"" + g.week_end().str() + "\" edgedefault=\"undirected\">\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    s += "    <node id=\"n" + std::to_string(i) + "\"><data key=\"label\">" + xml_escape(g.nodes()[i]) +
         "</data><data key=\"sentiment\">" + fmt_num(g.sentiment()[i]) + "</data></node>\n";
  for (const auto& e : g.edges())
    s += "    <edge source=\"n" + std::to_string(e.u) + "\" target=\"n" + std::to_string(e.v) +
         "\"><data key=\"weight\">" + fmt_num(e.weight) + "</data></edge>\n";
  s += "  </graph>\n</graphml>\n";
  return s;
}

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string to_dot(const WeeklyGraph& g) {
  std::string s = "graph " + dot_quote(g.week_end().str()) + " {\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    s += "  " + dot_quote(g.nodes()[i]) + " [sentiment=" + fmt_num(g.sentiment()[i]) + "];\n";
  for (const auto& e : g.edges())
    s += "  " + dot_quote(g.label(e.u)) + " -- " + dot_quote(g.label(e.v)) + " [weight=" + fmt_num(e.weight) +
         "];\n";
  return s + "}\n";
}

inline const CsvRow kCentralityCsvHeader = {"week", "node", "degree", "eigenvector"};

inline std::string centrality_csv_rows(const CentralityReport& r) {
  std::string s;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s += csv_line({r.week_end.str(), r.nodes[i], fmt_num(r.degree[i]), fmt_num(r.eigenvector[i])});
  return s;
}

}  // namespace newsnet

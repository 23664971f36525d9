#pragma once
// Stage-by-stage pipeline over on-disk artifacts. Each stage writes under
// <output_dir>/<stage>/ plus a manifest holding a key derived from its
// parameters and its upstream keys, and a hash per written file.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsnet/community.hpp"
#include "newsnet/core.hpp"
#include "newsnet/embedding.hpp"
#include "newsnet/feature.hpp"
#include "newsnet/graph.hpp"
#include "newsnet/ingest.hpp"
#include "newsnet/market.hpp"
#include "newsnet/model.hpp"
#include "newsnet/narrative.hpp"
#include "newsnet/report.hpp"

namespace newsnet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
  fs::path corpus;
  std::map<std::string, fs::path> indices;  // VIX, VIXFX, MRI, MOVE
  fs::path output_dir = "newsnet-out";
  std::uint64_t seed = 42;
  std::set<Date> exclude_weeks;
  Date start_date = kDefaultStartDate;
  int k_min = 2;
  int k_max = 14;
  double beta = 1.0;
  int knee_seeds = 5;
  WalkConfig walk;
  double stability_threshold = kDefaultStabilityThreshold;
  EdgeThreshold edge_threshold;
  double dislocation_threshold = kDislocationMeanThreshold;
  double alpha = 0.05;
  int smote_k = 5;
  std::vector<std::string> experiments = {"contemporaneous", "predictive"};
  int min_appearances = kDefaultMinAppearances;

  void validate() const {
    if (k_min < 2 || k_max < k_min) throw Error("k range must satisfy 2 <= k_min <= k_max");
    if (!(beta >= 0.0)) throw Error("beta must be nonnegative");
    if (knee_seeds < 1) throw Error("knee_seeds must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
    if (smote_k < 1) throw Error("smote_k must be at least 1");
    walk.validate();
    for (const auto& e : experiments)
      if (e != "contemporaneous" && e != "predictive") throw Error("unknown experiment '" + e + "'");
    if (experiments.empty()) throw Error("no regression experiment selected");
  }
};

inline nlohmann::json walk_json(const WalkConfig& w) {
  return {{"dims", w.dims},       {"walk_length", w.walk_length}, {"walks_per_node", w.walks_per_node},
          {"p", w.p},             {"q", w.q},                     {"window", w.window},
          {"negatives", w.negatives}, {"epochs", w.epochs},       {"learning_rate", w.learning_rate}};
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json idx = nlohmann::json::object();
  for (const auto& [k, v] : c.indices) idx[k] = v.string();
  std::vector<std::string> ex;
  for (Date d : c.exclude_weeks) ex.push_back(d.str());
  return {{"corpus", c.corpus.string()},
          {"indices", idx},
          {"output_dir", c.output_dir.string()},
          {"seed", c.seed},
          {"exclude_weeks", ex},
          {"start_date", c.start_date.str()},
          {"k_min", c.k_min},
          {"k_max", c.k_max},
          {"beta", c.beta},
          {"knee_seeds", c.knee_seeds},
          {"walk", walk_json(c.walk)},
          {"stability_threshold", c.stability_threshold},
          {"edge_threshold", c.edge_threshold.str()},
          {"dislocation_threshold", c.dislocation_threshold},
          {"alpha", c.alpha},
          {"smote_k", c.smote_k},
          {"experiments", c.experiments},
          {"min_appearances", c.min_appearances}};
}

/// Overlays the keys present in j. Relative paths resolve against base.
inline void apply_config_json(PipelineConfig& c, const nlohmann::json& j, const fs::path& base = {}) {
  static const std::set<std::string> known = {
      "corpus",    "indices", "output_dir",          "seed",          "exclude_weeks",         "start_date",
      "k_min",     "k_max",   "beta",                "knee_seeds",    "walk",                  "stability_threshold",
      "edge_threshold",       "dislocation_threshold", "alpha",       "smote_k",               "experiments",
      "min_appearances"};
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error("unknown config key '" + k + "'");
  auto path = [&](const std::string& s) { return fs::path(s).is_absolute() || base.empty() ? fs::path(s) : base / s; };
  try {
    if (j.contains("corpus")) c.corpus = path(j["corpus"].get<std::string>());
    if (j.contains("indices"))
      for (const auto& [k, v] : j["indices"].items()) c.indices[k] = path(v.get<std::string>());
    if (j.contains("output_dir")) c.output_dir = path(j["output_dir"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("exclude_weeks"))
      for (const auto& d : j["exclude_weeks"]) c.exclude_weeks.insert(Date::parse(d.get<std::string>()).week_label());
    if (j.contains("start_date")) c.start_date = Date::parse(j["start_date"].get<std::string>());
    if (j.contains("k_min")) c.k_min = j["k_min"].get<int>();
    if (j.contains("k_max")) c.k_max = j["k_max"].get<int>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("knee_seeds")) c.knee_seeds = j["knee_seeds"].get<int>();
    if (j.contains("walk")) {
      const auto& w = j["walk"];
      auto& cw = c.walk;
      for (const auto& [k, v] : w.items()) {
        if (k == "dims") cw.dims = v.get<int>();
        else if (k == "walk_length") cw.walk_length = v.get<int>();
        else if (k == "walks_per_node") cw.walks_per_node = v.get<int>();
        else if (k == "p") cw.p = v.get<double>();
        else if (k == "q") cw.q = v.get<double>();
        else if (k == "window") cw.window = v.get<int>();
        else if (k == "negatives") cw.negatives = v.get<int>();
        else if (k == "epochs") cw.epochs = v.get<int>();
        else if (k == "learning_rate") cw.learning_rate = v.get<double>();
        else throw Error("unknown walk key '" + k + "'");
      }
    }
    if (j.contains("stability_threshold")) c.stability_threshold = j["stability_threshold"].get<double>();
    if (j.contains("edge_threshold")) c.edge_threshold = EdgeThreshold::parse(j["edge_threshold"].get<std::string>());
    if (j.contains("dislocation_threshold")) c.dislocation_threshold = j["dislocation_threshold"].get<double>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("smote_k")) c.smote_k = j["smote_k"].get<int>();
    if (j.contains("experiments")) c.experiments = j["experiments"].get<std::vector<std::string>>();
    if (j.contains("min_appearances")) c.min_appearances = j["min_appearances"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
}

inline PipelineConfig load_config(const fs::path& path) {
  PipelineConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  apply_config_json(c, j, path.parent_path());
  return c;
}

// ---------------------------------------------------------------------------
// Stage graph
// ---------------------------------------------------------------------------

inline const std::vector<std::string> kStages = {"ingest", "graph",    "centrality", "communities", "narratives",
                                                 "embed",  "market",   "features",   "regress",     "report"};

inline const std::map<std::string, std::vector<std::string>>& stage_dependencies() {
  static const std::map<std::string, std::vector<std::string>> deps = {
      {"ingest", {}},
      {"graph", {"ingest"}},
      {"centrality", {"graph"}},
      {"communities", {"ingest", "graph"}},
      {"narratives", {"communities"}},
      {"embed", {"graph"}},
      {"market", {}},
      {"features", {"ingest", "graph", "centrality", "communities", "embed", "market"}},
      {"regress", {"features"}},
      {"report", {"ingest", "graph", "centrality", "communities", "narratives", "embed", "market", "features",
                  "regress"}}};
  return deps;
}

/// Topological order of the stages, visiting roots in the given order;
/// throws on a cycle or unknown stage.
inline std::vector<std::string> stage_order(const std::map<std::string, std::vector<std::string>>& deps,
                                            const std::vector<std::string>& roots = kStages) {
  std::vector<std::string> order;
  std::map<std::string, int> state;  // 1 visiting, 2 done
  std::function<void(const std::string&)> visit = [&](const std::string& s) {
    if (!deps.count(s)) throw Error("unknown stage '" + s + "'");
    if (state[s] == 2) return;
    if (state[s] == 1) throw Error("stage dependency cycle through '" + s + "'");
    state[s] = 1;
    for (const auto& d : deps.at(s)) visit(d);
    state[s] = 2;
    order.push_back(s);
  };
  for (const auto& s : roots) visit(s);
  for (const auto& [s, d] : deps) visit(s);
  return order;
}

inline bool is_stage(std::string_view s) { return std::find(kStages.begin(), kStages.end(), s) != kStages.end(); }

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct StageOutput {
  std::map<std::string, std::string> files;  // path relative to the stage dir -> content
  std::vector<std::string> diagnostics;
};

struct Manifest {
  std::string stage;
  std::string key;
  std::map<std::string, std::string> files;  // relative path -> content hash
  std::vector<std::string> diagnostics;
};

inline std::string content_hash(std::string_view s) { return hex64(fnv1a(s)); }

inline nlohmann::json to_json(const Manifest& m) {
  return {{"stage", m.stage}, {"key", m.key}, {"files", m.files}, {"diagnostics", m.diagnostics}};
}

inline std::optional<Manifest> read_manifest(const fs::path& stage_dir) {
  fs::path p = stage_dir / "manifest.json";
  if (!fs::exists(p)) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(read_file(p));
    return Manifest{j.at("stage").get<std::string>(), j.at("key").get<std::string>(),
                    j.at("files").get<std::map<std::string, std::string>>(),
                    j.at("diagnostics").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt manifest " + p.string() + ": " + e.what());
  }
}

/// Every recorded file is present with its recorded hash.
inline bool artifacts_intact(const fs::path& stage_dir, const Manifest& m) {
  for (const auto& [name, h] : m.files) {
    fs::path p = stage_dir / name;
    if (!fs::exists(p) || content_hash(read_file(p)) != h) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Artifact loaders
// ---------------------------------------------------------------------------

namespace artifacts {

inline fs::path stage_dir(const PipelineConfig& c, std::string_view stage) { return c.output_dir / std::string(stage); }

inline CsvTable table(const PipelineConfig& c, std::string_view stage, std::string_view file) {
  return read_csv(stage_dir(c, stage) / std::string(file));
}

inline std::vector<WeeklyCorpus> weeks(const PipelineConfig& c) {
  Diagnostics diag;
  return load_corpus(stage_dir(c, "ingest") / "articles.jsonl", diag);
}

inline std::map<Date, WeeklyGraph> graphs(const PipelineConfig& c) {
  auto nodes = table(c, "graph", "nodes.csv");
  auto edges = table(c, "graph", "edges.csv");
  std::map<Date, std::pair<std::vector<std::string>, std::vector<double>>> nv;
  for (const auto& r : nodes.rows) {
    auto& slot = nv[Date::parse(r.at(0))];
    slot.first.push_back(r.at(1));
    slot.second.push_back(parse_double(r.at(2)));
  }
  std::map<Date, std::vector<Edge>> ev;
  for (const auto& r : edges.rows) {
    Date d = Date::parse(r.at(0));
    const auto& labels = nv.at(d).first;
    auto idx = [&](const std::string& l) {
      auto it = std::lower_bound(labels.begin(), labels.end(), l);
      if (it == labels.end() || *it != l) throw Error("edge endpoint '" + l + "' missing from graph/nodes.csv");
      return static_cast<int>(it - labels.begin());
    };
    Edge e;
    e.u = idx(r.at(1));
    e.v = idx(r.at(2));
    e.weight = parse_double(r.at(3));
    e.units = parse_long(r.at(4));
    ev[d].push_back(std::move(e));
  }
  std::map<Date, WeeklyGraph> out;
  for (auto& [d, nsv] : nv) out.emplace(d, WeeklyGraph::from_parts(d, nsv.first, nsv.second, ev[d]));
  return out;
}

/// Column values of a per-week summary CSV keyed by week.
inline std::map<Date, std::string> column(const CsvTable& t, std::string_view name) {
  std::map<Date, std::string> out;
  auto wc = t.column("week_end"), vc = t.column(name);
  for (const auto& r : t.rows) out[Date::parse(r.at(wc))] = r.at(vc);
  return out;
}

}  // namespace artifacts

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

namespace stages {

inline std::string file_key(const fs::path& p) {
  if (p.empty()) throw Error("input path not set");
  return content_hash(read_file(p));
}

/// Parameters that determine a stage's output, excluding upstream keys.
inline nlohmann::json parameters(const std::string& stage, const PipelineConfig& c) {
  std::vector<std::string> ex;
  for (Date d : c.exclude_weeks) ex.push_back(d.str());
  if (stage == "ingest") return {{"corpus", file_key(c.corpus)}, {"exclude_weeks", ex}};
  if (stage == "graph") return {{"edge_threshold", c.edge_threshold.str()}};
  if (stage == "communities")
    return {{"seed", c.seed}, {"k_min", c.k_min}, {"k_max", c.k_max}, {"beta", c.beta}, {"knee_seeds", c.knee_seeds},
            {"stability_threshold", c.stability_threshold}};
  if (stage == "embed") return {{"seed", c.seed}, {"walk", walk_json(c.walk)}};
  if (stage == "market") {
    nlohmann::json idx = nlohmann::json::object();
    for (const auto& n : kIndexNames) {
      auto it = c.indices.find(n);
      if (it == c.indices.end()) throw Error("no CSV given for index " + n);
      idx[n] = file_key(it->second);
    }
    return {{"indices", idx}, {"dislocation_threshold", c.dislocation_threshold}};
  }
  if (stage == "features") return {{"start_date", c.start_date.str()}};
  if (stage == "regress") return {{"seed", c.seed}, {"alpha", c.alpha}, {"smote_k", c.smote_k}, {"experiments", c.experiments}};
  if (stage == "report") return {{"min_appearances", c.min_appearances}};
  return nlohmann::json::object();
}

inline StageOutput ingest(const PipelineConfig& c) {
  Diagnostics diag;
  auto weeks = load_corpus(c.corpus, diag, c.exclude_weeks);
  StageOutput out;
  std::string jsonl;
  std::string summary = csv_line({"week_end", "articles"});
  for (const auto& w : weeks) {
    for (const auto& a : w.articles) jsonl += to_json(a).dump() + "\n";
    summary += csv_line({w.week_end.str(), std::to_string(w.articles.size())});
  }
  out.files["articles.jsonl"] = jsonl;
  out.files["weeks.csv"] = summary;
  out.diagnostics = diag.messages;
  return out;
}

inline StageOutput graph(const PipelineConfig& c) {
  auto weeks = artifacts::weeks(c);
  struct Slot {
    std::optional<GraphBuild> build;
    double clustering = 0.0;
    std::string error;
  };
  std::vector<Slot> slots(weeks.size());
  parallel_for(weeks.size(), [&](std::size_t i) {
    try {
      slots[i].build = build_graph(weeks[i], c.edge_threshold);
      slots[i].clustering = avg_clustering_coefficient(slots[i].build->graph);
    } catch (const Error& e) {
      slots[i].error = e.what();
    }
  });
  StageOutput out;
  std::string nodes = csv_line({"week_end", "node", "sentiment"});
  std::string edges = csv_line({"week_end", "source", "target", "weight", "units", "articles"});
  std::string summary = csv_line({"week_end", "total_nodes", "giant_nodes", "edges", "giant_ratio", "clust_coeff"});
  for (std::size_t i = 0; i < weeks.size(); ++i) {
    if (!slots[i].build) {
      out.diagnostics.push_back("week " + weeks[i].week_end.str() + " skipped: " + slots[i].error);
      continue;
    }
    const auto& b = *slots[i].build;
    const auto& g = b.graph;
    std::string w = g.week_end().str();
    for (std::size_t v = 0; v < g.size(); ++v) nodes += csv_line({w, g.nodes()[v], fmt_num(g.sentiment()[v])});
    for (const auto& e : g.edges()) {
      std::string ids;
      for (const auto& a : e.articles) ids += (ids.empty() ? "" : ";") + a;
      edges += csv_line({w, g.label(e.u), g.label(e.v), fmt_num(e.weight), std::to_string(e.units), ids});
    }
    summary += csv_line({w, std::to_string(b.total_nodes), std::to_string(g.size()), std::to_string(g.edges().size()),
                         fmt_num(b.giant_ratio), fmt_num(slots[i].clustering)});
    out.files["graphml/" + w + ".graphml"] = to_graphml(g);
  }
  if (out.files.empty()) throw Error("no week produced a graph");
  out.files["nodes.csv"] = nodes;
  out.files["edges.csv"] = edges;
  out.files["summary.csv"] = summary;
  return out;
}

inline StageOutput centrality(const PipelineConfig& c) {
  auto graphs = artifacts::graphs(c);
  std::vector<const WeeklyGraph*> gs;
  for (const auto& [d, g] : graphs) gs.push_back(&g);
  std::vector<CentralityReport> reports(gs.size());
  parallel_for(gs.size(), [&](std::size_t i) { reports[i] = centrality_report(*gs[i]); });
  StageOutput out;
  std::string all = csv_line(kCentralityCsvHeader);
  std::string summary = csv_line({"week_end", "eig_first", "eig_ratio", "top_degree", "top_eigenvector"});
  for (const auto& r : reports) {
    all += centrality_csv_rows(r);
    auto es = eigen_summary(r.eigenvector);
    summary += csv_line({r.week_end.str(), fmt_num(es.first), es.ratio ? fmt_num(*es.ratio) : "",
                         r.top3_by_degree.front().node, r.top3_by_eigenvector.front().node});
  }
  out.files["centrality.csv"] = all;
  out.files["summary.csv"] = summary;
  return out;
}

inline StageOutput communities(const PipelineConfig& c) {
  auto graphs = artifacts::graphs(c);
  auto weeks = artifacts::weeks(c);
  std::map<Date, const WeeklyCorpus*> corpus;
  for (const auto& w : weeks) corpus[w.week_end] = &w;
  std::vector<const WeeklyGraph*> gs;
  for (const auto& [d, g] : graphs) gs.push_back(&g);

  struct Slot {
    Partition louvain;
    std::optional<SelectKResult> sel;
    std::optional<FuzzyPartition> fuzzy;
    std::vector<std::vector<ArticleRecord>> representative;
    std::string error;
  };
  std::vector<Slot> slots(gs.size());
  parallel_for(gs.size(), [&](std::size_t i) {
    const auto& g = *gs[i];
    std::string w = g.week_end().str();
    auto& s = slots[i];
    s.louvain = louvain(g, derive_seed(c.seed, "louvain-" + w));
    if (static_cast<int>(g.size()) <= c.k_min) {
      s.error = "too few nodes (" + std::to_string(g.size()) + ") for fuzzy communities";
      return;
    }
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < c.knee_seeds; ++k) seeds.push_back(derive_seed(c.seed, "nmf-" + w, k));
    try {
      s.sel = select_k(g, c.k_min, c.k_max, c.beta, seeds);
      s.fuzzy = fuzzy_partition(g, s.sel->k, c.beta, seeds.front());
      s.representative = stable_article_filter(g, *s.fuzzy, *corpus.at(g.week_end()), c.stability_threshold);
    } catch (const Error& e) {
      s.error = e.what();
    }
  });

  StageOutput out;
  std::string parts = csv_line({"week_end", "node", "louvain", "fuzzy", "stability"});
  std::string curve = csv_line(kQCurveCsvHeader);
  std::string summary = csv_line({"week_end", "louvain_k", "louvain_q", "fuzzy_k", "fuzzy_q", "ari"});
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& g = *gs[i];
    const auto& s = slots[i];
    std::string w = g.week_end().str();
    if (!s.fuzzy) out.diagnostics.push_back("week " + w + " has no fuzzy partition: " + s.error);
    for (std::size_t v = 0; v < g.size(); ++v) {
      std::string stab;
      if (s.fuzzy) stab = std::isinf(s.fuzzy->stability[v]) ? "inf" : fmt_num(s.fuzzy->stability[v]);
      parts += csv_line({w, g.nodes()[v], std::to_string(s.louvain.labels[v]),
                         s.fuzzy ? std::to_string(s.fuzzy->strict.labels[v]) : "", stab});
    }
    if (!s.fuzzy) {
      summary += csv_line({w, std::to_string(s.louvain.count()), fmt_num(s.louvain.modularity), "", "", ""});
      continue;
    }
    curve += q_curve_csv_rows(g.week_end(), *s.sel);
    double ari = adjusted_rand_index(s.louvain.labels, s.fuzzy->strict.labels);
    summary += csv_line({w, std::to_string(s.louvain.count()), fmt_num(s.louvain.modularity),
                         std::to_string(s.sel->k), fmt_num(s.fuzzy->strict.modularity), fmt_num(ari)});

    nlohmann::json comms = nlohmann::json::array();
    auto members = s.fuzzy->strict.members();
    for (std::size_t ci = 0; ci < members.size(); ++ci) {
      nlohmann::json nodes = nlohmann::json::array();
      for (int v : members[ci]) {
        double st = s.fuzzy->stability[static_cast<std::size_t>(v)];
        nodes.push_back({{"node", g.label(v)}, {"stability", std::isinf(st) ? nlohmann::json("inf") : nlohmann::json(st)}});
      }
      std::vector<std::string> ids;
      for (const auto& a : s.representative[ci]) ids.push_back(a.article_id);
      comms.push_back({{"id", ci}, {"members", nodes}, {"representative_articles", ids}});
    }
    nlohmann::json wj{{"week_end", w},
                      {"k", s.sel->k},
                      {"beta", c.beta},
                      {"modularity", s.fuzzy->strict.modularity},
                      {"louvain_communities", s.louvain.count()},
                      {"louvain_modularity", s.louvain.modularity},
                      {"ari", ari},
                      {"communities", comms}};
    out.files["weeks/" + w + ".json"] = wj.dump(2) + "\n";
  }
  out.files["partitions.csv"] = parts;
  out.files["q_curve.csv"] = curve;
  out.files["summary.csv"] = summary;
  return out;
}

/// Fuzzy strict communities per week, read back from partitions.csv.
inline std::vector<WeekCommunities> load_communities(const PipelineConfig& c) {
  auto t = artifacts::table(c, "communities", "partitions.csv");
  auto wc = t.column("week_end"), nc = t.column("node"), fc = t.column("fuzzy");
  std::map<Date, std::map<int, NodeSet>> acc;
  for (const auto& r : t.rows) {
    if (r.at(fc).empty()) continue;
    acc[Date::parse(r.at(wc))][static_cast<int>(parse_long(r.at(fc)))].push_back(r.at(nc));
  }
  std::vector<WeekCommunities> out;
  for (auto& [d, m] : acc) {
    WeekCommunities w{d, {}};
    for (auto& [id, set] : m) {
      if (id != static_cast<int>(w.communities.size())) throw Error("non-contiguous community ids in week " + d.str());
      std::sort(set.begin(), set.end());
      w.communities.push_back(std::move(set));
    }
    out.push_back(std::move(w));
  }
  return out;
}

inline StageOutput narratives(const PipelineConfig& c) {
  auto weeks = load_communities(c);
  auto links = link_weeks(weeks);
  auto chains = all_chains(weeks, links);
  StageOutput out;
  out.files["chains.csv"] = chains_csv(chains);
  out.files["chains.json"] = chains_json(chains).dump(2) + "\n";
  for (const auto& l : links) out.files["jaccard/" + l.matrix.week_from.str() + ".csv"] = jaccard_csv(l.matrix);
  return out;
}

inline StageOutput embed(const PipelineConfig& c) {
  auto graphs = artifacts::graphs(c);
  std::vector<const WeeklyGraph*> gs;
  for (const auto& [d, g] : graphs) gs.push_back(&g);
  std::vector<NodeEmbedding> emb(gs.size());
  parallel_for(gs.size(), [&](std::size_t i) {
    WalkConfig w = c.walk;
    w.seed = derive_seed(c.seed, "node2vec-" + gs[i]->week_end().str());
    emb[i] = node2vec(*gs[i], w);
  });
  StageOutput out;
  std::string entropy = csv_line({"week_end", "n2v_entropy", "final_loss"});
  for (const auto& e : emb) {
    std::string w = e.week_end.str();
    out.files["vectors/" + w + ".csv"] = embedding_csv_header(c.walk.dims) + embedding_csv_rows(e);
    entropy += csv_line({w, fmt_num(n2v_entropy(e)), e.epoch_loss.empty() ? "" : fmt_num(e.epoch_loss.back())});
  }
  out.files["entropy.csv"] = entropy;
  return out;
}

inline StageOutput market(const PipelineConfig& c) {
  std::map<std::string, std::vector<ZPoint>> z;
  std::string zcsv = csv_line({"index", "week_end", "z", "error"});
  for (const auto& n : kIndexNames) {
    auto s = load_index_csv(c.indices.at(n), n);
    z[n] = zscore(s);
    for (const auto& p : z[n]) zcsv += csv_line({n, p.week_end.str(), p.z ? fmt_num(*p.z) : "", p.error});
  }
  Diagnostics diag;
  auto labels = label_dislocations(build_panel(z, diag), c.dislocation_threshold);
  StageOutput out;
  out.files["zscores.csv"] = zcsv;
  out.files["labels.csv"] = labels_csv(labels);
  out.diagnostics = diag.messages;
  return out;
}

inline std::vector<NetworkFeatures> load_network_features(const PipelineConfig& c, Diagnostics& diag) {
  auto weeks = artifacts::weeks(c);
  auto gsum = artifacts::table(c, "graph", "summary.csv");
  auto csum = artifacts::table(c, "centrality", "summary.csv");
  auto msum = artifacts::table(c, "communities", "summary.csv");
  auto ent = artifacts::table(c, "embed", "entropy.csv");
  auto giant = artifacts::column(gsum, "giant_ratio"), clust = artifacts::column(gsum, "clust_coeff");
  auto eig1 = artifacts::column(csum, "eig_first"), eigr = artifacts::column(csum, "eig_ratio");
  auto comm = artifacts::column(msum, "fuzzy_k"), n2v = artifacts::column(ent, "n2v_entropy");
  std::vector<NetworkFeatures> out;
  for (const auto& w : weeks) {
    Date d = w.week_end;
    auto have = [&](const std::map<Date, std::string>& m) { return m.count(d) && !m.at(d).empty(); };
    if (!have(giant) || !have(eig1) || !have(comm) || !have(n2v)) {
      if (!(d < c.start_date)) diag.warn("week " + d.str() + " dropped: incomplete network artifacts");
      continue;
    }
    auto st = news_sentiment(w);
    NetworkFeatures f;
    f.week_end = d;
    f.avg_sent = st.mean;
    f.std_sent = st.std;
    f.giant_ratio = parse_double(giant.at(d));
    f.clust_coeff = parse_double(clust.at(d));
    f.eig_first = parse_double(eig1.at(d));
    if (have(eigr)) f.eig_ratio = parse_double(eigr.at(d));
    f.comm = static_cast<int>(parse_long(comm.at(d)));
    f.n2v_entropy = parse_double(n2v.at(d));
    out.push_back(f);
  }
  return out;
}

inline StageOutput features(const PipelineConfig& c) {
  Diagnostics diag;
  auto net = load_network_features(c, diag);
  auto labels = parse_labels_csv(artifacts::table(c, "market", "labels.csv"));
  auto fm = assemble_features(net, labels, c.start_date, diag);
  StageOutput out;
  out.files["network.csv"] = network_features_csv(net);
  out.files["features.csv"] = features_csv(fm);
  Eigen::MatrixXd x = fm.design(kFeatureNames);
  try {
    auto st = Standardizer::fit(x, kFeatureNames);
    FeatureMatrix z = fm;
    Eigen::MatrixXd xs = st.apply(x);
    for (std::size_t r = 0; r < z.rows.size(); ++r)
      for (std::size_t j = 0; j < kFeatureNames.size(); ++j)
        z.rows[r].x[j] = xs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    out.files["standardized.csv"] = features_csv(z);
  } catch (const Error& e) {
    diag.warn(std::string("no standardized matrix: ") + e.what());
  }
  if (fm.rows.size() >= 3) out.files["correlation.csv"] = correlation_csv(correlation_matrix(x), kFeatureNames);
  out.diagnostics = diag.messages;
  return out;
}

inline StageOutput regress(const PipelineConfig& c) {
  auto fm = parse_features_csv(artifacts::table(c, "features", "features.csv"));
  std::vector<Experiment> exps;
  for (const auto& e : c.experiments) exps.push_back(e == "predictive" ? predictive_experiment() : contemporaneous_experiment());
  std::vector<ExperimentResult> res(exps.size());
  parallel_for(exps.size(), [&](std::size_t i) { res[i] = run_experiment(fm, exps[i], c.alpha, c.seed, c.smote_k); });
  StageOutput out;
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : res) {
    auto j = to_json(r);
    out.files[r.experiment.name + ".json"] = j.dump(2) + "\n";
    if (!r.error.empty()) out.diagnostics.push_back(r.experiment.name + " model failed: " + r.error);
    all.push_back(j);
  }
  out.files["report.json"] = nlohmann::json{{"alpha", c.alpha}, {"models", all}}.dump(2) + "\n";
  return out;
}

inline std::vector<CentralityReport> load_centrality(const PipelineConfig& c, const std::map<Date, WeeklyGraph>& graphs) {
  auto t = artifacts::table(c, "centrality", "centrality.csv");
  std::map<Date, CentralityReport> acc;
  for (const auto& r : t.rows) {
    Date d = Date::parse(r.at(0));
    auto& rep = acc[d];
    rep.week_end = d;
    rep.nodes.push_back(r.at(1));
    rep.degree.push_back(parse_double(r.at(2)));
    rep.eigenvector.push_back(parse_double(r.at(3)));
  }
  std::vector<CentralityReport> out;
  for (auto& [d, rep] : acc) {
    const auto& g = graphs.at(d);
    rep.sentiment = g.sentiment();
    rep.top3_by_degree = top_nodes(g, rep.degree, 3);
    rep.top3_by_eigenvector = top_nodes(g, rep.eigenvector, 3);
    out.push_back(std::move(rep));
  }
  return out;
}

inline StageOutput report(const PipelineConfig& c) {
  auto graphs = artifacts::graphs(c);
  auto weeks = artifacts::weeks(c);
  StageOutput out;

  out.files["timeline.csv"] = timeline_csv(top_entities_timeline(load_centrality(c, graphs), c.min_appearances));

  auto net_t = artifacts::table(c, "features", "network.csv");
  auto lab_t = artifacts::table(c, "market", "labels.csv");
  std::vector<ScalarSeries> series;
  auto add = [&](const CsvTable& t, const std::string& col, const std::string& name) {
    ScalarSeries s{name, {}};
    for (const auto& [d, v] : artifacts::column(t, col))
      if (!v.empty()) s.values[d] = parse_double(v);
    series.push_back(std::move(s));
  };
  for (const char* col : {"N-avgSent", "N-stdSent", "giantRatio", "clustCoeff", "eigFirst", "eigRatio", "comm", "n2v-entropy"})
    add(net_t, col, col);
  add(lab_t, "z_mean", "z_mean");
  add(lab_t, "label", "label");
  out.files["series.csv"] = series_csv(series);
  out.files["q_curve.csv"] = read_file(artifacts::stage_dir(c, "communities") / "q_curve.csv");
  out.files["dislocations.csv"] = read_file(artifacts::stage_dir(c, "market") / "labels.csv");

  std::map<std::string, const ArticleRecord*> by_id;
  for (const auto& w : weeks)
    for (const auto& a : w.articles) by_id[a.article_id] = &a;

  nlohmann::json topics = nlohmann::json::array();
  for (const auto& [d, g] : graphs) {
    std::string w = d.str();
    fs::path vec = artifacts::stage_dir(c, "embed") / "vectors" / (w + ".csv");
    if (fs::exists(vec)) {
      auto t = read_csv(vec);
      if (t.rows.size() >= 3) {
        // columns: week, node, v1..vd
        Eigen::MatrixXd x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size() - 2));
        std::vector<std::string> labels;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          labels.push_back(t.rows[r].at(1));
          for (std::size_t j = 2; j < t.header.size(); ++j)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j - 2)) = parse_double(t.rows[r].at(j));
        }
        try {
          out.files["pca/" + w + ".csv"] = pca_csv(labels, pca_coordinates(x));
        } catch (const Error& e) {
          out.diagnostics.push_back("week " + w + " has no PCA: " + e.what());
        }
      }
    }
    fs::path cj = artifacts::stage_dir(c, "communities") / "weeks" / (w + ".json");
    if (!fs::exists(cj)) continue;
    auto wj = nlohmann::json::parse(read_file(cj));
    nlohmann::json comms = nlohmann::json::array();
    for (const auto& cm : wj["communities"]) {
      std::vector<ArticleRecord> arts;
      for (const auto& id : cm["representative_articles"]) arts.push_back(*by_id.at(id.get<std::string>()));
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : term_frequencies(arts)) terms.push_back({{"term", t.term}, {"count", t.count}});
      std::vector<std::string> members;
      for (const auto& m : cm["members"]) members.push_back(m["node"].get<std::string>());
      comms.push_back({{"id", cm["id"]},
                       {"members", members},
                       {"representative_articles", cm["representative_articles"]},
                       {"terms", terms}});
    }
    topics.push_back({{"week_end", w}, {"k", wj["k"]}, {"modularity", wj["modularity"]}, {"communities", comms}});
  }

  auto fm = parse_features_csv(artifacts::table(c, "features", "features.csv"));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : fm.rows) {
    nlohmann::json row{{"week_end", r.week_end.str()}, {"label", r.label}};
    for (std::size_t j = 0; j < kFeatureNames.size(); ++j) row[kFeatureNames[j]] = r.x[j];
    row["label_next"] = r.label_next ? nlohmann::json(*r.label_next) : nlohmann::json(nullptr);
    rows.push_back(row);
  }
  nlohmann::json summary{
      {"seed", c.seed},
      {"weeks", topics},
      {"narratives", nlohmann::json::parse(read_file(artifacts::stage_dir(c, "narratives") / "chains.json"))},
      {"features", rows},
      {"regression", nlohmann::json::parse(read_file(artifacts::stage_dir(c, "regress") / "report.json"))}};
  out.files["summary.json"] = summary.dump(2) + "\n";
  return out;
}

}  // namespace stages

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct StageError : Error {
  std::string stage;
  StageError(std::string s, const std::string& what) : Error("stage '" + s + "' failed: " + what), stage(std::move(s)) {}
};

struct StageResult {
  std::string stage;
  bool skipped = false;  // artifacts were already up to date
  std::size_t files = 0;
  std::vector<std::string> diagnostics;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    order_ = stage_order(stage_dependencies());
  }

  const PipelineConfig& config() const { return cfg_; }
  const std::vector<std::string>& order() const { return order_; }

  /// Key of a stage given the current config and the upstream manifests on
  /// disk. Throws when an upstream stage has not been run.
  std::string stage_key(const std::string& stage) const {
    nlohmann::json j{{"stage", stage}, {"params", stages::parameters(stage, cfg_)}};
    for (const auto& dep : stage_dependencies().at(stage)) {
      auto m = read_manifest(artifacts::stage_dir(cfg_, dep));
      if (!m) throw Error("stage '" + stage + "' requires stage '" + dep + "'; run '" + dep + "' first");
      j["upstream"][dep] = m->key;
    }
    return content_hash(j.dump());
  }

  bool up_to_date(const std::string& stage) const {
    fs::path dir = artifacts::stage_dir(cfg_, stage);
    auto m = read_manifest(dir);
    return m && m->key == stage_key(stage) && artifacts_intact(dir, *m);
  }

  StageResult run_stage(const std::string& stage, bool force = false) {
    if (!is_stage(stage)) throw Error("unknown stage '" + stage + "'");
    try {
      std::string key = stage_key(stage);
      fs::path dir = artifacts::stage_dir(cfg_, stage);
      auto old = read_manifest(dir);
      if (old && old->key == key && artifacts_intact(dir, *old) && !force)
        return {stage, true, old->files.size(), old->diagnostics};
      if (old && old->key != key && !force)
        throw Error("artifacts in " + dir.string() +
                    " were produced with a different configuration; rerun with --force to replace them");
      StageOutput out = execute(stage);
      if (old)
        for (const auto& [name, h] : old->files)
          if (!out.files.count(name)) fs::remove(dir / name);
      Manifest m{stage, key, {}, out.diagnostics};
      for (const auto& [name, content] : out.files) {
        write_file_atomic(dir / name, content);
        m.files[name] = content_hash(content);
      }
      write_file_atomic(dir / "manifest.json", to_json(m).dump(2) + "\n");
      return {stage, false, m.files.size(), m.diagnostics};
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

  /// Runs every stage in dependency order, skipping up-to-date ones, then
  /// writes summary.json at the output root.
  std::vector<StageResult> run_all(bool force = false) {
    std::vector<StageResult> results;
    for (const auto& s : order_) results.push_back(run_stage(s, force));
    nlohmann::json stagesj = nlohmann::json::array();
    for (const auto& r : results) {
      auto m = read_manifest(artifacts::stage_dir(cfg_, r.stage));
      stagesj.push_back({{"stage", r.stage}, {"key", m->key}, {"files", m->files}, {"diagnostics", m->diagnostics}});
    }
    nlohmann::json cfgj = to_json(cfg_);
    cfgj.erase("output_dir");
    cfgj.erase("corpus");
    cfgj.erase("indices");
    write_file_atomic(cfg_.output_dir / "summary.json",
                      nlohmann::json{{"config", cfgj},
                                     {"stages", stagesj},
                                     {"report", "report/summary.json"}}
                              .dump(2) +
                          "\n");
    return results;
  }

 private:
  StageOutput execute(const std::string& s) const {
    if (s == "ingest") return stages::ingest(cfg_);
    if (s == "graph") return stages::graph(cfg_);
    if (s == "centrality") return stages::centrality(cfg_);
    if (s == "communities") return stages::communities(cfg_);
    if (s == "narratives") return stages::narratives(cfg_);
    if (s == "embed") return stages::embed(cfg_);
    if (s == "market") return stages::market(cfg_);
    if (s == "features") return stages::features(cfg_);
    if (s == "regress") return stages::regress(cfg_);
    return stages::report(cfg_);
  }

  PipelineConfig cfg_;
  std::vector<std::string> order_;
};

/// Hash of every file under dir, keyed by relative path.
inline std::map<std::string, std::string> tree_hashes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = content_hash(read_file(e.path()));
  return out;
}

}  // namespace newsnet

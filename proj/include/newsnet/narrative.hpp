#pragma once
// Narrative tracking: Jaccard links between consecutive weeks' communities,
// chains that follow them, and keyword-anchored community histories.

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsnet/community.hpp"
#include "newsnet/core.hpp"
#include "newsnet/graph.hpp"
#include "newsnet/ingest.hpp"

namespace newsnet {

using NodeSet = std::vector<std::string>;  // sorted, unique

struct WeekCommunities {
  Date week_end;
  std::vector<NodeSet> communities;  // indexed by community id
};

inline WeekCommunities week_communities(const WeeklyGraph& g, const Partition& p) {
  if (p.labels.size() != g.size()) throw Error("partition does not cover the graph's nodes");
  WeekCommunities wc;
  wc.week_end = g.week_end();
  wc.communities.resize(static_cast<std::size_t>(p.count()));
  for (std::size_t i = 0; i < g.size(); ++i)
    wc.communities[static_cast<std::size_t>(p.labels[i])].push_back(g.nodes()[i]);
  return wc;  // graph nodes are sorted, so each set is too
}

inline NodeSet intersection(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Plain Jaccard index; two empty sets count as identical.
inline double jaccard(const NodeSet& a, const NodeSet& b) {
  std::size_t inter = intersection(a, b).size();
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct JaccardMatrix {
  Date week_from, week_to;
  std::vector<std::vector<double>> values;  // rows: week_from communities

  std::size_t rows() const { return values.size(); }
  std::size_t cols() const { return values.empty() ? 0 : values[0].size(); }
};

/// Jaccard between every pair of communities, zeroed where the overlap is
/// a single node or none.
inline JaccardMatrix jaccard_matrix(const WeekCommunities& a, const WeekCommunities& b) {
  JaccardMatrix m{a.week_end, b.week_end, {}};
  m.values.assign(a.communities.size(), std::vector<double>(b.communities.size(), 0.0));
  for (std::size_t i = 0; i < a.communities.size(); ++i)
    for (std::size_t j = 0; j < b.communities.size(); ++j)
      if (intersection(a.communities[i], b.communities[j]).size() > 1)
        m.values[i][j] = jaccard(a.communities[i], b.communities[j]);
  return m;
}

using Matching = std::map<int, int>;

/// (i, j) is matched when the entry is positive and the unique maximum of
/// both its row and its column. Ties leave the row or column unmatched.
inline Matching match_communities(const JaccardMatrix& m) {
  Matching out;
  auto unique_max = [](const std::vector<double>& xs) -> std::optional<std::size_t> {
    if (xs.empty()) return std::nullopt;
    auto it = std::max_element(xs.begin(), xs.end());
    if (*it <= 0.0 || std::count(xs.begin(), xs.end(), *it) > 1) return std::nullopt;
    return static_cast<std::size_t>(it - xs.begin());
  };
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto j = unique_max(m.values[i]);
    if (!j) continue;
    std::vector<double> col(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m.values[r][*j];
    auto ri = unique_max(col);
    if (ri && *ri == i) out[static_cast<int>(i)] = static_cast<int>(*j);
  }
  return out;
}

struct WeekLink {
  JaccardMatrix matrix;
  Matching matching;  // empty when the two weeks are not seven days apart
};

/// Links between each pair of consecutive weeks in the series.
inline std::vector<WeekLink> link_weeks(const std::vector<WeekCommunities>& weeks) {
  std::vector<WeekLink> out;
  for (std::size_t t = 1; t < weeks.size(); ++t) {
    WeekLink l{jaccard_matrix(weeks[t - 1], weeks[t]), {}};
    if (days_between(weeks[t - 1].week_end, weeks[t].week_end) == 7) l.matching = match_communities(l.matrix);
    out.push_back(std::move(l));
  }
  return out;
}

struct ChainLink {
  Date week;
  int community = 0;
  NodeSet overlap;  // with the previous link's community
};

struct NarrativeChain {
  Date start_week;
  int start_community = 0;
  std::vector<ChainLink> links;  // hops after the start
  std::optional<Date> broken_at;

  /// Weeks covered, counting the start.
  std::size_t length() const { return 1 + links.size(); }
};

inline NarrativeChain build_chain(const std::vector<WeekCommunities>& weeks, const std::vector<WeekLink>& links,
                                  Date start_week, int start_community) {
  if (links.size() + 1 != weeks.size() && !(weeks.empty() && links.empty()))
    throw Error("week links do not match the week series");
  auto it = std::find_if(weeks.begin(), weeks.end(), [&](const auto& w) { return w.week_end == start_week; });
  if (it == weeks.end()) throw Error("no communities for week " + start_week.str());
  if (start_community < 0 || static_cast<std::size_t>(start_community) >= it->communities.size())
    throw Error("unknown community " + std::to_string(start_community) + " in week " + start_week.str());
  NarrativeChain chain{start_week, start_community, {}, std::nullopt};
  int current = start_community;
  for (auto t = static_cast<std::size_t>(it - weeks.begin()); t + 1 < weeks.size(); ++t) {
    auto m = links[t].matching.find(current);
    if (m == links[t].matching.end()) {
      chain.broken_at = weeks[t + 1].week_end;
      break;
    }
    chain.links.push_back({weeks[t + 1].week_end, m->second,
                           intersection(weeks[t].communities[static_cast<std::size_t>(current)],
                                        weeks[t + 1].communities[static_cast<std::size_t>(m->second)])});
    current = m->second;
  }
  return chain;
}

/// Every maximal chain: one per community that is not the target of a match
/// from the previous week.
inline std::vector<NarrativeChain> all_chains(const std::vector<WeekCommunities>& weeks,
                                              const std::vector<WeekLink>& links) {
  std::vector<NarrativeChain> out;
  for (std::size_t t = 0; t < weeks.size(); ++t) {
    std::set<int> continued;
    if (t > 0)
      for (const auto& [from, to] : links[t - 1].matching) continued.insert(to);
    for (std::size_t c = 0; c < weeks[t].communities.size(); ++c)
      if (!continued.count(static_cast<int>(c)))
        out.push_back(build_chain(weeks, links, weeks[t].week_end, static_cast<int>(c)));
  }
  return out;
}

struct KeywordHit {
  Date week;
  int community = 0;
  NodeSet members;
};

inline std::vector<KeywordHit> track_keyword(std::string_view keyword, const std::vector<WeekCommunities>& weeks) {
  std::string key = normalize_entity(keyword);
  std::vector<KeywordHit> out;
  for (const auto& w : weeks)
    for (std::size_t c = 0; c < w.communities.size(); ++c)
      if (std::binary_search(w.communities[c].begin(), w.communities[c].end(), key)) {
        out.push_back({w.week_end, static_cast<int>(c), w.communities[c]});
        break;
      }
  return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline const CsvRow kChainCsvHeader = {"start_week", "week", "community", "overlap_nodes"};

/// One row for the start (empty overlap) and one per hop; overlap nodes are
/// joined with ';'.
inline std::string chains_csv(const std::vector<NarrativeChain>& chains) {
  std::string out = csv_line(kChainCsvHeader);
  for (const auto& ch : chains) {
    out += csv_line({ch.start_week.str(), ch.start_week.str(), std::to_string(ch.start_community), ""});
    for (const auto& l : ch.links) {
      std::string nodes;
      for (const auto& n : l.overlap) nodes += (nodes.empty() ? "" : ";") + n;
      out += csv_line({ch.start_week.str(), l.week.str(), std::to_string(l.community), nodes});
    }
  }
  return out;
}

inline std::string jaccard_csv(const JaccardMatrix& m) {
  CsvRow header{"community"};
  for (std::size_t j = 0; j < m.cols(); ++j) header.push_back(m.week_to.str() + "#" + std::to_string(j));
  std::string out = csv_line(header);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CsvRow row{m.week_from.str() + "#" + std::to_string(i)};
    for (double v : m.values[i]) row.push_back(fmt_num(v));
    out += csv_line(row);
  }
  return out;
}

inline nlohmann::json keyword_json(std::string_view keyword, const std::vector<KeywordHit>& hits) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& h : hits) arr.push_back({{"week_end", h.week.str()}, {"community", h.community}, {"members", h.members}});
  return {{"keyword", normalize_entity(keyword)}, {"weeks", arr}};
}

inline nlohmann::json chains_json(const std::vector<NarrativeChain>& chains) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& ch : chains) {
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : ch.links) links.push_back({{"week_end", l.week.str()}, {"community", l.community}, {"overlap", l.overlap}});
    arr.push_back({{"start_week", ch.start_week.str()},
                   {"start_community", ch.start_community},
                   {"length", ch.length()},
                   {"links", links},
                   {"broken_at", ch.broken_at ? nlohmann::json(ch.broken_at->str()) : nlohmann::json(nullptr)}});
  }
  return arr;
}

}  // namespace newsnet

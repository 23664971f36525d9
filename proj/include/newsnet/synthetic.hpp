#pragma once
// Generators for planted-structure graphs and synthetic corpora.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "newsnet/core.hpp"
#include "newsnet/graph.hpp"
#include "newsnet/ingest.hpp"
#include "newsnet/market.hpp"

namespace newsnet {

struct PlantedGraph {
  WeeklyGraph graph;
  std::vector<int> blocks;  // node-aligned planted labels
};

/// Stochastic block model with unit edge weights. Node labels are "b<block>_<i>"
/// so node order groups by block. Isolated nodes are kept.
inline PlantedGraph sbm_graph(const std::vector<int>& sizes, double p_in, double p_out, std::uint64_t seed,
                              Date week = Date(2021, 1, 3)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> names;
  std::vector<int> block_of;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (int i = 0; i < sizes[b]; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "b%zu_%03d", b, i);
      names.emplace_back(buf);
      block_of.push_back(static_cast<int>(b));
    }
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (u(rng) < (block_of[i] == block_of[j] ? p_in : p_out)) edges.emplace_back(names[i], names[j], 1.0);
  PlantedGraph pg{WeeklyGraph::from_edges(edges, names, week), {}};
  pg.blocks.resize(names.size());
  for (std::size_t i = 0; i < names.size(); ++i)
    pg.blocks[static_cast<std::size_t>(pg.graph.index_of(names[i]))] = block_of[i];
  return pg;
}

// ---------------------------------------------------------------------------
// Corpora
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::string> kTopicWords = {
    "inflation", "rates",   "energy",  "supply",   "banks",   "equity",  "bonds",  "growth",
    "labour",    "housing", "tariffs", "currency", "credit",  "default", "vaccine", "lockdown",
    "earnings",  "crypto",  "shipping", "commodity", "deficit", "stimulus", "yields", "liquidity"};

inline std::string topic_summary(const std::string& topic, int salt, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> w(0, kTopicWords.size() - 1);
  std::string s = "Coverage of " + topic + " " + std::to_string(salt) + " mentions";
  for (int i = 0; i < 4; ++i) s += " " + kTopicWords[w(rng)];
  return s + " and " + topic + ".";
}

}  // namespace detail

/// Articles that make `members` a clique in the thresholded graph: every
/// member leads (rank 1) articles listing the others at ranks 2..5, so each
/// pair gets weight at least 1/5.
inline std::vector<ArticleRecord> clique_articles(const std::vector<std::string>& members, Date week,
                                                  const std::string& id_prefix, double sentiment_mean,
                                                  std::mt19937_64& rng) {
  std::normal_distribution<double> sent(sentiment_mean, 0.2);
  auto draw = [&] { return std::clamp(sent(rng), -1.0, 1.0); };
  std::vector<ArticleRecord> out;
  for (std::size_t lead = 0; lead < members.size(); ++lead) {
    std::vector<std::string> others;
    for (std::size_t j = 1; j < members.size(); ++j) others.push_back(members[(lead + j) % members.size()]);
    for (std::size_t start = 0; start < others.size(); start += 4) {
      ArticleRecord a;
      a.article_id = id_prefix + "-" + std::to_string(lead) + "-" + std::to_string(start / 4);
      a.week_end = week;
      a.entities.push_back({members[lead], 1, draw()});
      for (std::size_t j = start; j < std::min(start + 4, others.size()); ++j)
        a.entities.push_back({others[j], static_cast<int>(j - start) + 2, draw()});
      a.overall_sentiment = draw();
      a.summary = detail::topic_summary(id_prefix, static_cast<int>(lead), rng);
      out.push_back(std::move(a));
    }
  }
  return out;
}

/// A single article joining two communities through their leaders.
inline ArticleRecord bridge_article(const std::string& a, const std::string& b, Date week, const std::string& id) {
  ArticleRecord r;
  r.article_id = id;
  r.week_end = week;
  r.entities = {{a, 1, 0.0}, {b, 2, 0.0}};
  r.summary = "Links between " + a + " and " + b + ".";
  return r;
}

struct DriftingCorpus {
  std::vector<ArticleRecord> articles;
  std::vector<Date> weeks;
  std::vector<std::vector<std::string>> drifting;  // per week, sorted
};

/// `weeks` weeks with one community of `size` nodes that loses its oldest
/// node and gains a new one every week, next to two stable 8-node
/// communities. Communities are chained by single bridge edges.
inline DriftingCorpus drifting_corpus(int weeks = 6, int size = 10, std::uint64_t seed = 1,
                                      Date first_week = Date(2021, 3, 7)) {
  std::mt19937_64 rng(seed);
  DriftingCorpus dc;
  auto name = [](const char* p, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02d", p, i);
    return std::string(buf);
  };
  std::vector<std::string> stable_b, stable_c;
  for (int i = 0; i < 8; ++i) {
    stable_b.push_back(name("bank", i));
    stable_c.push_back(name("crop", i));
  }
  for (int w = 0; w < weeks; ++w) {
    Date week = first_week.plus_weeks(w);
    std::vector<std::string> drift;
    for (int i = w; i < w + size; ++i) drift.push_back(name("drift", i));
    std::string tag = week.str();
    for (auto& a : clique_articles(drift, week, "drift-" + tag, -0.2, rng)) dc.articles.push_back(std::move(a));
    for (auto& a : clique_articles(stable_b, week, "bank-" + tag, 0.1, rng)) dc.articles.push_back(std::move(a));
    for (auto& a : clique_articles(stable_c, week, "crop-" + tag, 0.3, rng)) dc.articles.push_back(std::move(a));
    dc.articles.push_back(bridge_article(drift.back(), stable_b[0], week, "bridge-ab-" + tag));
    dc.articles.push_back(bridge_article(stable_b[4], stable_c[0], week, "bridge-bc-" + tag));
    dc.weeks.push_back(week);
    std::sort(drift.begin(), drift.end());
    dc.drifting.push_back(drift);
  }
  return dc;
}

struct SyntheticFixture {
  std::vector<ArticleRecord> articles;
  std::map<std::string, IndexSeries> indices;
};

/// News for `weeks` weeks starting at first_week plus weekly index values
/// from 20 weeks earlier. Each week has three to five topical cliques of
/// 5 to 9 entities drawn from a shared pool, so membership overlaps across
/// weeks, plus a few noise articles. Index levels follow a mean-reverting
/// walk with joint spikes.
inline SyntheticFixture synthetic_fixture(int weeks = 8, std::uint64_t seed = 7, Date first_week = Date(2020, 6, 7)) {
  std::mt19937_64 rng(seed);
  SyntheticFixture fx;
  std::vector<std::string> pool;
  for (const auto& w : detail::kTopicWords) pool.push_back(w);
  for (const char* e : {"federal reserve", "ecb", "china", "opec", "treasury", "imf", "wall street", "brexit",
                        "oil", "gold", "dollar", "euro", "yen", "tesla", "apple", "amazon"})
    pool.emplace_back(e);

  std::uniform_int_distribution<int> n_topics(3, 5), topic_size(5, 9), noise_len(2, 4);
  std::uniform_real_distribution<double> mood(-0.5, 0.5);
  for (int w = 0; w < weeks; ++w) {
    Date week = first_week.plus_weeks(w);
    std::string tag = week.str();
    std::vector<std::string> shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::size_t next = 0;
    std::vector<std::string> leaders;
    int topics = n_topics(rng);
    for (int t = 0; t < topics && next + 5 <= shuffled.size(); ++t) {
      std::size_t sz = std::min<std::size_t>(static_cast<std::size_t>(topic_size(rng)), shuffled.size() - next);
      std::vector<std::string> members(shuffled.begin() + static_cast<long>(next),
                                       shuffled.begin() + static_cast<long>(next + sz));
      next += sz;
      for (auto& a : clique_articles(members, week, "t" + std::to_string(t) + "-" + tag, mood(rng), rng))
        fx.articles.push_back(std::move(a));
      leaders.push_back(members[0]);
    }
    for (std::size_t t = 1; t < leaders.size(); ++t)
      fx.articles.push_back(bridge_article(leaders[t - 1], leaders[t], week, "bridge-" + std::to_string(t) + "-" + tag));
    // Noise: led articles add random cross-topic edges, unled ones (ranks
    // from 2) only add nodes whose edges fall below the threshold.
    for (int k = 0; k < 8; ++k) {
      std::vector<std::string> ents = pool;
      std::shuffle(ents.begin(), ents.end(), rng);
      ArticleRecord a;
      a.article_id = "noise-" + std::to_string(k) + "-" + tag;
      a.week_end = week;
      int len = noise_len(rng), first_rank = k % 2 ? 2 : 1;
      for (int r = 0; r < len; ++r) a.entities.push_back({ents[static_cast<std::size_t>(r)], r + first_rank, mood(rng)});
      a.summary = detail::topic_summary("markets", k, rng);
      fx.articles.push_back(std::move(a));
    }
  }

  const int history = 20;
  Date start = first_week.plus_weeks(-history);
  std::normal_distribution<double> shock(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, double> level{{"VIX", 25.0}, {"VIXFX", 9.0}, {"MRI", 1.2}, {"MOVE", 70.0}};
  for (const auto& n : kIndexNames) fx.indices[n] = IndexSeries{n, {}};
  for (int w = 0; w < history + weeks + 1; ++w) {
    // every third news week is a planted joint spike
    bool spike = w >= history ? (w - history) % 3 == 2 : u(rng) < 0.15;
    for (const auto& n : kIndexNames) {
      double base = n == "VIX" ? 25.0 : n == "VIXFX" ? 9.0 : n == "MRI" ? 1.2 : 70.0;
      double& x = level[n];
      x += 0.4 * (base - x) + 0.05 * base * shock(rng) + (spike ? 0.25 * base : 0.0);
      fx.indices[n].observations.push_back({start.plus_weeks(w), x});
    }
  }
  return fx;
}

inline std::string corpus_jsonl(const std::vector<ArticleRecord>& articles) {
  std::string out;
  for (const auto& a : articles) out += to_json(a).dump() + "\n";
  return out;
}

inline std::string index_csv(const IndexSeries& s) {
  std::string out = csv_line({"week_end", "value"});
  for (const auto& o : s.observations) out += csv_line({o.week_end.str(), fmt_num(o.value)});
  return out;
}

}  // namespace newsnet

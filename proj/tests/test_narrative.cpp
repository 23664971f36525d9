#include <catch_amalgamated.hpp>

#include <random>

#include "newsnet/narrative.hpp"

using namespace newsnet;
using Catch::Matchers::WithinAbs;

namespace {

JaccardMatrix matrix(std::vector<std::vector<double>> v) { return {Date(2022, 1, 2), Date(2022, 1, 9), std::move(v)}; }

NodeSet nodes(std::initializer_list<const char*> xs) {
  NodeSet s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  return s;
}

WeekCommunities week(Date d, std::vector<NodeSet> cs) { return {d, std::move(cs)}; }

// Ten members named p<start>..p<start+9>: shifting by one replaces one node.
NodeSet drifting(int start) {
  NodeSet s;
  for (int i = start; i < start + 10; ++i) s.push_back("p" + std::to_string(100 + i));
  return s;
}

}  // namespace

TEST_CASE("jaccard basics", "[narrative]") {
  CHECK(jaccard(nodes({"a", "b"}), nodes({"a", "b"})) == 1.0);
  CHECK(jaccard(nodes({"a", "b"}), nodes({"c", "d"})) == 0.0);
  CHECK_THAT(jaccard(nodes({"a", "b", "c"}), nodes({"b", "c", "d"})), WithinAbs(0.5, 1e-15));

  auto m = jaccard_matrix(week(Date(2022, 1, 2), {nodes({"a", "b", "c"}), nodes({"x", "y"})}),
                          week(Date(2022, 1, 9), {nodes({"b", "c", "d"}), nodes({"y", "z"})}));
  CHECK_THAT(m.values[0][0], WithinAbs(0.5, 1e-15));
  CHECK(m.values[1][1] == 0.0);  // single shared node
  CHECK(m.values[0][1] == 0.0);
}

TEST_CASE("jaccard properties", "[narrative][property]") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 300; ++t) {
    NodeSet a, b;
    for (int i = 0; i < 8; ++i) {
      if (rng() % 2) a.push_back(std::string(1, char('a' + i)));
      if (rng() % 2) b.push_back(std::string(1, char('a' + i)));
    }
    double j = jaccard(a, b);
    CHECK(j == jaccard(b, a));
    CHECK(j >= 0.0);
    CHECK(j <= 1.0);
    CHECK((j == 1.0) == (a == b));
  }
}

TEST_CASE("match requires row and column maxima", "[narrative]") {
  CHECK(match_communities(matrix({{0.6, 0.1}, {0.2, 0.5}})) == Matching{{0, 0}, {1, 1}});
  CHECK(match_communities(matrix({{0.6, 0.7}, {0.2, 0.5}})) == Matching{{0, 1}});
  CHECK(match_communities(matrix({{0.0, 0.0}, {0.0, 0.0}})).empty());
  CHECK(match_communities(matrix({{0.4, 0.4}, {0.1, 0.2}})).empty());
  CHECK(match_communities(matrix({{0.4, 0.4}, {0.1, 0.5}})) == Matching{{1, 1}});
  CHECK(match_communities(matrix({{0.5}, {0.5}})).empty());
}

TEST_CASE("matching is injective", "[narrative][property]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    std::size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
    std::vector<std::vector<double>> v(r, std::vector<double>(c));
    for (auto& row : v)
      for (auto& x : row) x = rng() % 3 == 0 ? 0.0 : std::round(u(rng) * 10) / 10;
    auto m = match_communities(matrix(v));
    std::set<int> targets;
    for (auto [i, j] : m) {
      CHECK(targets.insert(j).second);
      CHECK(v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0.0);
    }
  }
}

TEST_CASE("chains follow matches until they break", "[narrative]") {
  Date d0(2022, 1, 2);
  std::vector<WeekCommunities> weeks{week(d0, {nodes({"a", "b", "c"}), nodes({"x", "y", "z"})}),
                                     week(d0.plus_weeks(1), {nodes({"x", "y", "w"}), nodes({"a", "b", "c", "d"})}),
                                     week(d0.plus_weeks(2), {nodes({"a", "b", "d"})})};
  auto links = link_weeks(weeks);
  auto c0 = build_chain(weeks, links, d0, 0);
  CHECK(c0.length() == 3);
  CHECK_FALSE(c0.broken_at);
  REQUIRE(c0.links.size() == 2);
  CHECK(c0.links[0].community == 1);
  CHECK(c0.links[0].overlap == nodes({"a", "b", "c"}));
  CHECK(c0.links[1].overlap == nodes({"a", "b", "d"}));

  auto c1 = build_chain(weeks, links, d0, 1);
  CHECK(c1.length() == 2);
  CHECK(c1.broken_at == d0.plus_weeks(2));

  std::vector<WeekCommunities> gap{weeks[0], week(d0.plus_weeks(1), {nodes({"q", "r"})}), weeks[2]};
  auto g = build_chain(gap, link_weeks(gap), d0, 0);
  CHECK(g.length() == 1);
  CHECK(g.broken_at == d0.plus_weeks(1));

  CHECK_THROWS_AS(build_chain(weeks, links, d0, 5), Error);
  CHECK_THROWS_AS(build_chain(weeks, links, Date(2000, 1, 2), 0), Error);
}

TEST_CASE("weeks more than seven days apart are not linked", "[narrative]") {
  Date d0(2021, 3, 7);
  std::vector<WeekCommunities> weeks{week(d0, {nodes({"a", "b", "c"})}), week(d0.plus_weeks(2), {nodes({"a", "b", "c"})})};
  auto links = link_weeks(weeks);
  CHECK(links[0].matrix.values[0][0] == 1.0);
  CHECK(links[0].matching.empty());
}

TEST_CASE("drifting community keeps one chain", "[narrative]") {
  Date d0(2022, 1, 2);
  std::vector<WeekCommunities> weeks;
  for (int w = 0; w < 6; ++w) weeks.push_back(week(d0.plus_weeks(w), {nodes({"s1", "s2", "s3"}), drifting(w)}));
  auto chains = all_chains(weeks, link_weeks(weeks));
  REQUIRE(chains.size() == 2);
  const auto& c = chains[1];
  CHECK(c.length() == 6);
  CHECK_FALSE(c.broken_at);
  for (const auto& l : c.links) CHECK(l.overlap.size() == 9);
  CHECK_THAT(jaccard(drifting(0), drifting(1)), WithinAbs(9.0 / 11.0, 1e-15));
}

TEST_CASE("keyword tracking", "[narrative]") {
  Date d0(2022, 1, 2);
  std::vector<WeekCommunities> weeks{week(d0, {nodes({"inflation", "recession"}), nodes({"covid"})}),
                                     week(d0.plus_weeks(1), {nodes({"covid", "vaccine"})}),
                                     week(d0.plus_weeks(2), {nodes({"fed"}), nodes({"inflation", "rates"})})};
  CHECK(track_keyword("ukraine", weeks).empty());
  auto hits = track_keyword(" Inflation ", weeks);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].week == d0);
  CHECK(std::count(hits[0].members.begin(), hits[0].members.end(), "recession") == 1);
  CHECK(hits[1].community == 1);
  auto j = keyword_json("Inflation", hits);
  CHECK(j["keyword"] == "inflation");
  CHECK(j["weeks"].size() == 2);
}

TEST_CASE("chain export", "[narrative]") {
  Date d0(2022, 1, 2);
  std::vector<WeekCommunities> weeks{week(d0, {nodes({"a", "b", "c"})}), week(d0.plus_weeks(1), {nodes({"a", "b"})})};
  auto chains = all_chains(weeks, link_weeks(weeks));
  CHECK(chains_csv(chains) ==
        "start_week,week,community,overlap_nodes\n2022-01-02,2022-01-02,0,\n2022-01-02,2022-01-09,0,a;b\n");
  auto m = jaccard_matrix(weeks[0], weeks[1]);
  CHECK(jaccard_csv(m) == "community,2022-01-09#0\n2022-01-02#0,0.6666666666666666\n");
}

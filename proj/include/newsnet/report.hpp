#pragma once
// Tabular outputs: centrality timelines, Q-vs-k curves, PCA coordinates,
// scalar weekly series and topic term frequencies.

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "newsnet/community.hpp"
#include "newsnet/core.hpp"
#include "newsnet/graph.hpp"
#include "newsnet/ingest.hpp"

namespace newsnet {

inline constexpr int kDefaultMinAppearances = 5;

// ---------------------------------------------------------------------------
// Centrality timelines
// ---------------------------------------------------------------------------

struct TimelinePoint {
  Date week_end;
  int rank = 0;  // 1..3 within the week
  std::string node;
  double value = 0.0;
  double sentiment = 0.0;
};

struct TimelineSeries {
  std::string metric;
  std::vector<TimelinePoint> points;  // weeks ascending, then rank
  std::vector<std::string> retained;  // entities with enough appearances, sorted
};

/// Weekly top-3 entities per centrality, keeping only entities that appear
/// in at least `min_appearances` weekly top-3 sets for that centrality.
inline std::vector<TimelineSeries> top_entities_timeline(std::vector<CentralityReport> reports,
                                                         int min_appearances = kDefaultMinAppearances) {
  std::sort(reports.begin(), reports.end(),
            [](const CentralityReport& a, const CentralityReport& b) { return a.week_end < b.week_end; });
  auto build = [&](const std::string& metric, auto top_of) {
    std::map<std::string, int> count;
    for (const auto& r : reports)
      for (const auto& t : top_of(r)) ++count[t.node];
    TimelineSeries s{metric, {}, {}};
    for (const auto& [node, c] : count)
      if (c >= min_appearances) s.retained.push_back(node);
    std::set<Date> seen;
    for (const auto& r : reports) {
      if (!seen.insert(r.week_end).second) continue;
      const auto& top = top_of(r);
      for (std::size_t i = 0; i < top.size(); ++i) {
        if (count[top[i].node] < min_appearances) continue;
        auto pos = std::find(r.nodes.begin(), r.nodes.end(), top[i].node) - r.nodes.begin();
        double sent = pos < static_cast<long>(r.sentiment.size()) ? r.sentiment[static_cast<std::size_t>(pos)] : 0.0;
        s.points.push_back({r.week_end, static_cast<int>(i) + 1, top[i].node, top[i].value, sent});
      }
    }
    return s;
  };
  return {build("degree", [](const CentralityReport& r) -> const std::vector<RankedNode>& { return r.top3_by_degree; }),
          build("eigenvector",
                [](const CentralityReport& r) -> const std::vector<RankedNode>& { return r.top3_by_eigenvector; })};
}

inline const CsvRow kTimelineCsvHeader = {"metric", "week_end", "rank", "node", "value", "sentiment"};

inline std::string timeline_csv(const std::vector<TimelineSeries>& series) {
  std::string out = csv_line(kTimelineCsvHeader);
  for (const auto& s : series)
    for (const auto& p : s.points)
      out += csv_line({s.metric, p.week_end.str(), std::to_string(p.rank), p.node, fmt_num(p.value), fmt_num(p.sentiment)});
  return out;
}

// ---------------------------------------------------------------------------
// Weekly scalar series and Q-vs-k curves
// ---------------------------------------------------------------------------

struct ScalarSeries {
  std::string name;
  std::map<Date, double> values;
};

/// Wide CSV: one row per week in the union of weeks, empty where a series
/// has no value.
inline std::string series_csv(const std::vector<ScalarSeries>& series) {
  CsvRow h{"week_end"};
  std::set<Date> weeks;
  for (const auto& s : series) {
    h.push_back(s.name);
    for (const auto& [d, v] : s.values) {
      if (!std::isfinite(v)) throw Error("nonfinite value in series " + s.name + " at " + d.str());
      weeks.insert(d);
    }
  }
  std::string out = csv_line(h);
  for (Date d : weeks) {
    CsvRow row{d.str()};
    for (const auto& s : series) {
      auto it = s.values.find(d);
      row.push_back(it == s.values.end() ? "" : fmt_num(it->second));
    }
    out += csv_line(row);
  }
  return out;
}

inline const CsvRow kQCurveCsvHeader = {"week_end", "seed", "k", "modularity", "knee"};

inline std::string q_curve_csv_rows(Date week, const SelectKResult& r) {
  std::string out;
  for (std::size_t s = 0; s < r.seeds.size(); ++s)
    for (std::size_t i = 0; i < r.ks.size(); ++i)
      out += csv_line({week.str(), std::to_string(r.seeds[s]), std::to_string(r.ks[i]), fmt_num(r.q[s][i]),
                       r.knees[s].k == r.ks[i] ? "1" : "0"});
  return out;
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct PcaResult {
  Eigen::MatrixXd coordinates;      // n x 2
  Eigen::Vector2d explained_ratio;  // per component
  Eigen::MatrixXd components;       // d x 2, unit columns
  Eigen::RowVectorXd mean;
};

/// Top-2 principal components of the rows of x. Each component's sign is
/// fixed so its largest-magnitude loading is positive.
inline PcaResult pca_coordinates(const Eigen::MatrixXd& x) {
  if (x.rows() < 3) throw Error("PCA needs at least three vectors");
  if (x.cols() < 1) throw Error("PCA needs at least one dimension");
  PcaResult r;
  r.mean = x.colwise().mean();
  Eigen::MatrixXd c = x.rowwise() - r.mean;
  Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  double total = ev.sum();
  if (!(total > 1e-12 * std::max(1.0, r.mean.cwiseAbs().maxCoeff())))
    throw Error("PCA input has no variance");
  r.components = Eigen::MatrixXd::Zero(x.cols(), 2);
  r.explained_ratio.setZero();
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(2, x.cols()); ++j) {
    Eigen::Index src = x.cols() - 1 - j;  // eigenvalues ascend
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index big;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0) v = -v;
    r.components.col(j) = v;
    r.explained_ratio(j) = ev(src) / total;
  }
  r.coordinates = c * r.components;
  return r;
}

/// Sum of squared residuals after projecting onto the top `r` components.
inline double pca_reconstruction_error(const Eigen::MatrixXd& x, int r) {
  Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c);
  r = std::clamp<int>(r, 0, static_cast<int>(x.cols()));
  Eigen::MatrixXd v = es.eigenvectors().rightCols(r);
  return (c - c * v * v.transpose()).squaredNorm();
}

inline std::string pca_csv(const std::vector<std::string>& labels, const PcaResult& p) {
  std::string out = "# explained_ratio " + fmt_num(p.explained_ratio(0)) + " " + fmt_num(p.explained_ratio(1)) + "\n";
  out += csv_line({"label", "pc1", "pc2"});
  for (Eigen::Index i = 0; i < p.coordinates.rows(); ++i)
    out += csv_line({labels.at(static_cast<std::size_t>(i)), fmt_num(p.coordinates(i, 0)), fmt_num(p.coordinates(i, 1))});
  return out;
}

// ---------------------------------------------------------------------------
// Topic terms
// ---------------------------------------------------------------------------

inline const std::set<std::string>& stopwords() {
  static const std::set<std::string> s = {
      "a",    "about", "after", "again", "all",   "also",  "an",    "and",   "are",  "as",   "at",   "be",
      "been", "but",   "by",    "can",   "could", "do",    "for",   "from",  "had",  "has",  "have", "he",
      "her",  "his",   "in",    "into",  "is",    "it",    "its",   "more",  "new",  "no",   "not",  "of",
      "on",   "or",    "over",  "said",  "she",   "so",    "than",  "that",  "the",  "their", "them", "there",
      "they", "this",  "to",    "up",    "was",   "we",    "were",  "which", "while", "who", "will", "with",
      "would"};
  return s;
}

/// Lowercased alphanumeric tokens of length >= 3 outside the stopword list.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 3 && !stopwords().count(cur)) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char ch : text) {
    if (std::isalnum(ch))
      cur += static_cast<char>(std::tolower(ch));
    else
      flush();
  }
  flush();
  return out;
}

struct TermCount {
  std::string term;
  int count = 0;
};

/// Most frequent summary terms, count descending then term ascending.
inline std::vector<TermCount> term_frequencies(const std::vector<ArticleRecord>& articles, std::size_t top_n = 20) {
  std::map<std::string, int> counts;
  for (const auto& a : articles)
    for (const auto& t : tokenize(a.summary)) ++counts[t];
  std::vector<TermCount> v;
  for (const auto& [t, c] : counts) v.push_back({t, c});
  std::stable_sort(v.begin(), v.end(), [](const TermCount& a, const TermCount& b) { return a.count > b.count; });
  if (v.size() > top_n) v.resize(top_n);
  return v;
}

}  // namespace newsnet

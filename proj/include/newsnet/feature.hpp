#pragma once
// Weekly feature matrix: network and news features joined with market
// z-scores and labels, plus standardisation and correlations.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsnet/core.hpp"
#include "newsnet/ingest.hpp"
#include "newsnet/market.hpp"

namespace newsnet {

inline const Date kDefaultStartDate(2020, 6, 1);

inline const std::vector<std::string> kFeatureNames = {"z-vols",    "z-volsD",  "N-avgSent", "N-stdSent",
                                                       "giantRatio", "clustCoeff", "eigFirst", "eigRatio",
                                                       "comm",       "n2v-entropy"};
inline const std::vector<std::string> kMarketFeatures = {"z-vols", "z-volsD"};

inline std::vector<std::string> non_market_features() {
  return {kFeatureNames.begin() + 2, kFeatureNames.end()};
}

/// Network and news features for one week, before joining with the market.
struct NetworkFeatures {
  Date week_end;
  double avg_sent = 0.0;
  double std_sent = 0.0;
  double giant_ratio = 0.0;
  double clust_coeff = 0.0;
  double eig_first = 0.0;
  std::optional<double> eig_ratio;
  int comm = 0;
  double n2v_entropy = 0.0;
};

struct SentimentStats {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Mean and population standard deviation of article sentiment.
inline SentimentStats news_sentiment(const WeeklyCorpus& week) {
  if (week.articles.empty()) throw Error("no articles in week " + week.week_end.str());
  double n = static_cast<double>(week.articles.size()), sum = 0.0, sq = 0.0;
  for (const auto& a : week.articles) sum += article_sentiment(a);
  double mean = sum / n;
  for (const auto& a : week.articles) sq += (article_sentiment(a) - mean) * (article_sentiment(a) - mean);
  return {mean, std::sqrt(sq / n)};
}

struct EigenSummary {
  double first = 0.0;
  std::optional<double> ratio;  // undefined with fewer than two positive values
};

inline EigenSummary eigen_summary(std::vector<double> values) {
  if (values.empty()) throw Error("no eigenvector centralities");
  std::sort(values.begin(), values.end(), std::greater<>());
  EigenSummary s{values[0], std::nullopt};
  if (values.size() >= 2 && values[1] > 0.0) s.ratio = values[0] / values[1];
  return s;
}

struct FeatureRow {
  Date week_end;
  std::array<double, 10> x{};  // kFeatureNames order
  int label = 0;
  std::optional<int> label_next;

  double get(std::string_view name) const {
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i)
      if (kFeatureNames[i] == name) return x[i];
    throw Error("unknown feature '" + std::string(name) + "'");
  }
};

struct FeatureMatrix {
  std::vector<FeatureRow> rows;

  /// Rows x selected feature columns.
  Eigen::MatrixXd design(const std::vector<std::string>& names) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < names.size(); ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].get(names[c]);
    return m;
  }

  Eigen::VectorXd labels(bool next) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (next && !rows[r].label_next) throw Error("row " + rows[r].week_end.str() + " has no next-week label");
      y(static_cast<Eigen::Index>(r)) = next ? *rows[r].label_next : rows[r].label;
    }
    return y;
  }

  /// Rows that have a next-week label.
  FeatureMatrix predictive() const {
    FeatureMatrix m;
    for (const auto& r : rows)
      if (r.label_next) m.rows.push_back(r);
    return m;
  }
};

/// Joins network features with market labels. Weeks before start are
/// skipped; weeks with undefined inputs are dropped with a diagnostic.
/// z-volsD needs the previous week's z mean; label_next is the following
/// week's label when defined.
inline FeatureMatrix assemble_features(const std::vector<NetworkFeatures>& network,
                                       const std::vector<DislocationLabel>& market, Date start, Diagnostics& diag) {
  std::map<Date, const DislocationLabel*> by_week;
  for (const auto& l : market) by_week[l.week_end] = &l;
  auto defined = [&](Date d) -> const DislocationLabel* {
    auto it = by_week.find(d);
    return it != by_week.end() && it->second->z_mean ? it->second : nullptr;
  };

  FeatureMatrix m;
  for (const auto& nf : network) {
    if (nf.week_end < start) continue;
    std::string why;
    const auto* cur = defined(nf.week_end);
    const auto* prev = defined(nf.week_end.plus_weeks(-1));
    if (!by_week.count(nf.week_end))
      why = "no market data";
    else if (!cur)
      why = "undefined z-score";
    else if (!prev)
      why = "no z-score for the previous week";
    else if (!nf.eig_ratio)
      why = "eigRatio undefined";
    if (!why.empty()) {
      diag.warn("week " + nf.week_end.str() + " dropped: " + why);
      continue;
    }
    FeatureRow r;
    r.week_end = nf.week_end;
    r.x = {*cur->z_mean,   *cur->z_mean - *prev->z_mean, nf.avg_sent, nf.std_sent,  nf.giant_ratio,
           nf.clust_coeff, nf.eig_first,                 *nf.eig_ratio, static_cast<double>(nf.comm), nf.n2v_entropy};
    bool finite = std::all_of(r.x.begin(), r.x.end(), [](double v) { return std::isfinite(v); });
    if (!finite) {
      diag.warn("week " + nf.week_end.str() + " dropped: nonfinite feature");
      continue;
    }
    r.label = cur->label;
    if (const auto* next = defined(nf.week_end.plus_weeks(1))) r.label_next = next->label;
    m.rows.push_back(r);
  }
  if (m.rows.empty()) throw Error("feature matrix is empty");
  return m;
}

// ---------------------------------------------------------------------------
// Standardisation
// ---------------------------------------------------------------------------

struct Standardizer {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // population

  static Standardizer fit(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    if (x.rows() < 2) throw Error("standardisation needs at least two rows");
    if (static_cast<std::size_t>(x.cols()) != names.size()) throw Error("feature names do not match columns");
    Standardizer s{names, x.colwise().mean(), Eigen::VectorXd(x.cols())};
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().mean());
      if (!(sd > 1e-12 * std::max(1.0, std::abs(s.mean(j)))))
        throw Error("feature '" + names[static_cast<std::size_t>(j)] + "' is constant");
      s.std(j) = sd;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
  }

  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const {
    return (z.array().rowwise() * std.transpose().array()).matrix().rowwise() + mean.transpose();
  }
};

/// Pearson correlations between columns.
inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x) {
  if (x.rows() < 3) throw Error("correlation needs at least three rows");
  Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  Eigen::VectorXd norms = c.colwise().norm();
  Eigen::MatrixXd r = (c.transpose() * c).array() / (norms * norms.transpose()).array();
  for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, i) = norms(i) > 0 ? 1.0 : r(i, i);
  return r;
}

inline std::string correlation_csv(const Eigen::MatrixXd& r, const std::vector<std::string>& names) {
  CsvRow h{"feature"};
  h.insert(h.end(), names.begin(), names.end());
  std::string out = csv_line(h);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    CsvRow row{names[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < r.cols(); ++j) row.push_back(fmt_num(r(i, j)));
    out += csv_line(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline CsvRow feature_csv_header() {
  CsvRow h{"week_end"};
  h.insert(h.end(), kFeatureNames.begin(), kFeatureNames.end());
  h.push_back("label");
  h.push_back("label_next");
  return h;
}

inline std::string features_csv(const FeatureMatrix& m) {
  std::string out = csv_line(feature_csv_header());
  for (const auto& r : m.rows) {
    CsvRow row{r.week_end.str()};
    for (double v : r.x) row.push_back(fmt_num(v));
    row.push_back(std::to_string(r.label));
    row.push_back(r.label_next ? std::to_string(*r.label_next) : "");
    out += csv_line(row);
  }
  return out;
}

inline FeatureMatrix parse_features_csv(const CsvTable& t) {
  if (t.header != feature_csv_header()) throw ParseError("unexpected feature CSV header");
  FeatureMatrix m;
  for (const auto& row : t.rows) {
    FeatureRow r;
    r.week_end = Date::parse(row[0]);
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) r.x[i] = parse_double(row[i + 1]);
    r.label = static_cast<int>(parse_long(row[11]));
    if (!row[12].empty()) r.label_next = static_cast<int>(parse_long(row[12]));
    m.rows.push_back(r);
  }
  return m;
}

inline const CsvRow kNetworkCsvHeader = {"week_end",   "N-avgSent", "N-stdSent", "giantRatio", "clustCoeff",
                                         "eigFirst",   "eigRatio",  "comm",      "n2v-entropy"};

inline std::string network_features_csv(const std::vector<NetworkFeatures>& v) {
  std::string out = csv_line(kNetworkCsvHeader);
  for (const auto& f : v)
    out += csv_line({f.week_end.str(), fmt_num(f.avg_sent), fmt_num(f.std_sent), fmt_num(f.giant_ratio),
                     fmt_num(f.clust_coeff), fmt_num(f.eig_first), f.eig_ratio ? fmt_num(*f.eig_ratio) : "",
                     std::to_string(f.comm), fmt_num(f.n2v_entropy)});
  return out;
}

}  // namespace newsnet

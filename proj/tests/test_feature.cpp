#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "newsnet/feature.hpp"

using namespace newsnet;
using Catch::Matchers::WithinAbs;

namespace {

const Date kWeek0(2020, 5, 31);

DislocationLabel market_week(Date d, std::optional<double> z_mean, int label) {
  DislocationLabel l;
  l.week_end = d;
  l.z_mean = z_mean;
  l.undefined = !z_mean;
  l.label = label;
  return l;
}

NetworkFeatures network_week(Date d, double seed) {
  NetworkFeatures f;
  f.week_end = d;
  f.avg_sent = 0.1 * seed;
  f.std_sent = 0.2 + 0.01 * seed;
  f.giant_ratio = 0.8;
  f.clust_coeff = 0.3 + 0.02 * seed;
  f.eig_first = 0.9;
  f.eig_ratio = 2.0;
  f.comm = 3;
  f.n2v_entropy = 1.0 + seed;
  return f;
}

}  // namespace

TEST_CASE("eigenvector summary", "[feature]") {
  auto s = eigen_summary({0.3, 0.9, 0.45, 0.1});
  CHECK(s.first == 0.9);
  CHECK_THAT(*s.ratio, WithinAbs(2.0, 1e-15));
  CHECK_FALSE(eigen_summary({1.0}).ratio);
  CHECK(*eigen_summary({0.5, 0.5}).ratio == 1.0);
}

TEST_CASE("news sentiment statistics", "[feature]") {
  WeeklyCorpus w;
  w.week_end = kWeek0;
  for (double s : {0.3, -0.3}) {
    ArticleRecord a;
    a.entities.push_back({"e", 1, s});
    w.articles.push_back(a);
  }
  auto st = news_sentiment(w);
  CHECK_THAT(st.mean, WithinAbs(0.0, 1e-15));
  CHECK_THAT(st.std, WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(news_sentiment(WeeklyCorpus{kWeek0, {}}), Error);
}

TEST_CASE("feature assembly joins weeks", "[feature]") {
  std::vector<NetworkFeatures> net;
  std::vector<DislocationLabel> mkt;
  for (int w = 0; w < 6; ++w) {
    net.push_back(network_week(kWeek0.plus_weeks(w), w));
    mkt.push_back(market_week(kWeek0.plus_weeks(w), 0.1 * w, w % 2));
  }
  mkt[3].z_mean.reset();
  net[4].eig_ratio.reset();
  Diagnostics diag;
  auto m = assemble_features(net, mkt, Date(2020, 6, 1), diag);
  // Week 0 precedes the start. Week 3 has no z mean and week 4 has neither a
  // previous z mean nor an eigRatio.
  std::vector<Date> weeks;
  for (const auto& r : m.rows) weeks.push_back(r.week_end);
  CHECK(weeks == std::vector<Date>{kWeek0.plus_weeks(1), kWeek0.plus_weeks(2), kWeek0.plus_weeks(5)});
  CHECK(diag.messages.size() == 2);

  const auto& r1 = m.rows[0];
  CHECK_THAT(r1.get("z-vols"), WithinAbs(0.1, 1e-15));
  CHECK_THAT(r1.get("z-volsD"), WithinAbs(0.1, 1e-15));
  CHECK(r1.get("eigRatio") == 2.0);
  CHECK(r1.get("comm") == 3.0);
  CHECK(r1.label == 1);
  CHECK(r1.label_next == 0);
  CHECK(m.rows[1].label_next == std::nullopt);  // next week has no z mean
  CHECK_FALSE(m.rows[2].label_next);            // final week
  CHECK(m.predictive().rows.size() == 1);
  CHECK_THROWS_AS(m.labels(true), Error);
}

TEST_CASE("z-volsD is the week-on-week change", "[feature]") {
  std::vector<NetworkFeatures> net{network_week(kWeek0.plus_weeks(2), 0)};
  std::vector<DislocationLabel> mkt{market_week(kWeek0.plus_weeks(1), 0.1, 0), market_week(kWeek0.plus_weeks(2), 0.3, 0)};
  Diagnostics diag;
  auto m = assemble_features(net, mkt, kDefaultStartDate, diag);
  CHECK_THAT(m.rows[0].get("z-volsD"), WithinAbs(0.2, 1e-15));
  CHECK_THROWS_AS(assemble_features(net, {}, kDefaultStartDate, diag), Error);
}

TEST_CASE("standardisation", "[feature]") {
  Eigen::MatrixXd x(2, 1);
  x << 1, 3;
  auto s = Standardizer::fit(x, {"a"});
  Eigen::MatrixXd z = s.apply(x);
  CHECK(z(0, 0) == -1.0);
  CHECK(z(1, 0) == 1.0);

  Eigen::MatrixXd c(3, 2);
  c << 1, 5, 2, 5, 3, 5;
  try {
    Standardizer::fit(c, {"varies", "flat"});
    FAIL("constant column accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("flat") != std::string::npos);
  }
  CHECK_THROWS_AS(Standardizer::fit(Eigen::MatrixXd::Ones(1, 1), {"a"}), Error);
}

TEST_CASE("standardisation round trip and idempotence", "[feature][property]") {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd(3.0, 5.0);
  for (int t = 0; t < 30; ++t) {
    Eigen::MatrixXd x(25, 6);
    for (auto& v : x.reshaped()) v = nd(rng);
    std::vector<std::string> names(6, "f");
    auto s = Standardizer::fit(x, names);
    Eigen::MatrixXd z = s.apply(x);
    CHECK(z.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
    for (Eigen::Index j = 0; j < z.cols(); ++j) CHECK_THAT(std::sqrt(z.col(j).array().square().mean()), WithinAbs(1.0, 1e-9));
    CHECK((s.invert(z) - x).cwiseAbs().maxCoeff() < 1e-9);
    auto again = Standardizer::fit(z, names);
    CHECK((again.apply(z) - z).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("correlation matrix", "[feature]") {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd x(200, 4);
  for (auto& v : x.reshaped()) v = nd(rng);
  x.col(1) = -x.col(0);
  auto r = correlation_matrix(x);
  CHECK_THAT(r(0, 0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(r(0, 1), WithinAbs(-1.0, 1e-12));
  CHECK(std::abs(r(2, 3)) < 0.2);
  CHECK(std::abs(r(0, 2)) < 0.2);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(correlation_matrix(x.topRows(2)), Error);
}

TEST_CASE("feature CSV layout", "[feature]") {
  CHECK(csv_line(feature_csv_header()) ==
        "week_end,z-vols,z-volsD,N-avgSent,N-stdSent,giantRatio,clustCoeff,eigFirst,eigRatio,comm,n2v-entropy,label,"
        "label_next\n");
  FeatureMatrix m;
  FeatureRow r;
  r.week_end = Date(2020, 6, 7);
  r.x = {0.5, 0.25, 0.1, 0.2, 1, 0.3, 0.9, 2, 4, 1.5};
  r.label = 1;
  m.rows.push_back(r);
  std::string csv = features_csv(m);
  CHECK(csv.substr(csv.find('\n') + 1) == "2020-06-07,0.5,0.25,0.1,0.2,1,0.3,0.9,2,4,1.5,1,\n");
  std::istringstream in(csv);
  auto back = parse_features_csv(parse_csv(in));
  CHECK(back.rows[0].x == r.x);
  CHECK_FALSE(back.rows[0].label_next);
}

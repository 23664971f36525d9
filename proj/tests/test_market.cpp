#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "newsnet/market.hpp"

using namespace newsnet;
using Catch::Matchers::WithinAbs;

namespace {

const Date kStart(2020, 1, 5);

IndexSeries series(const std::vector<double>& values, std::string name = "VIX") {
  IndexSeries s{std::move(name), {}};
  for (std::size_t i = 0; i < values.size(); ++i) s.observations.push_back({kStart.plus_weeks(static_cast<int>(i)), values[i]});
  return s;
}

PanelWeek panel_week(std::array<std::optional<double>, 4> z) {
  PanelWeek w{kStart, {}};
  for (std::size_t i = 0; i < 4; ++i) w.z[kIndexNames[i]] = {kStart, z[i], z[i] ? "" : "undefined"};
  return w;
}

int brute_label(const std::array<double, 4>& z, double threshold) {
  for (double v : z)
    if (!(v > 0)) return 0;
  return (z[0] + z[1] + z[2] + z[3]) / 4 > threshold ? 1 : 0;
}

}  // namespace

TEST_CASE("z-score hand computations", "[market]") {
  // Twelve alternating 9/11 values and a 10: mean 10, variance 12/13.
  std::vector<double> v;
  for (int i = 0; i < 12; ++i) v.push_back(i % 2 ? 11.0 : 9.0);
  v.push_back(10.0);
  v.push_back(12.0);
  auto z = zscore(series(v));
  REQUIRE(z.size() == 1);
  double mean = 10.0, var = 12.0 / 13.0;
  CHECK_THAT(*z[0].z, WithinAbs((12.0 - mean) / std::sqrt(var), 1e-12));

  // Window of 2: alternating 9, 11 gives mean 10 and sd 1 exactly.
  auto z2 = zscore(series({9, 11, 12, 10}), 2);
  REQUIRE(z2.size() == 2);
  CHECK_THAT(*z2[0].z, WithinAbs(2.0, 1e-15));
  CHECK_THAT(*z2[1].z, WithinAbs((10.0 - 11.5) / 0.5, 1e-15));

  std::vector<double> flat(13, 10.0);
  flat.push_back(12.0);
  auto zf = zscore(series(flat));
  REQUIRE(zf.size() == 1);
  CHECK_FALSE(zf[0].z);
  CHECK(zf[0].error.find("zero variance") != std::string::npos);

  std::vector<double> back(14, 0.0);
  for (int i = 0; i < 13; ++i) back[static_cast<std::size_t>(i)] = i % 2 ? 11.0 : 9.0;
  double m = 0;
  for (int i = 0; i < 13; ++i) m += back[static_cast<std::size_t>(i)];
  back[13] = m / 13;
  CHECK_THAT(*zscore(series(back))[0].z, WithinAbs(0.0, 1e-14));
}

TEST_CASE("z-score errors and gaps", "[market]") {
  CHECK_THROWS_AS(zscore(series(std::vector<double>(13, 1.0))), Error);
  auto s = series({1, 2, 3, 4, 5, 6});
  s.observations[4].week_end = s.observations[4].week_end.plus_weeks(1);
  s.observations[5].week_end = s.observations[5].week_end.plus_weeks(1);
  auto z = zscore(s, 3);
  REQUIRE(z.size() == 3);
  CHECK(z[0].z);
  CHECK_FALSE(z[1].z);
  CHECK(z[1].error.find("missing weeks") != std::string::npos);
  CHECK_FALSE(z[2].z);

  auto bad = series({1, 2, 3});
  bad.observations[2].week_end = bad.observations[1].week_end;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.observations[2].week_end = bad.observations[1].week_end.plus_days(3);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("z-score is shift and scale invariant", "[market][property]") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd(20.0, 4.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(40);
    for (auto& x : v) x = nd(rng);
    double shift = nd(rng), scale = 0.1 + std::abs(nd(rng));
    auto shifted = v, scaled = v;
    for (auto& x : shifted) x += shift;
    for (auto& x : scaled) x *= scale;
    auto a = zscore(series(v)), b = zscore(series(shifted)), c = zscore(series(scaled));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK_THAT(*b[i].z, WithinAbs(*a[i].z, 1e-9));
      CHECK_THAT(*c[i].z, WithinAbs(*a[i].z, 1e-9));
    }
  }
}

TEST_CASE("dislocation rule", "[market]") {
  auto l = label_dislocations({panel_week({0.6, 0.7, 0.8, 0.9}), panel_week({1.9, 0.1, 0.1, 0.1}),
                               panel_week({2.0, 2.0, 2.0, -0.1}), panel_week({1.0, std::nullopt, 1.0, 1.0})});
  CHECK(l[0].label == 1);
  CHECK_THAT(*l[0].z_mean, WithinAbs(0.75, 1e-15));
  CHECK(l[1].label == 1);
  CHECK(l[2].label == 0);
  CHECK(l[3].label == 0);
  CHECK(l[3].undefined);
  CHECK_FALSE(l[3].z_mean);

  PanelWeek missing = panel_week({1, 1, 1, 1});
  missing.z.erase("MOVE");
  CHECK_THROWS_AS(label_dislocations({missing}), Error);
}

TEST_CASE("random panels follow the brute-force rule", "[market][property]") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd(0.3, 0.8);
  for (int t = 0; t < 100; ++t) {
    std::vector<PanelWeek> panel;
    std::vector<std::array<double, 4>> raw;
    for (int w = 0; w < 30; ++w) {
      std::array<double, 4> z{nd(rng), nd(rng), nd(rng), nd(rng)};
      raw.push_back(z);
      panel.push_back(panel_week({z[0], z[1], z[2], z[3]}));
    }
    int prev_count = 1 << 30;
    for (double thr : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      auto labels = label_dislocations(panel, thr);
      int count = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        CHECK(labels[i].label == brute_label(raw[i], thr));
        count += labels[i].label;
      }
      CHECK(count <= prev_count);
      prev_count = count;
    }
  }
}

TEST_CASE("panel keeps weeks present in every index", "[market]") {
  std::map<std::string, std::vector<ZPoint>> s;
  for (const auto& n : kIndexNames) s[n] = {{kStart, 1.0, ""}, {kStart.plus_weeks(1), 1.0, ""}};
  s["MRI"].pop_back();
  Diagnostics diag;
  auto panel = build_panel(s, diag);
  CHECK(panel.size() == 1);
  REQUIRE(diag.messages.size() == 1);
  CHECK(diag.messages[0].find("MRI") != std::string::npos);
  s.erase("VIX");
  CHECK_THROWS_AS(build_panel(s, diag), Error);
}

TEST_CASE("index CSV and label export", "[market]") {
  std::istringstream in("week_end,value\n2020-01-03,12.5\n2020-01-10,13\n");
  auto s = parse_index_csv(parse_csv(in), "VIX");
  REQUIRE(s.observations.size() == 2);
  CHECK(s.observations[0].week_end == Date(2020, 1, 5));
  CHECK(s.observations[1].value == 13.0);

  auto labels = label_dislocations({panel_week({0.5, 0.75, 1.0, 0.75}), panel_week({1.0, std::nullopt, 1.0, 1.0})});
  std::string csv = labels_csv(labels);
  CHECK(csv ==
        "week_end,z_vix,z_vixfx,z_mri,z_move,z_mean,label\n"
        "2020-01-05,0.5,0.75,1,0.75,0.75,1\n"
        "2020-01-05,1,,1,1,,0\n");
  std::istringstream back(csv);
  auto parsed = parse_labels_csv(parse_csv(back));
  CHECK(parsed[0].label == 1);
  CHECK(*parsed[0].z_mean == 0.75);
  CHECK(parsed[1].undefined);
}

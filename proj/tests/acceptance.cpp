// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "newsnet/community.hpp"
#include "newsnet/embedding.hpp"
#include "newsnet/graph.hpp"
#include "newsnet/market.hpp"
#include "newsnet/model.hpp"
#include "newsnet/narrative.hpp"
#include "newsnet/pipeline.hpp"
#include "newsnet/synthetic.hpp"

#ifndef NEWSNET_SAMPLE_DIR
#define NEWSNET_SAMPLE_DIR "data/synthetic_8w"
#endif

using namespace newsnet;

namespace {

// Tolerances and counts.
constexpr double kEigTol = 1e-8;
constexpr double kEigSeconds = 1.0;
constexpr double kLimitTol = 1e-6;
constexpr double kTaylorTol = 1e-9;
constexpr double kModularityTol = 1e-12;
constexpr int kLouvainMinExact = 18;
constexpr double kFuzzyMinAri = 0.8;
constexpr int kKneeMinSeeds = 7;
constexpr double kTransitionTol = 0.02;
constexpr double kGradRelTol = 1e-5;
constexpr double kEntropyTol = 1e-12;
constexpr double kInterceptTol = 1e-10;
constexpr double kEndToEndSeconds = 60.0;

using EdgeList = std::vector<std::tuple<std::string, std::string, double>>;

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects the first failure and a short summary.
struct Checker {
  Outcome out;
  void require(bool cond, const std::string& what) {
    if (!cond && out.ok) {
      out.ok = false;
      out.detail = what;
    }
  }
  Outcome done(const std::string& summary) {
    if (out.ok) out.detail = summary;
    return out;
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Eigen::MatrixXd adjacency(const WeeklyGraph& g) {
  auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = e.weight;
  return a;
}

WeeklyGraph random_connected(std::mt19937_64& rng, int n, double p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EdgeList e;
  auto name = [](int i) { return "v" + std::to_string(100 + i); };
  for (int i = 1; i < n; ++i) e.emplace_back(name(i), name(static_cast<int>(rng() % static_cast<unsigned>(i))), 0.05 + u(rng));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < p) e.emplace_back(name(i), name(j), 0.05 + u(rng));
  return WeeklyGraph::from_edges(e);
}

// 1 ---------------------------------------------------------------------------
Outcome eigenvector_vs_dense() {
  Checker c;
  std::mt19937_64 rng(1001);
  std::vector<WeeklyGraph> graphs;
  for (int t = 0; t < 50; ++t) graphs.push_back(random_connected(rng, 2 + static_cast<int>(rng() % 49), 0.1));
  double worst = 0, secs = 0;
  for (const auto& g : graphs) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = eigenvector_centrality(g);
    secs += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency(g));
    Eigen::VectorXd v = es.eigenvectors().col(es.eigenvalues().size() - 1);
    if (v.sum() < 0) v = -v;
    Eigen::Map<const Eigen::VectorXd> x(r.values.data(), static_cast<Eigen::Index>(r.values.size()));
    worst = std::max(worst, (x - v).cwiseAbs().maxCoeff());
  }
  c.require(worst <= kEigTol, "max deviation " + num(worst));
  c.require(secs < kEigSeconds, "took " + num(secs) + " s");
  return c.done("50 graphs, max deviation " + num(worst) + ", " + num(secs) + " s");
}

// 2 ---------------------------------------------------------------------------
using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

LMatrix taylor_expm(const LMatrix& h, int terms) {
  LMatrix sum = LMatrix::Identity(h.rows(), h.cols()), term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * h / static_cast<long double>(k);
    sum += term;
  }
  return sum;
}

LMatrix limit_expm(const LMatrix& h) {
  LMatrix m = LMatrix::Identity(h.rows(), h.cols()) + h / std::ldexp(1.0L, 20);
  for (int s = 0; s < 20; ++s) m = m * m;
  return m;
}

Outcome diffusion_kernel_oracles() {
  Checker c;
  std::mt19937_64 rng(2002);
  double worst_limit = 0, worst_taylor = 0;
  int graphs = 0;
  for (int n = 2; n <= 10; ++n)
    for (int t = 0; t < 5; ++t, ++graphs) {
      auto g = random_connected(rng, n, 0.3);
      auto zero = diffusion_kernel(g, 0.0);
      c.require(zero.kernel == Eigen::MatrixXd::Identity(n, n), "K(0) is not the identity");
      auto dk = diffusion_kernel(g, 1.0);
      LMatrix h = negative_laplacian(g).cast<long double>();
      Eigen::MatrixXd lim = limit_expm(h).cast<double>(), tay = taylor_expm(h, 200).cast<double>();
      worst_limit = std::max(worst_limit, (dk.kernel - lim).cwiseAbs().maxCoeff());
      worst_taylor = std::max(worst_taylor, (dk.kernel - tay).cwiseAbs().maxCoeff());
    }
  c.require(worst_limit <= kLimitTol, "limit deviation " + num(worst_limit));
  c.require(worst_taylor <= kTaylorTol, "Taylor deviation " + num(worst_taylor));
  return c.done(std::to_string(graphs) + " graphs, limit " + num(worst_limit) + ", Taylor " + num(worst_taylor));
}

// 3, 4 ------------------------------------------------------------------------
struct Fixture {
  PlantedGraph pg;
  int blocks = 0;
  std::uint64_t seed = 0;
};

std::vector<Fixture> planted_fixtures() {
  std::vector<Fixture> out;
  std::mt19937_64 rng(3003);
  for (int t = 0; t < 20; ++t) {
    int b = 2 + t % 3;
    std::vector<int> sizes;
    for (int i = 0; i < b; ++i) sizes.push_back(10 + static_cast<int>(rng() % 6));
    std::uint64_t seed = rng();
    out.push_back({sbm_graph(sizes, 0.7, 0.02, seed), b, seed});
  }
  return out;
}

double modularity_by_sum(const WeeklyGraph& g, const std::vector<int>& labels) {
  Eigen::MatrixXd a = adjacency(g);
  Eigen::VectorXd d = a.rowwise().sum();
  double two_w = a.sum(), q = 0;
  for (Eigen::Index u = 0; u < a.rows(); ++u)
    for (Eigen::Index v = 0; v < a.rows(); ++v)
      if (labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)]) q += a(u, v) - d(u) * d(v) / two_w;
  return q / two_w;
}

Outcome modularity_and_louvain(const std::vector<Fixture>& fixtures) {
  Checker c;
  EdgeList e;
  for (char side : {'a', 'b'})
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) e.emplace_back(side + std::to_string(i), side + std::to_string(j), 1.0);
  auto g = WeeklyGraph::from_edges(e);
  std::vector<int> labels;
  for (const auto& n : g.nodes()) labels.push_back(n[0] == 'a' ? 0 : 1);
  double q = modularity(g, labels), q_sum = modularity_by_sum(g, labels);
  c.require(std::abs(q - 0.5) <= kModularityTol, "two-clique Q = " + num(q));
  c.require(std::abs(q_sum - 0.5) <= kModularityTol, "summed Q = " + num(q_sum));

  int exact = 0;
  for (const auto& f : fixtures) exact += adjusted_rand_index(louvain(f.pg.graph, f.seed).labels, f.pg.blocks) == 1.0;
  c.require(exact >= kLouvainMinExact, "Louvain exact on " + std::to_string(exact) + "/20");
  return c.done("Q = " + num(q) + ", Louvain exact on " + std::to_string(exact) + "/20");
}

Outcome fuzzy_and_knee(const std::vector<Fixture>& fixtures) {
  Checker c;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
  double min_ari = 1.0;
  int min_hits = 10;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& f = fixtures[i];
    double ari = adjusted_rand_index(fuzzy_partition(f.pg.graph, f.blocks, 1.0, f.seed).strict.labels, f.pg.blocks);
    min_ari = std::min(min_ari, ari);
    c.require(ari >= kFuzzyMinAri, "fixture " + std::to_string(i) + " fuzzy ARI " + num(ari));
    auto sk = select_k(f.pg.graph, 2, 14, 1.0, seeds);
    int hits = 0;
    for (const auto& kn : sk.knees) hits += kn.k == f.blocks;
    min_hits = std::min(min_hits, hits);
    c.require(hits >= kKneeMinSeeds, "fixture " + std::to_string(i) + " knee at k = " + std::to_string(f.blocks) + " in " +
                                         std::to_string(hits) + "/10 seeds");
    c.require(sk.k == f.blocks, "fixture " + std::to_string(i) + " modal knee " + std::to_string(sk.k));
  }
  return c.done("min ARI " + num(min_ari) + ", knee in at least " + std::to_string(min_hits) + "/10 seeds per fixture");
}

// 5 ---------------------------------------------------------------------------
Outcome nmf_monotone() {
  Checker c;
  std::mt19937_64 rng(5005);
  int checked = 0;
  for (int t = 0; t < 10; ++t) {
    auto g = random_connected(rng, 10 + static_cast<int>(rng() % 30), 0.1);
    auto dk = diffusion_kernel(g, 1.0);
    NmfOptions opt;
    opt.rel_tol = 0.0;
    opt.record_trace = true;
    opt.seed = rng();
    auto r = nmf(dk.normalized, 2 + t % 4, opt);
    c.require(r.trace.size() == 501, "trace length " + std::to_string(r.trace.size()));
    for (std::size_t i = 1; i < r.trace.size(); ++i, ++checked)
      c.require(r.trace[i] <= r.trace[i - 1], "kernel " + std::to_string(t) + " error rose at iteration " + std::to_string(i));
  }
  return c.done("10 kernels, " + std::to_string(checked) + " steps non-increasing");
}

// 6 ---------------------------------------------------------------------------
Outcome node2vec_checks() {
  Checker c;
  auto g = WeeklyGraph::from_edges(
      {{"a", "b", 1.0}, {"a", "c", 0.5}, {"b", "c", 2.0}, {"c", "d", 1.0}, {"d", "e", 0.25}, {"b", "e", 1.5}});
  WalkConfig cfg;
  cfg.walk_length = 101;
  cfg.walks_per_node = 200;
  cfg.seed = 6006;
  std::map<std::pair<int, int>, double> count;
  std::map<int, double> from;
  long steps = 0;
  for (const auto& w : generate_walks(g, cfg))
    for (std::size_t i = 1; i < w.size(); ++i, ++steps) {
      count[{w[i - 1], w[i]}] += 1;
      from[w[i - 1]] += 1;
    }
  c.require(steps == 100000, "walked " + std::to_string(steps) + " steps");
  double worst_freq = 0;
  for (int y = 0; y < 5; ++y) {
    double deg = 0;
    for (const auto& nb : g.neighbors(y)) deg += nb.weight;
    for (const auto& nb : g.neighbors(y))
      worst_freq = std::max(worst_freq, std::abs(count[{y, nb.node}] / from[y] - nb.weight / deg));
  }
  c.require(worst_freq <= kTransitionTol, "transition deviation " + num(worst_freq));

  std::mt19937_64 rng(6007);
  std::normal_distribution<double> nd(0.0, 0.7);
  auto rv = [&] {
    Eigen::VectorXd v(4);
    for (auto& x : v) x = nd(rng);
    return v;
  };
  Eigen::VectorXd center = rv(), context = rv();
  std::vector<Eigen::VectorXd> negs{rv(), rv(), rv()};
  auto grad = sgns_pair_gradient(center, context, negs);
  double worst_grad = 0;
  auto fd_check = [&](Eigen::VectorXd& x, const Eigen::VectorXd& analytic) {
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double orig = x(i);
      x(i) = orig + h;
      double up = sgns_pair_loss(center, context, negs);
      x(i) = orig - h;
      double down = sgns_pair_loss(center, context, negs);
      x(i) = orig;
      double rel = std::abs((up - down) / (2 * h) - analytic(i)) / std::max(1.0, std::abs(analytic(i)));
      worst_grad = std::max(worst_grad, rel);
    }
  };
  fd_check(center, grad.center);
  fd_check(context, grad.context);
  for (std::size_t k = 0; k < negs.size(); ++k) fd_check(negs[k], grad.negatives[k]);
  c.require(worst_grad <= kGradRelTol, "gradient relative error " + num(worst_grad));

  EdgeList e;
  for (char side : {'x', 'y'})
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) e.emplace_back(side + std::to_string(i), side + std::to_string(j), 1.0);
  e.emplace_back("x0", "y0", 1.0);
  auto cliques = WeeklyGraph::from_edges(e);
  int separated = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    WalkConfig wc;
    wc.seed = seed;
    auto emb = node2vec(cliques, wc);
    double intra = 0, inter = 0;
    int ni = 0, nx = 0;
    for (std::size_t i = 0; i < cliques.size(); ++i)
      for (std::size_t j = i + 1; j < cliques.size(); ++j) {
        double cs = cosine_similarity(emb.vectors.row(static_cast<Eigen::Index>(i)), emb.vectors.row(static_cast<Eigen::Index>(j)));
        bool same = cliques.nodes()[i][0] == cliques.nodes()[j][0];
        (same ? intra : inter) += cs;
        ++(same ? ni : nx);
      }
    separated += intra / ni > inter / nx;
  }
  c.require(separated == 5, "cliques separated in " + std::to_string(separated) + "/5 seeds");
  return c.done("transition deviation " + num(worst_freq) + ", gradient error " + num(worst_grad) + ", separated 5/5");
}

// 7 ---------------------------------------------------------------------------
Outcome entropy_reference() {
  Checker c;
  std::vector<double> spread;
  for (int b = 0; b < 10; ++b) spread.push_back(0.05 + 0.1 * b);
  double flat = binned_kl_uniform(spread);
  double single = binned_kl_uniform({0.31, 0.32, 0.35}, 0, 10);
  c.require(std::abs(flat) <= kEntropyTol, "uniform gives " + num(flat));
  c.require(std::abs(single - std::log(10.0)) <= kEntropyTol, "single bin gives " + num(single));
  return c.done("uniform " + num(flat) + ", single bin " + num(single));
}

// 8 ---------------------------------------------------------------------------
IndexSeries weekly(const std::vector<double>& values, const std::string& name = "VIX") {
  IndexSeries s{name, {}};
  for (std::size_t i = 0; i < values.size(); ++i) s.observations.push_back({Date(2020, 1, 5).plus_weeks(static_cast<int>(i)), values[i]});
  return s;
}

Outcome zscore_and_labels() {
  Checker c;
  std::vector<double> v;
  for (int i = 0; i < 12; ++i) v.push_back(i % 2 ? 11.0 : 9.0);
  v.push_back(10.0);
  v.push_back(12.0);
  auto z = zscore(weekly(v));
  c.require(z.size() == 1 && z[0].z && std::abs(*z[0].z - 2.0 / std::sqrt(12.0 / 13.0)) < 1e-12, "13-week z-score");
  auto z2 = zscore(weekly({9, 11, 12, 10}), 2);
  c.require(z2.size() == 2 && z2[0].z && *z2[0].z == 2.0 && z2[1].z && *z2[1].z == -3.0, "2-week z-scores");
  std::vector<double> flat(13, 10.0);
  flat.push_back(12.0);
  auto zf = zscore(weekly(flat));
  c.require(zf.size() == 1 && !zf[0].z && zf[0].error.find("zero variance") != std::string::npos, "zero-variance window");

  std::mt19937_64 rng(8008);
  std::normal_distribution<double> nd(0.3, 0.8);
  int weeks = 0, positives = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<PanelWeek> panel;
    std::vector<std::array<double, 4>> raw;
    for (int w = 0; w < 30; ++w) {
      std::array<double, 4> zz{nd(rng), nd(rng), nd(rng), nd(rng)};
      raw.push_back(zz);
      PanelWeek pw{Date(2020, 1, 5).plus_weeks(w), {}};
      for (std::size_t i = 0; i < 4; ++i) pw.z[kIndexNames[i]] = {pw.week_end, zz[i], ""};
      panel.push_back(pw);
    }
    auto labels = label_dislocations(panel, 0.5);
    for (std::size_t i = 0; i < labels.size(); ++i, ++weeks) {
      bool all_pos = raw[i][0] > 0 && raw[i][1] > 0 && raw[i][2] > 0 && raw[i][3] > 0;
      int expect = all_pos && (raw[i][0] + raw[i][1] + raw[i][2] + raw[i][3]) / 4 > 0.5;
      c.require(labels[i].label == expect, "panel " + std::to_string(t) + " week " + std::to_string(i) + " mislabelled");
      positives += expect;
    }
  }
  return c.done("hand fixtures exact, " + std::to_string(weeks) + " panel weeks (" + std::to_string(positives) +
                " positive) agree");
}

// 9 ---------------------------------------------------------------------------
struct Sample {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Sample simulate(int n, double b0, const std::vector<double>& b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sample s{Eigen::MatrixXd(n, static_cast<Eigen::Index>(b.size())), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double eta = b0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      s.x(i, static_cast<Eigen::Index>(j)) = nd(rng);
      eta += b[j] * s.x(i, static_cast<Eigen::Index>(j));
    }
    s.y(i) = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return s;
}

double round2(double v) { return std::round(v * 100) / 100; }

Outcome logistic_checks() {
  Checker c;
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(175);
  y0.head(23).setOnes();
  auto m0 = fit_logit(Eigen::MatrixXd(175, 0), y0, {});
  double closed = std::log((23.0 / 175) / (152.0 / 175));
  c.require(std::abs(m0.beta(0) - closed) <= kInterceptTol, "intercept " + num(m0.beta(0)));

  auto s = simulate(5000, 0.5, {-1.0, 2.0}, 9009);
  auto m = fit_logit(s.x, s.y, {"x1", "x2"});
  Eigen::Vector3d truth(0.5, -1.0, 2.0);
  double worst_se = 0;
  for (Eigen::Index j = 0; j < 3; ++j) worst_se = std::max(worst_se, std::abs(m.beta(j) - truth(j)) / m.std_err(j));
  c.require(worst_se < 3.0, "planted coefficient off by " + num(worst_se) + " SE");
  for (std::size_t i = 1; i < m.ll_trace.size(); ++i) c.require(m.ll_trace[i] >= m.ll_trace[i - 1], "log-likelihood fell");

  auto base = evaluate_labels(Eigen::VectorXi::Zero(175), y0);
  c.require(base.tn == 152 && base.fn == 23 && base.accuracy == 152.0 / 175.0, "all-negative baseline");
  Eigen::VectorXi pred = Eigen::VectorXi::Zero(175);
  pred.head(10).setOnes();
  pred.segment(23, 2).setOnes();
  auto e = evaluate_labels(pred, y0);
  c.require(e.tp == 10 && e.fp == 2 && e.fn == 13, "confusion counts");
  c.require(e.precision[1] == 10.0 / 12.0 && e.recall[1] == 10.0 / 23.0, "class-1 precision/recall");
  c.require(round2(e.precision[1]) == 0.83 && round2(e.recall[1]) == 0.43, "rounded precision/recall");
  return c.done("intercept matches closed form, planted within " + num(worst_se) + " SE, baseline accuracy " + num(base.accuracy) +
                ", precision " + num(e.precision[1]) + ", recall " + num(e.recall[1]));
}

// 10 --------------------------------------------------------------------------
bool on_segment(const Eigen::RowVectorXd& p, const Eigen::MatrixXd& pts) {
  for (Eigen::Index a = 0; a < pts.rows(); ++a)
    for (Eigen::Index b = 0; b < pts.rows(); ++b) {
      if (a == b) continue;
      Eigen::RowVectorXd d = pts.row(b) - pts.row(a);
      double t = (p - pts.row(a)).dot(d) / d.squaredNorm();
      if (t < -1e-12 || t > 1 + 1e-12) continue;
      if ((pts.row(a) + t * d - p).norm() < 1e-10) return true;
    }
  return false;
}

Outcome smote_parity() {
  Checker c;
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd x(175, 4);
  for (auto& v : x.reshaped()) v = nd(rng);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(175);
  y.head(23).setOnes();
  auto b = balance(x, y, 5, 1011);
  c.require(b.synthetic == 129, std::to_string(b.synthetic) + " synthetic rows");
  c.require(b.y.sum() == 152.0 && b.y.size() == 304, "classes not at parity");
  Eigen::MatrixXd minority = x.topRows(23);
  int off = 0;
  for (Eigen::Index i = 175; i < b.x.rows(); ++i) off += !on_segment(b.x.row(i), minority);
  c.require(off == 0, std::to_string(off) + " rows off every minority segment");
  return c.done("129 synthetic rows, 152 vs 152, all on segments");
}

// 11 --------------------------------------------------------------------------
Outcome end_to_end() {
  Checker c;
  fs::path sample = NEWSNET_SAMPLE_DIR;
  if (!fs::exists(sample / "config.json")) {
    c.require(false, "sample corpus missing at " + sample.string());
    return c.out;
  }
  std::map<std::string, std::string> hashes[2];
  double worst = 0;
  for (int run = 0; run < 2; ++run) {
    auto cfg = load_config(sample / "config.json");
    cfg.output_dir = fs::temp_directory_path() / ("newsnet-acceptance-" + std::to_string(run));
    fs::remove_all(cfg.output_dir);
    auto t0 = std::chrono::steady_clock::now();
    Pipeline(cfg).run_all();
    worst = std::max(worst, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    hashes[run] = tree_hashes(cfg.output_dir);
  }
  c.require(!hashes[0].empty() && hashes[0] == hashes[1], "artifact trees differ");
  c.require(worst < kEndToEndSeconds, "run took " + num(worst) + " s");
  return c.done(std::to_string(hashes[0].size()) + " files identical, slowest run " + num(worst) + " s");
}

// 12 --------------------------------------------------------------------------
Outcome drifting_chain() {
  Checker c;
  auto dc = drifting_corpus(6, 10, 1212);
  fs::path dir = fs::temp_directory_path() / "newsnet-acceptance-drift";
  fs::remove_all(dir);
  PipelineConfig cfg;
  cfg.corpus = dir / "corpus.jsonl";
  write_file_atomic(cfg.corpus, corpus_jsonl(dc.articles));
  cfg.output_dir = dir / "out";
  cfg.start_date = dc.weeks.front();
  Pipeline p(cfg);
  for (const char* s : {"ingest", "graph", "communities", "narratives"}) p.run_stage(s);
  auto weeks = stages::load_communities(cfg);
  c.require(weeks.size() == 6, std::to_string(weeks.size()) + " weeks loaded");
  if (!c.out.ok) return c.out;
  bool found = false;
  for (const auto& ch : all_chains(weeks, link_weeks(weeks))) {
    if (ch.length() != 6 || ch.broken_at) continue;
    if (weeks[0].communities[static_cast<std::size_t>(ch.start_community)] == dc.drifting[0]) found = true;
  }
  c.require(found, "no unbroken 6-week chain from the drifting community");
  return c.done("unbroken 6-week chain from the drifting community");
}

}  // namespace

int main() {
  auto fixtures = planted_fixtures();
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"eigenvector centrality vs dense oracle", eigenvector_vs_dense},
      {"diffusion kernel identity, limit and Taylor", diffusion_kernel_oracles},
      {"modularity and Louvain recovery", [&] { return modularity_and_louvain(fixtures); }},
      {"fuzzy partitions and knee selection", [&] { return fuzzy_and_knee(fixtures); }},
      {"NMF error monotone", nmf_monotone},
      {"node2vec walks, gradient, separation", node2vec_checks},
      {"n2v entropy reference values", entropy_reference},
      {"z-scores and dislocation labels", zscore_and_labels},
      {"logistic regression", logistic_checks},
      {"SMOTE parity", smote_parity},
      {"end-to-end determinism", end_to_end},
      {"drifting narrative chain", drifting_chain},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.ok;
    std::printf("%s [%2zu] %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed ? 1 : 0;
}

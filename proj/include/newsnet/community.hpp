#pragma once
// Community detection on weekly graphs: Louvain modularity optimisation and
// the fuzzy spectral method (diffusion kernel + NMF memberships).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsnet/core.hpp"
#include "newsnet/graph.hpp"
#include "newsnet/ingest.hpp"

namespace newsnet {

/// Strict partition: node-aligned labels, contiguous ids from 0.
struct Partition {
  Date week_end;
  std::vector<int> labels;
  double modularity = 0.0;

  int count() const { return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1; }

  /// Node indices per community.
  std::vector<std::vector<int>> members() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(count()));
    for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
    return out;
  }
};

/// Renumbers ids to 0..c-1 preserving the order of the original ids.
inline std::vector<int> compact_labels(const std::vector<int>& labels) {
  std::vector<int> ids(labels);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(ids.begin(), ids.end(), labels[i]) - ids.begin());
  return out;
}

/// Renumbers ids in order of first appearance over node indices.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::unordered_map<int, int> map;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = map.try_emplace(labels[i], static_cast<int>(map.size()));
    out[i] = it->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Modularity
// ---------------------------------------------------------------------------

/// Q = (1/2W) sum_{u,v} [w_uv - d_u d_v / 2W] delta(c_u, c_v) over ordered
/// pairs, with W the total edge weight. Zero for an edgeless graph.
inline double modularity(const WeeklyGraph& g, const std::vector<int>& labels) {
  if (labels.size() != g.size()) throw Error("partition does not cover the graph's nodes");
  for (int l : labels)
    if (l < 0) throw Error("negative community label");
  double two_w = 2.0 * g.total_weight();
  if (two_w <= 0.0) return 0.0;
  int c = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> internal(static_cast<std::size_t>(c), 0.0), total(static_cast<std::size_t>(c), 0.0);
  for (const auto& e : g.edges()) {
    auto cu = static_cast<std::size_t>(labels[static_cast<std::size_t>(e.u)]);
    auto cv = static_cast<std::size_t>(labels[static_cast<std::size_t>(e.v)]);
    if (cu == cv) internal[cu] += 2.0 * e.weight;
    total[cu] += e.weight;
    total[cv] += e.weight;
  }
  double q = 0.0;
  for (std::size_t k = 0; k < internal.size(); ++k) q += internal[k] / two_w - (total[k] / two_w) * (total[k] / two_w);
  return q;
}

inline double modularity(const WeeklyGraph& g, const std::map<std::string, int>& labels) {
  std::vector<int> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto it = labels.find(g.nodes()[i]);
    if (it == labels.end()) throw Error("no community label for node '" + g.nodes()[i] + "'");
    v[i] = it->second;
  }
  return modularity(g, v);
}

// ---------------------------------------------------------------------------
// Louvain
// ---------------------------------------------------------------------------

namespace detail {

struct LevelGraph {
  std::vector<std::vector<Neighbor>> adj;  // no self entries
  std::vector<double> loop;                // ordered-pair internal weight
  std::vector<double> strength;
  double m2 = 0.0;

  std::size_t size() const { return adj.size(); }
};

inline LevelGraph level_graph(const WeeklyGraph& g) {
  LevelGraph lg;
  lg.adj.resize(g.size());
  lg.loop.assign(g.size(), 0.0);
  lg.strength.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    lg.adj[i] = g.neighbors(static_cast<int>(i));
    for (const auto& n : lg.adj[i]) lg.strength[i] += n.weight;
    lg.m2 += lg.strength[i];
  }
  return lg;
}

/// Repeated single-node moves until no move improves modularity. Moving
/// into an empty community is considered too. Returns whether any node moved.
inline bool local_moving(const LevelGraph& lg, std::vector<int>& comm, std::mt19937_64& rng) {
  const std::size_t n = lg.size();
  if (lg.m2 <= 0.0) return false;
  std::vector<double> tot(n, 0.0);
  std::vector<int> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    tot[static_cast<std::size_t>(comm[i])] += lg.strength[i];
    ++size[static_cast<std::size_t>(comm[i])];
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Neighbor>> nbrs = lg.adj;
  for (auto& a : nbrs) std::shuffle(a.begin(), a.end(), rng);

  const double eps = 1e-12 * lg.m2;
  std::vector<double> w_to(n, 0.0);
  std::vector<int> touched;
  bool any = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (int i : order) {
      auto iu = static_cast<std::size_t>(i);
      int own = comm[iu];
      double k = lg.strength[iu];
      tot[static_cast<std::size_t>(own)] -= k;
      --size[static_cast<std::size_t>(own)];

      touched.clear();
      for (const auto& nb : nbrs[iu]) {
        auto c = static_cast<std::size_t>(comm[static_cast<std::size_t>(nb.node)]);
        if (w_to[c] == 0.0) touched.push_back(static_cast<int>(c));
        w_to[c] += nb.weight;
      }
      auto gain = [&](int c) { return w_to[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * k / lg.m2; };
      int best = own;
      double best_gain = gain(own);
      for (int c : touched) {
        double gc = gain(c);
        if (gc > best_gain + eps) {
          best = c;
          best_gain = gc;
        }
      }
      if (size[static_cast<std::size_t>(own)] > 0 && 0.0 > best_gain + eps) {
        for (std::size_t c = 0; c < n; ++c)
          if (size[c] == 0) {
            best = static_cast<int>(c);
            break;
          }
      }
      for (int c : touched) w_to[static_cast<std::size_t>(c)] = 0.0;

      tot[static_cast<std::size_t>(best)] += k;
      ++size[static_cast<std::size_t>(best)];
      comm[iu] = best;
      if (best != own) moved = any = true;
    }
  }
  return any;
}

inline LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& comm, int count) {
  LevelGraph out;
  auto c = static_cast<std::size_t>(count);
  out.loop.assign(c, 0.0);
  out.strength.assign(c, 0.0);
  std::vector<std::map<int, double>> acc(c);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    auto ci = static_cast<std::size_t>(comm[i]);
    out.loop[ci] += lg.loop[i];
    out.strength[ci] += lg.strength[i];
    for (const auto& nb : lg.adj[i]) {
      int cj = comm[static_cast<std::size_t>(nb.node)];
      if (static_cast<std::size_t>(cj) == ci)
        out.loop[ci] += nb.weight;
      else
        acc[ci][cj] += nb.weight;
    }
  }
  out.adj.resize(c);
  for (std::size_t i = 0; i < c; ++i)
    for (const auto& [j, w] : acc[i]) out.adj[i].push_back({j, w});
  out.m2 = lg.m2;
  return out;
}

}  // namespace detail

struct LouvainResult {
  Partition partition;
  std::vector<double> level_modularity;  // after each aggregation level and the final refinement
};

/// Multi-level Louvain: local moves then aggregation, repeated until a level
/// produces no move, followed by a local-moving refinement on the original
/// nodes so no single-node move can raise modularity.
inline LouvainResult louvain_detailed(const WeeklyGraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LouvainResult r;
  r.partition.week_end = g.week_end();
  const std::size_t n = g.size();
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  if (n == 0) return r;

  detail::LevelGraph base = detail::level_graph(g);
  detail::LevelGraph lg = base;
  while (true) {
    std::vector<int> comm(lg.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!detail::local_moving(lg, comm, rng)) break;
    comm = compact_labels(comm);
    int count = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& l : labels) l = comm[static_cast<std::size_t>(l)];
    r.level_modularity.push_back(modularity(g, labels));
    if (static_cast<std::size_t>(count) == lg.size()) break;
    lg = detail::aggregate(lg, comm, count);
  }
  detail::local_moving(base, labels, rng);
  labels = canonical_labels(compact_labels(labels));
  r.partition.labels = labels;
  r.partition.modularity = modularity(g, labels);
  r.level_modularity.push_back(r.partition.modularity);
  return r;
}

inline Partition louvain(const WeeklyGraph& g, std::uint64_t seed) { return louvain_detailed(g, seed).partition; }

// ---------------------------------------------------------------------------
// Diffusion kernel
// ---------------------------------------------------------------------------

/// H = A - D: off-diagonal edge weights, minus the weighted degree on the diagonal.
inline Eigen::MatrixXd negative_laplacian(const WeeklyGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    h(e.u, e.v) += e.weight;
    h(e.v, e.u) += e.weight;
    h(e.u, e.u) -= e.weight;
    h(e.v, e.v) -= e.weight;
  }
  return h;
}

/// exp(X) for symmetric X by scaling and squaring with a Taylor series on
/// X / 2^s, where s brings the 1-norm below 1/2.
inline Eigen::MatrixXd symmetric_expm(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  Eigen::MatrixXd y = x / std::ldexp(1.0, s);
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * y) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < s; ++i) result = result * result;
  return 0.5 * (result + result.transpose());
}

struct DiffusionKernel {
  Eigen::MatrixXd kernel;      // exp(beta H)
  Eigen::MatrixXd normalized;  // K_ij / sqrt(K_ii K_jj)
};

inline DiffusionKernel diffusion_kernel(const WeeklyGraph& g, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error("diffusion beta must be finite and >= 0");
  DiffusionKernel dk;
  dk.kernel = symmetric_expm(beta * negative_laplacian(g));
  if (!dk.kernel.allFinite()) throw Error("diffusion kernel has nonfinite entries");
  const Eigen::Index n = dk.kernel.rows();
  Eigen::VectorXd inv_sqrt = dk.kernel.diagonal().cwiseSqrt().cwiseInverse();
  dk.normalized = inv_sqrt.asDiagonal() * dk.kernel * inv_sqrt.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) dk.normalized(i, i) = 1.0;
  if (!dk.normalized.allFinite()) throw Error("normalized diffusion kernel has nonfinite entries");
  return dk;
}

// ---------------------------------------------------------------------------
// NMF
// ---------------------------------------------------------------------------

struct NmfOptions {
  int max_iter = 500;
  double rel_tol = 1e-6;  // stop when relative error improvement falls below
  std::uint64_t seed = 0;
  bool record_trace = false;
};

struct NmfResult {
  Eigen::MatrixXd v;  // n x k memberships
  Eigen::MatrixXd l;  // k x n
  double error = 0.0;  // Frobenius norm of X - VL
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // no iteration increased the error
  std::vector<double> trace;  // error before the first and after every iteration
};

/// NNDSVD start (Boutsidis & Gallopoulos) with zero entries refilled by
/// seeded uniform noise in [0, mean(X)/100].
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nndsvd_init(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
  const Eigen::Index n = x.rows(), m = x.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& u = svd.matrixU();
  const auto& vt = svd.matrixV();
  const auto& s = svd.singularValues();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, k), h = Eigen::MatrixXd::Zero(k, m);
  w.col(0) = std::sqrt(s(0)) * u.col(0).cwiseAbs();
  h.row(0) = std::sqrt(s(0)) * vt.col(0).cwiseAbs().transpose();
  for (int j = 1; j < k && j < s.size(); ++j) {
    Eigen::VectorXd xp = u.col(j).cwiseMax(0.0), xn = (-u.col(j)).cwiseMax(0.0);
    Eigen::VectorXd yp = vt.col(j).cwiseMax(0.0), yn = (-vt.col(j)).cwiseMax(0.0);
    double mp = xp.norm() * yp.norm(), mn = xn.norm() * yn.norm();
    bool positive = mp >= mn;
    const Eigen::VectorXd& a = positive ? xp : xn;
    const Eigen::VectorXd& b = positive ? yp : yn;
    double sigma = positive ? mp : mn;
    if (sigma <= 0.0) continue;
    double scale = std::sqrt(s(j) * sigma);
    w.col(j) = scale * a / a.norm();
    h.row(j) = scale * (b / b.norm()).transpose();
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> fill(0.0, std::max(x.mean(), 1e-12) / 100.0);
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w.data()[i] < 1e-12) w.data()[i] = fill(rng);
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (h.data()[i] < 1e-12) h.data()[i] = fill(rng);
  return {w, h};
}

/// Lee-Seung multiplicative updates minimising the Frobenius error.
inline NmfResult nmf(const Eigen::MatrixXd& x, int k, const NmfOptions& opt = {}) {
  if (k < 1 || k > std::min(x.rows(), x.cols())) throw Error("NMF rank out of range");
  if (x.minCoeff() < 0.0) throw Error("NMF input must be nonnegative");
  constexpr double tiny = 1e-300;
  auto [v, l] = nndsvd_init(x, k, opt.seed);
  NmfResult r;
  double err = (x - v * l).norm();
  if (opt.record_trace) r.trace.push_back(err);
  for (int it = 1; it <= opt.max_iter; ++it) {
    Eigen::MatrixXd vt = v.transpose();
    l = l.cwiseProduct((vt * x).cwiseQuotient((vt * v * l).array().max(tiny).matrix()));
    Eigen::MatrixXd lt = l.transpose();
    v = v.cwiseProduct((x * lt).cwiseQuotient((v * (l * lt)).array().max(tiny).matrix()));
    double next = (x - v * l).norm();
    if (opt.record_trace) r.trace.push_back(next);
    if (next > err * (1.0 + 1e-12) + 1e-300) r.monotone = false;
    r.iterations = it;
    double improvement = err > 0.0 ? (err - next) / err : 0.0;
    err = next;
    if (improvement < opt.rel_tol) {
      r.converged = true;
      break;
    }
  }
  r.v = std::move(v);
  r.l = std::move(l);
  r.error = err;
  return r;
}

// ---------------------------------------------------------------------------
// Fuzzy partition
// ---------------------------------------------------------------------------

inline constexpr double kStabilityFloor = 1e-12;

struct RowStability {
  int argmax = 0;  // lowest column on ties
  double stability = 1.0;  // v* / v**, +inf when v** < 1e-12
};

inline RowStability row_stability(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  RowStability r;
  double first = -1.0, second = -1.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    double x = row(j);
    if (x > first) {
      second = first;
      first = x;
      r.argmax = static_cast<int>(j);
    } else if (x > second) {
      second = x;
    }
  }
  r.stability = second < kStabilityFloor ? std::numeric_limits<double>::infinity() : first / second;
  return r;
}

struct FuzzyPartition {
  Eigen::MatrixXd membership;  // n x k, rows are membership degrees
  Partition strict;            // compacted row argmax
  std::vector<int> argmax;     // raw argmax column per node
  std::vector<double> stability;
  double beta = 1.0;
  int k = 2;
  double reconstruction_error = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline FuzzyPartition fuzzy_partition_from_kernel(const WeeklyGraph& g, const DiffusionKernel& dk, int k, double beta,
                                                  std::uint64_t seed, const NmfOptions& base = {}) {
  const int n = static_cast<int>(g.size());
  if (k < 2 || k > n - 1)
    throw Error("fuzzy partition needs 2 <= k <= n-1 (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  NmfOptions opt = base;
  opt.seed = seed;
  auto res = nmf(dk.normalized, k, opt);
  FuzzyPartition fp;
  fp.membership = std::move(res.v);
  fp.beta = beta;
  fp.k = k;
  fp.reconstruction_error = res.error;
  fp.converged = res.converged;
  fp.iterations = res.iterations;
  fp.argmax.resize(static_cast<std::size_t>(n));
  fp.stability.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto rs = row_stability(fp.membership.row(i));
    fp.argmax[static_cast<std::size_t>(i)] = rs.argmax;
    fp.stability[static_cast<std::size_t>(i)] = rs.stability;
  }
  fp.strict.week_end = g.week_end();
  fp.strict.labels = compact_labels(fp.argmax);
  fp.strict.modularity = modularity(g, fp.strict.labels);
  return fp;
}

inline FuzzyPartition fuzzy_partition(const WeeklyGraph& g, int k, double beta, std::uint64_t seed,
                                      const NmfOptions& opt = {}) {
  return fuzzy_partition_from_kernel(g, diffusion_kernel(g, beta), k, beta, seed, opt);
}

// ---------------------------------------------------------------------------
// Choice of k
// ---------------------------------------------------------------------------

struct KneeResult {
  int k = 0;
  bool degenerate = false;  // no point above the chord
};

/// Normalised-distance knee: rescale (k, Q) to the unit square and take the
/// first maximiser of Q_norm - k_norm. With no point above the chord the
/// largest k is returned (smallest k when Q is flat), flagged degenerate.
inline KneeResult knee_point(const std::vector<int>& ks, const std::vector<double>& qs) {
  if (ks.empty() || ks.size() != qs.size()) throw Error("knee detection needs matching nonempty k and Q");
  if (ks.size() == 1) return {ks[0], false};
  double kmin = ks.front(), kmax = ks.back();
  auto [qmin_it, qmax_it] = std::minmax_element(qs.begin(), qs.end());
  double qmin = *qmin_it, qmax = *qmax_it;
  if (qmax - qmin <= 1e-12) return {ks.front(), true};
  std::size_t best = 0;
  double best_d = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    double d = (qs[i] - qmin) / (qmax - qmin) - (ks[i] - kmin) / (kmax - kmin);
    if (d > best_d + 1e-12) {
      best_d = d;
      best = i;
    }
  }
  if (best_d <= 1e-9) return {ks.back(), true};
  return {ks[best], false};
}

struct SelectKResult {
  int k = 0;
  std::vector<int> ks;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> q;  // [seed][k index]
  std::vector<KneeResult> knees;       // per seed
};

/// Modal knee of the Q-vs-k curves over seeds (ties to the smallest k).
/// The k range is clipped to n-1.
inline SelectKResult select_k(const WeeklyGraph& g, int k_min, int k_max, double beta,
                              const std::vector<std::uint64_t>& seeds, const NmfOptions& opt = {}) {
  if (seeds.empty()) throw Error("select_k needs at least one seed");
  k_max = std::min<int>(k_max, static_cast<int>(g.size()) - 1);
  if (k_min < 2 || k_max < k_min) throw Error("empty k range for a graph of " + std::to_string(g.size()) + " nodes");
  SelectKResult r;
  for (int k = k_min; k <= k_max; ++k) r.ks.push_back(k);
  r.seeds = seeds;
  auto dk = diffusion_kernel(g, beta);
  const std::size_t nk = r.ks.size();
  r.q.assign(seeds.size(), std::vector<double>(nk, 0.0));
  parallel_for(seeds.size() * nk, [&](std::size_t job) {
    std::size_t s = job / nk, ki = job % nk;
    r.q[s][ki] = fuzzy_partition_from_kernel(g, dk, r.ks[ki], beta, seeds[s], opt).strict.modularity;
  });
  std::map<int, int> votes;
  for (const auto& qs : r.q) {
    auto knee = knee_point(r.ks, qs);
    ++votes[knee.k];
    r.knees.push_back(knee);
  }
  int best_votes = 0;
  for (const auto& [k, c] : votes)
    if (c > best_votes) {
      best_votes = c;
      r.k = k;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Partition comparison
// ---------------------------------------------------------------------------

/// Adjusted Rand index from the pair-counting contingency table. When the
/// expected and maximum index coincide (both trivial) it is 1 for identical
/// partitions and 0 otherwise.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error("ARI needs partitions of the same node set");
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> cont;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cont[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : cont) index += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  double total = c2(static_cast<double>(a.size()));
  double expected = total > 0 ? sa * sb / total : 0.0;
  double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return canonical_labels(a) == canonical_labels(b) ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

inline double adjusted_rand_index(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  if (a.size() != b.size()) throw Error("ARI needs partitions of the same node set");
  std::vector<int> la, lb;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw Error("ARI needs partitions of the same node set");
    la.push_back(ia->second);
    lb.push_back(ib->second);
  }
  return adjusted_rand_index(la, lb);
}

// ---------------------------------------------------------------------------
// Representative articles
// ---------------------------------------------------------------------------

inline constexpr double kDefaultStabilityThreshold = 2.0;

/// Articles whose rank-1..3 entities all belong to community c and are all
/// stable (S_i above the threshold). Indexed by strict community id.
inline std::vector<std::vector<ArticleRecord>> stable_article_filter(const WeeklyGraph& g, const FuzzyPartition& fp,
                                                                     const WeeklyCorpus& corpus,
                                                                     double threshold = kDefaultStabilityThreshold) {
  std::vector<std::vector<ArticleRecord>> out(static_cast<std::size_t>(fp.strict.count()));
  for (const auto& a : corpus.articles) {
    int community = -1;
    bool ok = true, any = false;
    for (const auto& e : a.entities) {
      if (e.rank > 3) continue;
      any = true;
      auto idx = g.find(e.text);
      if (!idx) {
        ok = false;
        break;
      }
      auto i = static_cast<std::size_t>(*idx);
      int c = fp.strict.labels[i];
      if ((community >= 0 && c != community) || fp.stability[i] <= threshold) {
        ok = false;
        break;
      }
      community = c;
    }
    if (ok && any) out[static_cast<std::size_t>(community)].push_back(a);
  }
  return out;
}

}  // namespace newsnet

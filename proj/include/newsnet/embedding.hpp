#pragma once
// node2vec: second-order biased walks, skip-gram with negative sampling, the
// KL-to-uniform embedding feature, and average-linkage word-vector clustering.

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "newsnet/core.hpp"
#include "newsnet/graph.hpp"

namespace newsnet {

struct WalkConfig {
  int dims = 8;
  int walk_length = 20;
  int walks_per_node = 20;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;

  void validate() const {
    if (dims <= 0 || walk_length <= 0 || walks_per_node <= 0 || window <= 0 || negatives <= 0 || epochs < 0)
      throw Error("walk configuration values must be positive");
    if (!(p > 0.0) || !(q > 0.0) || !(learning_rate > 0.0)) throw Error("p, q and learning rate must be positive");
  }
};

using Walk = std::vector<int>;

/// Normalised probabilities over neighbors(cur) for the step after prev
/// (prev < 0 for the first step, which is weight-proportional).
inline std::vector<double> transition_probabilities(const WeeklyGraph& g, int prev, int cur, double p, double q) {
  const auto& nb = g.neighbors(cur);
  std::vector<double> pi(nb.size());
  double total = 0.0;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    double w = nb[i].weight;
    if (prev >= 0) {
      if (nb[i].node == prev)
        w /= p;
      else if (g.weight(prev, nb[i].node) <= 0.0)
        w /= q;
    }
    pi[i] = w;
    total += w;
  }
  for (auto& x : pi) x /= total;
  return pi;
}

namespace detail {

inline int sample_index(const std::vector<double>& probs, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace detail

/// walks_per_node walks from every node, ordered round by round. Each source
/// node has its own RNG stream derived from the seed.
inline std::vector<Walk> generate_walks(const WeeklyGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.size();
  const auto rounds = static_cast<std::size_t>(cfg.walks_per_node);
  std::vector<Walk> walks(n * rounds);
  parallel_for(n, [&](std::size_t src) {
    std::mt19937_64 rng(derive_seed(cfg.seed, "walk", static_cast<long>(src)));
    for (std::size_t r = 0; r < rounds; ++r) {
      Walk w{static_cast<int>(src)};
      int prev = -1;
      while (static_cast<int>(w.size()) < cfg.walk_length) {
        int cur = w.back();
        if (g.neighbors(cur).empty()) break;
        auto probs = transition_probabilities(g, prev, cur, cfg.p, cfg.q);
        assert(std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0) < 1e-9);
        prev = cur;
        w.push_back(g.neighbors(cur)[static_cast<std::size_t>(detail::sample_index(probs, rng))].node);
      }
      walks[r * n + src] = std::move(w);
    }
  });
  return walks;
}

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling
// ---------------------------------------------------------------------------

inline double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

/// log(1 + exp(-x)) without overflow.
inline double softplus_neg(double x) { return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

/// -ln s(u_o . v_c) - sum_k ln s(-u_k . v_c)
inline double sgns_pair_loss(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                             const std::vector<Eigen::VectorXd>& negatives) {
  double loss = softplus_neg(context.dot(center));
  for (const auto& u : negatives) loss += softplus_neg(-u.dot(center));
  return loss;
}

struct SgnsGradient {
  Eigen::VectorXd center;
  Eigen::VectorXd context;
  std::vector<Eigen::VectorXd> negatives;
};

inline SgnsGradient sgns_pair_gradient(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                                       const std::vector<Eigen::VectorXd>& negatives) {
  SgnsGradient g;
  double gp = sigmoid(context.dot(center)) - 1.0;
  g.center = gp * context;
  g.context = gp * center;
  for (const auto& u : negatives) {
    double gn = sigmoid(u.dot(center));
    g.center += gn * u;
    g.negatives.push_back(gn * center);
  }
  return g;
}

struct NodeEmbedding {
  Date week_end;
  std::vector<std::string> nodes;
  Eigen::MatrixXd vectors;  // rows aligned with nodes
  Eigen::MatrixXd context_vectors;
  std::vector<double> epoch_loss;  // mean pair loss after each epoch
};

/// Trains input vectors by SGD over (center, context) pairs within the
/// window, with negatives from the unigram^0.75 distribution and a linearly
/// decaying learning rate.
inline NodeEmbedding train_embedding(const WeeklyGraph& g, const std::vector<Walk>& walks, const WalkConfig& cfg) {
  cfg.validate();
  if (walks.empty()) throw Error("no walks to train on");
  const auto n = static_cast<Eigen::Index>(g.size());
  const int d = cfg.dims;
  std::mt19937_64 rng(derive_seed(cfg.seed, "sgns"));
  std::uniform_real_distribution<double> init(-0.5 / d, 0.5 / d);
  Eigen::MatrixXd in(n, d), out = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = init(rng);

  std::vector<double> counts(static_cast<std::size_t>(n), 0.0);
  long long pairs_per_epoch = 0;
  for (const auto& w : walks) {
    for (int v : w) counts[static_cast<std::size_t>(v)] += 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::size_t lo = i >= static_cast<std::size_t>(cfg.window) ? i - static_cast<std::size_t>(cfg.window) : 0;
      std::size_t hi = std::min(w.size() - 1, i + static_cast<std::size_t>(cfg.window));
      pairs_per_epoch += static_cast<long long>(hi - lo);
    }
  }
  for (auto& c : counts) c = std::pow(c, 0.75);
  std::discrete_distribution<int> noise(counts.begin(), counts.end());

  auto for_each_pair = [&](auto&& body) {
    for (const auto& w : walks)
      for (std::size_t i = 0; i < w.size(); ++i) {
        std::size_t lo = i >= static_cast<std::size_t>(cfg.window) ? i - static_cast<std::size_t>(cfg.window) : 0;
        std::size_t hi = std::min(w.size() - 1, i + static_cast<std::size_t>(cfg.window));
        for (std::size_t j = lo; j <= hi; ++j)
          if (j != i) body(w[i], w[j]);
      }
  };
  // Objective over every pair with a fixed draw of negatives, so epochs compare.
  auto evaluate = [&] {
    std::mt19937_64 eval_rng(derive_seed(cfg.seed, "sgns-eval"));
    double loss = 0.0;
    for_each_pair([&](int c, int o) {
      loss += softplus_neg(out.row(o).dot(in.row(c)));
      for (int k = 0; k < cfg.negatives; ++k) {
        int neg = noise(eval_rng);
        if (neg != o) loss += softplus_neg(-out.row(neg).dot(in.row(c)));
      }
    });
    return pairs_per_epoch > 0 ? loss / static_cast<double>(pairs_per_epoch) : 0.0;
  };

  NodeEmbedding e;
  e.week_end = g.week_end();
  e.nodes = g.nodes();
  const double total = static_cast<double>(pairs_per_epoch) * cfg.epochs;
  double processed = 0.0;
  Eigen::VectorXd grad_center(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for_each_pair([&](int c, int o) {
      double lr = cfg.learning_rate * std::max(1e-4, 1.0 - processed / total);
      processed += 1.0;
      grad_center.setZero();
      auto step = [&](int target, double label) {
        double gcoef = sigmoid(out.row(target).dot(in.row(c))) - label;
        grad_center += gcoef * out.row(target).transpose();
        out.row(target) -= lr * gcoef * in.row(c);
      };
      step(o, 1.0);
      for (int k = 0; k < cfg.negatives; ++k) {
        int neg = noise(rng);
        if (neg != o) step(neg, 0.0);
      }
      in.row(c) -= lr * grad_center.transpose();
    });
    double mean = evaluate();
    if (!std::isfinite(mean))
      throw Error("embedding loss is not finite at epoch " + std::to_string(epoch + 1) + " (week " +
                  g.week_end().str() + ", lr " + fmt_num(cfg.learning_rate) + ")");
    e.epoch_loss.push_back(mean);
  }
  if (!in.allFinite()) throw Error("embedding has nonfinite entries (week " + g.week_end().str() + ")");
  e.vectors = std::move(in);
  e.context_vectors = std::move(out);
  return e;
}

inline NodeEmbedding node2vec(const WeeklyGraph& g, const WalkConfig& cfg) {
  return train_embedding(g, generate_walks(g, cfg), cfg);
}

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("cosine similarity of a zero vector");
  return a.dot(b) / (na * nb);
}

// ---------------------------------------------------------------------------
// KL divergence from uniform
// ---------------------------------------------------------------------------

inline constexpr double kEntropyBinWidth = 0.1;

/// KL(P_data || uniform) over the width-0.1 bins [lo_bin, hi_bin) in units of
/// the bin width. Values outside the support are clamped into the edge bins.
inline double binned_kl_uniform(const std::vector<double>& values, long lo_bin, long hi_bin) {
  if (values.empty()) throw Error("no values to bin");
  long nb = std::max(1L, hi_bin - lo_bin);
  std::vector<double> freq(static_cast<std::size_t>(nb), 0.0);
  for (double x : values) {
    long b = static_cast<long>(std::floor(x / kEntropyBinWidth)) - lo_bin;
    freq[static_cast<std::size_t>(std::clamp(b, 0L, nb - 1))] += 1.0;
  }
  double kl = 0.0, n = static_cast<double>(values.size()), pu = 1.0 / static_cast<double>(nb);
  for (double f : freq)
    if (f > 0) kl += (f / n) * std::log((f / n) / pu);
  return std::max(0.0, kl);
}

/// Support snapped outward to the 0.1 grid from the observed min and max.
inline double binned_kl_uniform(const std::vector<double>& values) {
  auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  long lo = static_cast<long>(std::floor(*mn / kEntropyBinWidth));
  long hi = static_cast<long>(std::ceil(*mx / kEntropyBinWidth));
  return binned_kl_uniform(values, lo, hi);
}

/// Mean over dimensions of the per-dimension divergence from uniform.
inline double n2v_entropy(const Eigen::MatrixXd& vectors) {
  if (vectors.rows() < 2) throw Error("n2v-entropy needs at least two nodes");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    std::vector<double> col(vectors.col(j).data(), vectors.col(j).data() + vectors.rows());
    sum += binned_kl_uniform(col);
  }
  return vectors.cols() > 0 ? sum / static_cast<double>(vectors.cols()) : 0.0;
}

inline double n2v_entropy(const NodeEmbedding& e) { return n2v_entropy(e.vectors); }

inline std::string embedding_csv_header(int dims) {
  CsvRow h{"week", "node"};
  for (int i = 1; i <= dims; ++i) h.push_back("v" + std::to_string(i));
  return csv_line(h);
}

inline std::string embedding_csv_rows(const NodeEmbedding& e) {
  std::string out;
  for (std::size_t i = 0; i < e.nodes.size(); ++i) {
    CsvRow r{e.week_end.str(), e.nodes[i]};
    for (Eigen::Index j = 0; j < e.vectors.cols(); ++j) r.push_back(fmt_num(e.vectors(static_cast<Eigen::Index>(i), j)));
    out += csv_line(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Word-vector clustering
// ---------------------------------------------------------------------------

struct WordVectorSet {
  std::vector<std::string> tokens;
  Eigen::MatrixXd vectors;  // rows aligned with tokens
};

/// Text format: `token v1 ... vd` per line. A leading `count dims` header
/// line is skipped.
inline WordVectorSet parse_word_vectors(std::istream& in) {
  WordVectorSet set;
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> fields{std::istream_iterator<std::string>(ls), std::istream_iterator<std::string>()};
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2) {
      try {
        parse_long(fields[0]);
        parse_long(fields[1]);
        continue;
      } catch (const ParseError&) {
      }
    }
    if (fields.size() < 2) throw ParseError("line " + std::to_string(lineno) + ": no vector components");
    std::vector<double> v;
    for (std::size_t i = 1; i < fields.size(); ++i) v.push_back(parse_double(fields[i]));
    if (!rows.empty() && v.size() != rows.front().size())
      throw ParseError("line " + std::to_string(lineno) + ": dimension " + std::to_string(v.size()) + " differs from " +
                       std::to_string(rows.front().size()));
    set.tokens.push_back(fields[0]);
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw ParseError("no word vectors");
  set.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return set;
}

inline WordVectorSet load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read word vectors " + path.string());
  return parse_word_vectors(in);
}

struct WordCluster {
  std::vector<std::string> members;  // sorted
  Eigen::VectorXd centroid;
  std::string representative;
};

struct WordClustering {
  std::vector<WordCluster> clusters;  // ordered by first member
  bool all_singletons = false;
};

/// Average-linkage agglomeration under cosine distance, cut where merge
/// heights exceed d_coph. Singleton clusters are dropped. Input order does
/// not matter: tokens are processed in sorted order.
inline WordClustering cluster_word_vectors(const WordVectorSet& wv, double d_coph) {
  const auto n = static_cast<std::size_t>(wv.vectors.rows());
  if (n < 2 || wv.tokens.size() != n) throw Error("word clustering needs at least two vectors");
  if (!(d_coph > 0.0 && d_coph < 2.0)) throw Error("cophenetic cut must lie in (0, 2)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return wv.tokens[a] < wv.tokens[b]; });
  for (std::size_t i = 1; i < n; ++i)
    if (wv.tokens[order[i]] == wv.tokens[order[i - 1]]) throw Error("duplicate token '" + wv.tokens[order[i]] + "'");

  Eigen::MatrixXd unit(static_cast<Eigen::Index>(n), wv.vectors.cols());
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd v = wv.vectors.row(static_cast<Eigen::Index>(order[i]));
    if (v.norm() == 0.0) throw Error("zero vector for token '" + wv.tokens[order[i]] + "'");
    unit.row(static_cast<Eigen::Index>(i)) = v / v.norm();
  }
  Eigen::MatrixXd dist = (1.0 - (unit * unit.transpose()).array()).max(0.0).matrix();

  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> alive(n, true);
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i])
        for (std::size_t j = i + 1; j < n; ++j)
          if (alive[j] && dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < best) {
            best = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            bi = i;
            bj = j;
          }
    if (!(best <= d_coph)) break;
    double si = static_cast<double>(members[bi].size()), sj = static_cast<double>(members[bj].size());
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      auto ki = static_cast<Eigen::Index>(k);
      double dk = (si * dist(ki, static_cast<Eigen::Index>(bi)) + sj * dist(ki, static_cast<Eigen::Index>(bj))) / (si + sj);
      dist(ki, static_cast<Eigen::Index>(bi)) = dist(static_cast<Eigen::Index>(bi), ki) = dk;
    }
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    alive[bj] = false;
  }

  WordClustering out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i] || members[i].size() < 2) continue;
    std::sort(members[i].begin(), members[i].end());
    WordCluster c;
    c.centroid = Eigen::VectorXd::Zero(wv.vectors.cols());
    for (auto m : members[i]) {
      c.members.push_back(wv.tokens[order[m]]);
      c.centroid += wv.vectors.row(static_cast<Eigen::Index>(order[m])).transpose();
    }
    c.centroid /= static_cast<double>(members[i].size());
    double best = std::numeric_limits<double>::infinity();
    for (auto m : members[i]) {
      Eigen::VectorXd v = wv.vectors.row(static_cast<Eigen::Index>(order[m]));
      double dc = 1.0 - cosine_similarity(v, c.centroid);
      if (dc < best - 1e-15) {
        best = dc;
        c.representative = wv.tokens[order[m]];
      }
    }
    out.clusters.push_back(std::move(c));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.members.front() < b.members.front(); });
  out.all_singletons = out.clusters.empty();
  return out;
}

}  // namespace newsnet

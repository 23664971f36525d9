#pragma once
// Dislocation classifier: SMOTE balancing, logistic regression by IRLS,
// backward elimination on p-values, and confusion-matrix metrics.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsnet/core.hpp"
#include "newsnet/feature.hpp"

namespace newsnet {

// ---------------------------------------------------------------------------
// SMOTE
// ---------------------------------------------------------------------------

/// `count` synthetic rows, each x_i + u (x_nn - x_i) with x_i drawn uniformly
/// from the minority rows, x_nn one of its k nearest minority neighbors and
/// u ~ U(0, 1). k is reduced to m - 1 for small classes.
inline Eigen::MatrixXd smote(const Eigen::MatrixXd& minority, int count, int k, std::uint64_t seed) {
  const Eigen::Index m = minority.rows();
  if (count < 0) throw Error("negative SMOTE count");
  if (count == 0) return Eigen::MatrixXd(0, minority.cols());
  if (m < 2) throw Error("SMOTE needs at least two minority rows");
  if (k < 1) throw Error("SMOTE needs k >= 1");
  const Eigen::Index kk = std::min<Eigen::Index>(k, m - 1);

  std::vector<std::vector<Eigen::Index>> nn(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<std::pair<double, Eigen::Index>> d;
    for (Eigen::Index j = 0; j < m; ++j)
      if (j != i) d.emplace_back((minority.row(i) - minority.row(j)).squaredNorm(), j);
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    for (Eigen::Index t = 0; t < kk; ++t) nn[static_cast<std::size_t>(i)].push_back(d[static_cast<std::size_t>(t)].second);
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick_row(0, m - 1), pick_nn(0, kk - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd out(count, minority.cols());
  for (int s = 0; s < count; ++s) {
    Eigen::Index i = pick_row(rng);
    Eigen::Index j = nn[static_cast<std::size_t>(i)][static_cast<std::size_t>(pick_nn(rng))];
    out.row(s) = minority.row(i) + u(rng) * (minority.row(j) - minority.row(i));
  }
  return out;
}

struct Balanced {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  int synthetic = 0;
  int minority_label = 1;
};

/// Appends SMOTE rows to the minority class until it reaches
/// target_ratio times the majority count.
inline Balanced balance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k, std::uint64_t seed,
                        double target_ratio = 1.0) {
  if (x.rows() != y.size()) throw Error("row count mismatch between X and y");
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg).push_back(i);
  bool minority_pos = pos.size() <= neg.size();
  const auto& minor = minority_pos ? pos : neg;
  const auto& major = minority_pos ? neg : pos;
  Balanced b;
  b.minority_label = minority_pos ? 1 : 0;
  int target = static_cast<int>(std::lround(target_ratio * static_cast<double>(major.size())));
  b.synthetic = std::max(0, target - static_cast<int>(minor.size()));
  Eigen::MatrixXd mx(static_cast<Eigen::Index>(minor.size()), x.cols());
  for (std::size_t i = 0; i < minor.size(); ++i) mx.row(static_cast<Eigen::Index>(i)) = x.row(minor[i]);
  Eigen::MatrixXd extra = smote(mx, b.synthetic, k, seed);
  b.x.resize(x.rows() + extra.rows(), x.cols());
  b.x << x, extra;
  b.y.resize(b.x.rows());
  b.y << y, Eigen::VectorXd::Constant(extra.rows(), b.minority_label);
  return b;
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

inline constexpr double kZ975 = 1.959963984540054;

struct LogitOptions {
  bool intercept = true;
  int max_iter = 100;
  double tol = 1e-8;               // max coefficient change
  double separation_bound = 30.0;  // |beta| beyond this means separation
};

struct LogitModel {
  std::vector<std::string> feature_names;  // slopes only
  bool intercept = true;
  Eigen::VectorXd beta;  // intercept first when present
  Eigen::VectorXd std_err, z, p_value, ci_low, ci_high;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double pseudo_r2 = 0.0;
  double aic = 0.0, bic = 0.0;
  double llr_p_value = 1.0;
  int n_obs = 0;
  int df_model = 0;
  int iterations = 0;
  std::vector<double> ll_trace;  // per accepted iteration, starting at beta = 0

  Eigen::Index offset() const { return intercept ? 1 : 0; }

  double coefficient(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return beta(offset() + static_cast<Eigen::Index>(i));
    throw Error("model has no feature '" + std::string(name) + "'");
  }

  /// Largest slope p-value and its feature index.
  std::pair<std::size_t, double> worst_slope() const {
    std::size_t idx = 0;
    double worst = -1.0;
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
      double p = p_value(offset() + static_cast<Eigen::Index>(i));
      if (p > worst) {
        worst = p;
        idx = i;
      }
    }
    return {idx, worst};
  }
};

namespace detail {

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x, bool intercept) {
  if (!intercept) return x;
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z << Eigen::VectorXd::Ones(x.rows()), x;
  return z;
}

/// sum y*eta - log(1 + e^eta), evaluated without overflow.
inline double logit_ll(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = z * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double e = eta(i);
    double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y(i) * e - log1pexp;
  }
  return ll;
}

inline double bernoulli_ll(double n, double pos) {
  double ll = 0.0;
  if (pos > 0) ll += pos * std::log(pos / n);
  if (n - pos > 0) ll += (n - pos) * std::log((n - pos) / n);
  return ll;
}

}  // namespace detail

inline double logistic(double eta) { return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta)); }

/// Newton-Raphson on the Bernoulli log-likelihood with step halving so the
/// likelihood never decreases. Standard errors come from the inverse
/// information at the optimum; p-values from a two-sided normal test.
inline LogitModel fit_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                            const LogitOptions& opt = {}) {
  if (static_cast<std::size_t>(x.cols()) != names.size()) throw Error("feature names do not match columns");
  if (x.rows() != y.size()) throw Error("row count mismatch between X and y");
  const Eigen::MatrixXd z = detail::with_intercept(x, opt.intercept);
  const Eigen::Index n = z.rows(), k = z.cols();
  if (k == 0) throw Error("logistic model has no parameters");
  if (n <= k) throw Error("logistic model needs more rows (" + std::to_string(n) + ") than parameters (" +
                          std::to_string(k) + ")");
  for (Eigen::Index i = 0; i < n; ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw Error("labels must be 0 or 1");
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (n > 0 && (x.col(j).array() == x(0, j)).all())
      throw Error("feature '" + names[static_cast<std::size_t>(j)] + "' is constant");

  auto name_of = [&](Eigen::Index j) {
    return opt.intercept && j == 0 ? std::string("intercept") : names[static_cast<std::size_t>(j - (opt.intercept ? 1 : 0))];
  };

  LogitModel m;
  m.feature_names = names;
  m.intercept = opt.intercept;
  m.n_obs = static_cast<int>(n);
  m.df_model = static_cast<int>(names.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double ll = detail::logit_ll(z, y, beta);
  m.ll_trace.push_back(ll);
  Eigen::MatrixXd info(k, k);
  bool converged = false;
  for (int it = 1; it <= opt.max_iter && !converged; ++it) {
    Eigen::VectorXd mu = (z * beta).unaryExpr([](double e) { return logistic(e); });
    Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    Eigen::VectorXd grad = z.transpose() * (y - mu);
    info = z.transpose() * w.asDiagonal() * z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13)
      throw Error("singular information matrix in logistic fit");
    Eigen::VectorXd step = ldlt.solve(grad);
    double scale = 1.0, next_ll = 0.0;
    Eigen::VectorXd next;
    for (int h = 0; h < 50; ++h, scale *= 0.5) {
      next = beta + scale * step;
      next_ll = detail::logit_ll(z, y, next);
      if (next_ll >= ll - 1e-12 * std::abs(ll)) break;
    }
    double change = (next - beta).cwiseAbs().maxCoeff();
    if (next_ll < ll) next_ll = ll;  // round-off only
    beta = next;
    ll = next_ll;
    m.ll_trace.push_back(ll);
    m.iterations = it;
    Eigen::Index big;
    if (beta.cwiseAbs().maxCoeff(&big) > opt.separation_bound)
      throw Error("perfect separation: coefficient of '" + name_of(big) + "' diverges");
    converged = change < opt.tol;
  }
  if (!converged) throw ConvergenceError("logistic fit did not converge", m.iterations);

  Eigen::VectorXd mu = (z * beta).unaryExpr([](double e) { return logistic(e); });
  Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  info = z.transpose() * w.asDiagonal() * z;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13)
    throw Error("singular information matrix in logistic fit");
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));

  m.beta = beta;
  m.std_err = cov.diagonal().cwiseSqrt();
  m.z = beta.cwiseQuotient(m.std_err);
  m.p_value = m.z.unaryExpr([](double v) { return std::erfc(std::abs(v) / std::sqrt(2.0)); });
  m.ci_low = beta - kZ975 * m.std_err;
  m.ci_high = beta + kZ975 * m.std_err;
  m.log_likelihood = ll;
  m.null_log_likelihood = detail::bernoulli_ll(static_cast<double>(n), y.sum());
  m.pseudo_r2 = m.null_log_likelihood != 0.0 ? 1.0 - ll / m.null_log_likelihood : 0.0;
  m.aic = 2.0 * static_cast<double>(k) - 2.0 * ll;
  m.bic = static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * ll;
  double llr = std::max(0.0, 2.0 * (ll - m.null_log_likelihood));
  m.llr_p_value = m.df_model > 0 ? boost::math::gamma_q(m.df_model / 2.0, llr / 2.0) : 1.0;
  return m;
}

struct Prediction {
  Eigen::VectorXd probability;
  Eigen::VectorXi label;  // 1 iff probability > 0.5
};

/// Columns of x are named by `columns`; the model's features are looked up
/// by name.
inline Prediction predict(const LogitModel& m, const Eigen::MatrixXd& x, const std::vector<std::string>& columns) {
  if (static_cast<std::size_t>(x.cols()) != columns.size()) throw Error("column names do not match X");
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(x.rows(), m.intercept ? m.beta(0) : 0.0);
  for (std::size_t f = 0; f < m.feature_names.size(); ++f) {
    auto it = std::find(columns.begin(), columns.end(), m.feature_names[f]);
    if (it == columns.end()) throw Error("unknown feature '" + m.feature_names[f] + "' for prediction");
    eta += m.beta(m.offset() + static_cast<Eigen::Index>(f)) * x.col(it - columns.begin());
  }
  Prediction p;
  p.probability = eta.unaryExpr([](double e) { return logistic(e); });
  p.label = p.probability.unaryExpr([](double v) { return v > 0.5 ? 1 : 0; });
  return p;
}

// ---------------------------------------------------------------------------
// Feature elimination
// ---------------------------------------------------------------------------

struct RfeStep {
  std::vector<std::string> features;
  std::string dropped;  // empty on the final step
  double p_value = 0.0;
};

struct RfeResult {
  LogitModel model;
  std::vector<RfeStep> trace;
};

/// Backward elimination on already balanced data: drop the slope with the
/// largest p-value while it is >= alpha.
inline RfeResult rfe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                     double alpha = 0.05, const LogitOptions& opt = {}) {
  if (names.empty()) throw Error("feature elimination needs at least one candidate");
  std::vector<Eigen::Index> active(names.size());
  std::iota(active.begin(), active.end(), 0);
  RfeResult r;
  auto trace_text = [&] {
    std::string s;
    for (const auto& st : r.trace)
      if (!st.dropped.empty()) s += (s.empty() ? "" : ", ") + st.dropped + " (p=" + fmt_num(st.p_value) + ")";
    return s;
  };
  while (true) {
    std::vector<std::string> cur;
    Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) {
      cur.push_back(names[static_cast<std::size_t>(active[i])]);
      xs.col(static_cast<Eigen::Index>(i)) = x.col(active[i]);
    }
    auto model = fit_logit(xs, y, cur, opt);
    auto [worst, p] = model.worst_slope();
    if (p < alpha) {
      r.trace.push_back({cur, "", p});
      r.model = std::move(model);
      return r;
    }
    r.trace.push_back({cur, cur[worst], p});
    active.erase(active.begin() + static_cast<long>(worst));
    if (active.empty()) throw Error("all features eliminated: " + trace_text());
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
  long tn = 0, fp = 0, fn = 0, tp = 0;
  std::array<double, 2> precision{}, recall{}, f1{};
  std::array<long, 2> support{};
  double accuracy = 0.0;

  long total() const { return tn + fp + fn + tp; }
};

/// Precision is 0 for a class that is never predicted; recall is 0 for a
/// class with no rows.
inline EvalReport evaluate_labels(const Eigen::VectorXi& predicted, const Eigen::VectorXd& truth) {
  if (predicted.size() != truth.size()) throw Error("prediction and truth lengths differ");
  EvalReport e;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    bool t = truth(i) > 0.5, p = predicted(i) == 1;
    (t ? (p ? e.tp : e.fn) : (p ? e.fp : e.tn))++;
  }
  auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
  e.support = {e.tn + e.fp, e.tp + e.fn};
  e.precision = {ratio(e.tn, e.tn + e.fn), ratio(e.tp, e.tp + e.fp)};
  e.recall = {ratio(e.tn, e.tn + e.fp), ratio(e.tp, e.tp + e.fn)};
  for (int c = 0; c < 2; ++c) e.f1[c] = ratio(2 * e.precision[c] * e.recall[c], e.precision[c] + e.recall[c]);
  e.accuracy = ratio(e.tp + e.tn, e.total());
  return e;
}

inline EvalReport evaluate(const LogitModel& m, const Eigen::MatrixXd& x, const std::vector<std::string>& columns,
                           const Eigen::VectorXd& y) {
  return evaluate_labels(predict(m, x, columns).label, y);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct Experiment {
  std::string name;
  std::vector<std::string> features;
  bool next_week = false;
};

inline Experiment contemporaneous_experiment() { return {"contemporaneous", non_market_features(), false}; }
inline Experiment predictive_experiment() { return {"predictive", kFeatureNames, true}; }

struct ExperimentResult {
  Experiment experiment;
  int rows = 0, positives = 0, synthetic = 0;
  std::optional<RfeResult> rfe;
  std::optional<EvalReport> eval;
  std::string error;  // set when no model could be fitted
};

/// Standardise on the raw rows, balance with SMOTE, eliminate features and
/// evaluate on the raw (standardised, unbalanced) rows. Fit failures are
/// recorded in the result.
inline ExperimentResult run_experiment(const FeatureMatrix& fm, const Experiment& ex, double alpha, std::uint64_t seed,
                                       int smote_k = 5) {
  ExperimentResult r{ex, 0, 0, 0, std::nullopt, std::nullopt, {}};
  FeatureMatrix rows = ex.next_week ? fm.predictive() : fm;
  r.rows = static_cast<int>(rows.rows.size());
  try {
    if (rows.rows.empty()) throw Error("no rows with a " + std::string(ex.next_week ? "next-week " : "") + "label");
    Eigen::MatrixXd raw = rows.design(ex.features);
    Eigen::VectorXd y = rows.labels(ex.next_week);
    r.positives = static_cast<int>(y.sum());
    auto st = Standardizer::fit(raw, ex.features);
    Eigen::MatrixXd x = st.apply(raw);
    auto bal = balance(x, y, smote_k, derive_seed(seed, "smote-" + ex.name));
    r.synthetic = bal.synthetic;
    r.rfe = rfe(bal.x, bal.y, ex.features, alpha);
    r.eval = evaluate(r.rfe->model, x, ex.features, y);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const LogitModel& m) {
  nlohmann::json coefs = nlohmann::json::array();
  auto row = [&](const std::string& name, Eigen::Index j) {
    coefs.push_back({{"feature", name},
                     {"coef", m.beta(j)},
                     {"std_err", m.std_err(j)},
                     {"z", m.z(j)},
                     {"p_value", m.p_value(j)},
                     {"ci_low", m.ci_low(j)},
                     {"ci_high", m.ci_high(j)}});
  };
  if (m.intercept) row("intercept", 0);
  for (std::size_t i = 0; i < m.feature_names.size(); ++i) row(m.feature_names[i], m.offset() + static_cast<Eigen::Index>(i));
  return {{"n_obs", m.n_obs},
          {"df_model", m.df_model},
          {"df_resid", m.n_obs - m.df_model - (m.intercept ? 1 : 0)},
          {"intercept", m.intercept},
          {"log_likelihood", m.log_likelihood},
          {"ll_null", m.null_log_likelihood},
          {"pseudo_r2", m.pseudo_r2},
          {"llr_p_value", m.llr_p_value},
          {"aic", m.aic},
          {"bic", m.bic},
          {"iterations", m.iterations},
          {"coefficients", coefs}};
}

inline nlohmann::json to_json(const EvalReport& e) {
  auto cls = [&](int c) {
    return nlohmann::json{{"precision", e.precision[static_cast<std::size_t>(c)]},
                          {"recall", e.recall[static_cast<std::size_t>(c)]},
                          {"f1", e.f1[static_cast<std::size_t>(c)]},
                          {"support", e.support[static_cast<std::size_t>(c)]}};
  };
  return {{"confusion", {{"tn", e.tn}, {"fp", e.fp}, {"fn", e.fn}, {"tp", e.tp}}},
          {"class_0", cls(0)},
          {"class_1", cls(1)},
          {"accuracy", e.accuracy}};
}

inline nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json j{{"experiment", r.experiment.name},
                   {"target", r.experiment.next_week ? "label_next" : "label"},
                   {"candidates", r.experiment.features},
                   {"rows", r.rows},
                   {"positives", r.positives},
                   {"synthetic_rows", r.synthetic},
                   {"status", r.error.empty() ? "ok" : "failed"}};
  if (!r.error.empty()) j["error"] = r.error;
  if (r.rfe) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : r.rfe->trace)
      trace.push_back({{"features", s.features}, {"dropped", s.dropped}, {"max_p_value", s.p_value}});
    j["elimination"] = trace;
    j["model"] = to_json(r.rfe->model);
  }
  if (r.eval) j["evaluation"] = to_json(*r.eval);
  return j;
}

}  // namespace newsnet

#pragma once
// Weekly volatility indices: rolling z-scores and the dislocation label.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsnet/core.hpp"

namespace newsnet {

inline const std::array<std::string, 4> kIndexNames = {"VIX", "VIXFX", "MRI", "MOVE"};
inline constexpr int kZWindow = 13;
inline constexpr double kDislocationMeanThreshold = 0.5;

struct Observation {
  Date week_end;
  double value = 0.0;
};

struct IndexSeries {
  std::string name;
  std::vector<Observation> observations;  // strictly increasing, multiples of a week apart

  void validate() const {
    for (std::size_t i = 0; i < observations.size(); ++i) {
      if (!std::isfinite(observations[i].value))
        throw Error(name + ": nonfinite value at " + observations[i].week_end.str());
      if (i == 0) continue;
      long gap = days_between(observations[i - 1].week_end, observations[i].week_end);
      if (gap <= 0) throw Error(name + ": dates not strictly increasing at " + observations[i].week_end.str());
      if (gap % 7 != 0) throw Error(name + ": observations not weekly at " + observations[i].week_end.str());
    }
  }
};

/// CSV `week_end,value`. Dates are mapped to their week-ending Sunday.
inline IndexSeries parse_index_csv(const CsvTable& t, std::string name) {
  IndexSeries s{std::move(name), {}};
  auto dc = t.column("week_end"), vc = t.column("value");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() <= std::max(dc, vc)) throw ParseError(s.name + ": short row " + std::to_string(r + 2));
    s.observations.push_back({Date::parse(row[dc]).week_label(), parse_double(row[vc])});
  }
  s.validate();
  return s;
}

inline IndexSeries load_index_csv(const std::filesystem::path& path, std::string name) {
  try {
    return parse_index_csv(read_csv(path), std::move(name));
  } catch (const ParseError& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

struct ZPoint {
  Date week_end;
  std::optional<double> z;
  std::string error;  // set when z is undefined
};

/// z_t = (x_t - mean) / sd over the `window` preceding weeks (current week
/// excluded, population sd). Records start once `window` prior observations
/// exist; a gap inside the window or zero variance gives an error record.
inline std::vector<ZPoint> zscore(const IndexSeries& s, int window = kZWindow) {
  if (window < 2) throw Error("z-score window must be at least 2");
  if (static_cast<int>(s.observations.size()) <= window)
    throw Error(s.name + ": " + std::to_string(s.observations.size()) + " observations, need more than " +
                std::to_string(window));
  s.validate();
  std::vector<ZPoint> out;
  const auto& obs = s.observations;
  for (std::size_t t = static_cast<std::size_t>(window); t < obs.size(); ++t) {
    ZPoint p{obs[t].week_end, std::nullopt, {}};
    std::size_t first = t - static_cast<std::size_t>(window);
    if (days_between(obs[first].week_end, obs[t].week_end) != 7L * window) {
      p.error = "missing weeks in the " + std::to_string(window) + "-week window";
      out.push_back(std::move(p));
      continue;
    }
    double mean = 0.0;
    for (std::size_t i = first; i < t; ++i) mean += obs[i].value;
    mean /= window;
    double var = 0.0;
    for (std::size_t i = first; i < t; ++i) var += (obs[i].value - mean) * (obs[i].value - mean);
    var /= window;
    if (!(var > 0.0))
      p.error = "zero variance in the " + std::to_string(window) + "-week window";
    else
      p.z = (obs[t].value - mean) / std::sqrt(var);
    out.push_back(std::move(p));
  }
  return out;
}

struct PanelWeek {
  Date week_end;
  std::map<std::string, ZPoint> z;  // keyed by index name
};

/// Weeks with a z record for every index. Weeks missing from some index are
/// left out with a diagnostic.
inline std::vector<PanelWeek> build_panel(const std::map<std::string, std::vector<ZPoint>>& series, Diagnostics& diag) {
  for (const auto& name : kIndexNames)
    if (!series.count(name)) throw Error("missing index series " + name);
  std::map<Date, PanelWeek> weeks;
  for (const auto& [name, pts] : series)
    for (const auto& p : pts) {
      auto& w = weeks[p.week_end];
      w.week_end = p.week_end;
      w.z[name] = p;
    }
  std::vector<PanelWeek> out;
  for (auto& [d, w] : weeks) {
    if (w.z.size() != kIndexNames.size()) {
      std::string missing;
      for (const auto& name : kIndexNames)
        if (!w.z.count(name)) missing += (missing.empty() ? "" : ",") + name;
      diag.warn("week " + d.str() + " unlabeled: no z-score for " + missing);
      continue;
    }
    out.push_back(std::move(w));
  }
  return out;
}

struct DislocationLabel {
  Date week_end;
  std::array<std::optional<double>, 4> z;  // in kIndexNames order
  std::optional<double> z_mean;
  int label = 0;
  bool undefined = false;  // some z missing; label forced to 0
};

/// 1 iff all four z-scores are strictly positive and their mean exceeds the
/// threshold.
inline std::vector<DislocationLabel> label_dislocations(const std::vector<PanelWeek>& panel,
                                                        double mean_threshold = kDislocationMeanThreshold) {
  std::vector<DislocationLabel> out;
  for (const auto& w : panel) {
    DislocationLabel l{w.week_end, {}, std::nullopt, 0, false};
    bool all_positive = true;
    double sum = 0.0;
    for (std::size_t i = 0; i < kIndexNames.size(); ++i) {
      auto it = w.z.find(kIndexNames[i]);
      if (it == w.z.end()) throw Error("week " + w.week_end.str() + " has no " + kIndexNames[i] + " z-score");
      l.z[i] = it->second.z;
      if (!l.z[i]) {
        l.undefined = true;
        continue;
      }
      sum += *l.z[i];
      all_positive = all_positive && *l.z[i] > 0.0;
    }
    if (!l.undefined) {
      l.z_mean = sum / 4.0;
      l.label = all_positive && *l.z_mean > mean_threshold ? 1 : 0;
    }
    out.push_back(l);
  }
  return out;
}

inline const CsvRow kLabelCsvHeader = {"week_end", "z_vix", "z_vixfx", "z_mri", "z_move", "z_mean", "label"};

inline std::string labels_csv(const std::vector<DislocationLabel>& labels) {
  std::string out = csv_line(kLabelCsvHeader);
  auto opt = [](const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); };
  for (const auto& l : labels)
    out += csv_line({l.week_end.str(), opt(l.z[0]), opt(l.z[1]), opt(l.z[2]), opt(l.z[3]), opt(l.z_mean),
                     std::to_string(l.label)});
  return out;
}

inline std::vector<DislocationLabel> parse_labels_csv(const CsvTable& t) {
  std::vector<DislocationLabel> out;
  std::array<std::size_t, 4> zc{t.column("z_vix"), t.column("z_vixfx"), t.column("z_mri"), t.column("z_move")};
  auto wc = t.column("week_end"), mc = t.column("z_mean"), lc = t.column("label");
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<double>(parse_double(s)); };
  for (const auto& row : t.rows) {
    DislocationLabel l;
    l.week_end = Date::parse(row.at(wc));
    for (std::size_t i = 0; i < 4; ++i) {
      l.z[i] = opt(row.at(zc[i]));
      if (!l.z[i]) l.undefined = true;
    }
    l.z_mean = opt(row.at(mc));
    l.label = static_cast<int>(parse_long(row.at(lc)));
    out.push_back(l);
  }
  return out;
}

}  // namespace newsnet

#pragma once
// Fixture corpus of pre-extracted article records: parsing, validation,
// weekly grouping and rank-weighted sentiment.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsnet/core.hpp"

namespace newsnet {

inline constexpr int kMaxRank = 5;

/// Mean of 1/rank-weighted sentiments for a five-entity article with all
/// sentiments at +1: (1 + 0.8 + 0.6 + 0.4 + 0.2) / 5.
inline constexpr double kMaxMeanWeightedSentiment = 0.6;

struct EntityMention {
  std::string text;  // normalized
  int rank = 1;      // 1..5, 1 most important
  double sentiment = 0.0;
};

struct ArticleRecord {
  std::string article_id;
  Date week_end;
  std::vector<EntityMention> entities;  // sorted by rank
  std::string summary;
  std::string abstract;
  double overall_sentiment = 0.0;

  /// Entity at the given rank, if present.
  const EntityMention* at_rank(int rank) const {
    for (const auto& e : entities)
      if (e.rank == rank) return &e;
    return nullptr;
  }
};

struct WeeklyCorpus {
  Date week_end;
  std::vector<ArticleRecord> articles;
};

/// Lowercase, collapse internal whitespace, strip punctuation at both ends.
inline std::string normalize_entity(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  }
  auto is_edge = [](unsigned char c) { return c < 0x80 && (std::ispunct(c) || std::isspace(c)); };
  std::size_t b = 0, e = out.size();
  while (b < e && is_edge(out[b])) ++b;
  while (e > b && is_edge(out[e - 1])) --e;
  return out.substr(b, e - b);
}

inline double weighted_entity_sentiment(const EntityMention& m) { return m.sentiment / m.rank; }

/// Mean rank-weighted sentiment over the present entities, rescaled so that
/// a five-entity all-positive article maps to 1, clipped to [-1, 1].
inline double article_sentiment(const ArticleRecord& a) {
  if (a.entities.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : a.entities) sum += weighted_entity_sentiment(e);
  double v = sum / static_cast<double>(a.entities.size()) / kMaxMeanWeightedSentiment;
  return std::clamp(v, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Validates one JSON object against the article schema. Throws ParseError
/// describing the first violation.
inline ArticleRecord parse_article(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  auto str_field = [&](const char* key, bool required) -> std::string {
    if (!j.contains(key)) {
      if (required) throw ParseError(std::string("missing field '") + key + "'");
      return {};
    }
    if (!j[key].is_string()) throw ParseError(std::string("field '") + key + "' not a string");
    return j[key].get<std::string>();
  };
  auto num_field = [&](const nlohmann::json& obj, const char* key) -> double {
    if (!obj.contains(key) || !obj[key].is_number())
      throw ParseError(std::string("field '") + key + "' missing or not a number");
    return obj[key].get<double>();
  };

  ArticleRecord a;
  a.article_id = str_field("article_id", true);
  if (a.article_id.empty()) throw ParseError("empty article_id");
  a.week_end = Date::parse(str_field("week_end", true)).week_label();
  a.summary = str_field("summary", false);
  a.abstract = str_field("abstract", false);
  a.overall_sentiment = j.contains("overall_sentiment") ? num_field(j, "overall_sentiment") : 0.0;
  if (!(a.overall_sentiment >= -1.0 && a.overall_sentiment <= 1.0))
    throw ParseError("overall_sentiment out of [-1, 1]");

  if (!j.contains("entities") || !j["entities"].is_array())
    throw ParseError("field 'entities' missing or not an array");
  const auto& ents = j["entities"];
  if (ents.empty()) throw ParseError("no entities");
  if (ents.size() > kMaxRank) throw ParseError("more than 5 entities");

  std::set<int> ranks;
  std::set<std::string> texts;
  for (const auto& ej : ents) {
    if (!ej.is_object() || !ej.contains("text") || !ej["text"].is_string())
      throw ParseError("entity without string 'text'");
    if (!ej.contains("rank") || !ej["rank"].is_number_integer())
      throw ParseError("entity without integer 'rank'");
    EntityMention m;
    m.text = normalize_entity(ej["text"].get<std::string>());
    m.rank = ej["rank"].get<int>();
    m.sentiment = num_field(ej, "sentiment");
    if (m.text.empty()) throw ParseError("entity text empty after normalization");
    if (m.rank < 1 || m.rank > kMaxRank)
      throw ParseError("entity '" + m.text + "' rank " + std::to_string(m.rank) + " out of 1..5");
    if (!(m.sentiment >= -1.0 && m.sentiment <= 1.0))
      throw ParseError("entity '" + m.text + "' sentiment out of [-1, 1]");
    if (!ranks.insert(m.rank).second)
      throw ParseError("duplicate rank " + std::to_string(m.rank));
    if (!texts.insert(m.text).second) throw ParseError("duplicate entity '" + m.text + "'");
    a.entities.push_back(std::move(m));
  }
  std::sort(a.entities.begin(), a.entities.end(),
            [](const auto& x, const auto& y) { return x.rank < y.rank; });
  return a;
}

inline nlohmann::json to_json(const ArticleRecord& a) {
  nlohmann::json ents = nlohmann::json::array();
  for (const auto& e : a.entities)
    ents.push_back({{"text", e.text}, {"rank", e.rank}, {"sentiment", e.sentiment}});
  return {{"article_id", a.article_id}, {"week_end", a.week_end.str()},
          {"entities", ents},           {"summary", a.summary},
          {"abstract", a.abstract},     {"overall_sentiment", a.overall_sentiment}};
}

/// Groups validated articles by week, ascending. Articles in excluded weeks
/// are removed. Throws on duplicated article ids or an empty result.
inline std::vector<WeeklyCorpus> group_by_week(std::vector<ArticleRecord> articles,
                                               const std::set<Date>& exclude_weeks = {}) {
  std::set<std::string> ids;
  for (const auto& a : articles)
    if (!ids.insert(a.article_id).second) throw Error("duplicated article_id '" + a.article_id + "'");

  std::map<Date, WeeklyCorpus> weeks;
  for (auto& a : articles) {
    if (exclude_weeks.count(a.week_end)) continue;
    auto& w = weeks[a.week_end];
    w.week_end = a.week_end;
    w.articles.push_back(std::move(a));
  }
  if (weeks.empty()) throw Error("corpus has zero valid articles");
  std::vector<WeeklyCorpus> out;
  for (auto& [d, w] : weeks) out.push_back(std::move(w));
  return out;
}

/// Parses newline-delimited JSON. Malformed lines are rejected individually
/// with a diagnostic; duplicated ids or zero valid articles are fatal.
inline std::vector<WeeklyCorpus> parse_corpus(std::istream& in, Diagnostics& diag,
                                              const std::set<Date>& exclude_weeks = {}) {
  std::vector<ArticleRecord> articles;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      articles.push_back(parse_article(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      diag.warn("line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
    } catch (const ParseError& e) {
      diag.warn("line " + std::to_string(lineno) + ": article rejected: " + e.what());
    }
  }
  return group_by_week(std::move(articles), exclude_weeks);
}

inline std::vector<WeeklyCorpus> load_corpus(const std::filesystem::path& path, Diagnostics& diag,
                                             const std::set<Date>& exclude_weeks = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus " + path.string());
  return parse_corpus(in, diag, exclude_weeks);
}

inline std::size_t article_count(const std::vector<WeeklyCorpus>& weeks) {
  std::size_t n = 0;
  for (const auto& w : weeks) n += w.articles.size();
  return n;
}

}  // namespace newsnet

// newsnet: run pipeline stages, generate synthetic inputs, cluster word vectors.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iostream>

#include "newsnet/pipeline.hpp"
#include "newsnet/synthetic.hpp"

using namespace newsnet;

namespace {

struct RunArgs {
  std::string stage = "all";
  std::string config;
  std::string corpus;
  std::vector<std::string> indices;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string exclude_weeks;
  std::string start_date;
  std::optional<int> k_min, k_max, knee_seeds, smote_k, min_appearances;
  std::optional<double> beta, stability_threshold, dislocation_threshold, alpha;
  std::string edge_threshold;
  std::string experiment;
  std::optional<int> dims, walk_length, walks_per_node, window, negatives, epochs;
  std::optional<double> p, q, learning_rate;
  bool force = false;
  bool quiet = false;
};

template <typename T>
void set_if(const std::optional<T>& v, T& target) {
  if (v) target = *v;
}

PipelineConfig build_config(const RunArgs& a) {
  PipelineConfig c = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (!a.corpus.empty()) c.corpus = a.corpus;
  for (const auto& arg : a.indices) {
    auto eq = arg.find('=');
    if (eq == std::string::npos) throw Error("--index expects NAME=PATH, got '" + arg + "'");
    std::string name = arg.substr(0, eq);
    if (std::find(kIndexNames.begin(), kIndexNames.end(), name) == kIndexNames.end())
      throw Error("unknown index '" + name + "' (expected VIX, VIXFX, MRI or MOVE)");
    c.indices[name] = arg.substr(eq + 1);
  }
  if (!a.out.empty()) c.output_dir = a.out;
  set_if(a.seed, c.seed);
  if (!a.exclude_weeks.empty())
    for (const auto& d : split(a.exclude_weeks, ',')) c.exclude_weeks.insert(Date::parse(d).week_label());
  if (!a.start_date.empty()) c.start_date = Date::parse(a.start_date);
  set_if(a.k_min, c.k_min);
  set_if(a.k_max, c.k_max);
  set_if(a.knee_seeds, c.knee_seeds);
  set_if(a.smote_k, c.smote_k);
  set_if(a.min_appearances, c.min_appearances);
  set_if(a.beta, c.beta);
  set_if(a.stability_threshold, c.stability_threshold);
  set_if(a.dislocation_threshold, c.dislocation_threshold);
  set_if(a.alpha, c.alpha);
  if (!a.edge_threshold.empty()) c.edge_threshold = EdgeThreshold::parse(a.edge_threshold);
  if (a.experiment == "both")
    c.experiments = {"contemporaneous", "predictive"};
  else if (!a.experiment.empty())
    c.experiments = {a.experiment};
  set_if(a.dims, c.walk.dims);
  set_if(a.walk_length, c.walk.walk_length);
  set_if(a.walks_per_node, c.walk.walks_per_node);
  set_if(a.window, c.walk.window);
  set_if(a.negatives, c.walk.negatives);
  set_if(a.epochs, c.walk.epochs);
  set_if(a.p, c.walk.p);
  set_if(a.q, c.walk.q);
  set_if(a.learning_rate, c.walk.learning_rate);
  return c;
}

void print_result(const StageResult& r, bool quiet) {
  if (quiet) return;
  std::cout << r.stage << ": " << (r.skipped ? "up to date" : "done") << " (" << r.files << " files";
  if (!r.diagnostics.empty()) std::cout << ", " << r.diagnostics.size() << " warnings";
  std::cout << ")\n";
  for (const auto& d : r.diagnostics) std::cout << "  warning: " << d << '\n';
}

int run(const RunArgs& a) {
  Pipeline p(build_config(a));
  auto t0 = std::chrono::steady_clock::now();
  if (a.stage == "all") {
    for (const auto& r : p.run_all(a.force)) print_result(r, a.quiet);
  } else {
    print_result(p.run_stage(a.stage, a.force), a.quiet);
  }
  if (!a.quiet) {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "artifacts in " << p.config().output_dir.string() << " (" << fmt_num(std::round(s * 100) / 100) << " s)\n";
  }
  return 0;
}

int synth(const fs::path& out, int weeks, std::uint64_t seed, bool drifting) {
  if (drifting) {
    auto dc = drifting_corpus(weeks, 10, seed);
    write_file_atomic(out / "corpus.jsonl", corpus_jsonl(dc.articles));
    std::string truth = csv_line({"week_end", "members"});
    for (std::size_t w = 0; w < dc.weeks.size(); ++w) {
      std::string m;
      for (const auto& n : dc.drifting[w]) m += (m.empty() ? "" : ";") + n;
      truth += csv_line({dc.weeks[w].str(), m});
    }
    write_file_atomic(out / "drifting_members.csv", truth);
    std::cout << "wrote " << dc.articles.size() << " articles over " << weeks << " weeks to " << out.string() << '\n';
    return 0;
  }
  auto fx = synthetic_fixture(weeks, seed);
  write_file_atomic(out / "corpus.jsonl", corpus_jsonl(fx.articles));
  nlohmann::json idx;
  for (const auto& [name, s] : fx.indices) {
    write_file_atomic(out / (name + ".csv"), index_csv(s));
    idx[name] = name + ".csv";
  }
  nlohmann::json cfg = {{"corpus", "corpus.jsonl"}, {"indices", idx}, {"output_dir", "out"}, {"seed", 42}};
  write_file_atomic(out / "config.json", cfg.dump(2) + "\n");
  std::cout << "wrote " << fx.articles.size() << " articles over " << weeks << " weeks, 4 index series and config.json to "
            << out.string() << '\n';
  return 0;
}

int wordvec(const std::string& path, double d_coph, const std::string& pca_out) {
  auto wv = load_word_vectors(path);
  auto cl = cluster_word_vectors(wv, d_coph);
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : cl.clusters) clusters.push_back({{"representative", c.representative}, {"members", c.members}});
  std::cout << nlohmann::json{{"tokens", wv.tokens.size()}, {"d_coph", d_coph}, {"clusters", clusters}}.dump(2) << '\n';
  if (!pca_out.empty()) {
    write_file_atomic(pca_out, pca_csv(wv.tokens, pca_coordinates(wv.vectors)));
  }
  return 0;
}

int keyword(const std::string& out, const std::string& word) {
  PipelineConfig c;
  c.output_dir = out;
  auto weeks = stages::load_communities(c);
  std::cout << keyword_json(word, track_keyword(word, weeks)).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weekly news entity networks, narratives and market dislocation models"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run one pipeline stage, or all of them");
  std::vector<std::string> stage_names = kStages;
  stage_names.push_back("all");
  run_cmd->add_option("stage", ra.stage, "Stage name or 'all'")->check(CLI::IsMember(stage_names));
  run_cmd->add_option("--config", ra.config, "JSON config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--corpus", ra.corpus, "Article corpus (JSON lines)");
  run_cmd->add_option("--index", ra.indices, "Index CSV as NAME=PATH (repeatable)");
  run_cmd->add_option("--out", ra.out, "Output directory");
  run_cmd->add_option("--seed", ra.seed, "Master seed");
  run_cmd->add_option("--exclude-weeks", ra.exclude_weeks, "Comma-separated week dates to drop");
  run_cmd->add_option("--start-date", ra.start_date, "First date of the feature matrix");
  run_cmd->add_option("--k-min", ra.k_min, "Smallest fuzzy k");
  run_cmd->add_option("--k-max", ra.k_max, "Largest fuzzy k");
  run_cmd->add_option("--knee-seeds", ra.knee_seeds, "NMF seeds per week for the knee vote");
  run_cmd->add_option("--beta", ra.beta, "Diffusion kernel beta");
  run_cmd->add_option("--stability-threshold", ra.stability_threshold, "Node stability cut");
  run_cmd->add_option("--edge-threshold", ra.edge_threshold, "Edge weight cut as num/den");
  run_cmd->add_option("--dislocation-threshold", ra.dislocation_threshold, "Mean z-score cut");
  run_cmd->add_option("--experiment", ra.experiment, "Regression experiment")
      ->check(CLI::IsMember({"contemporaneous", "predictive", "both"}));
  run_cmd->add_option("--alpha", ra.alpha, "Elimination p-value cut");
  run_cmd->add_option("--smote-k", ra.smote_k, "SMOTE neighbours");
  run_cmd->add_option("--min-appearances", ra.min_appearances, "Weeks in the top 3 to keep an entity in the timeline");
  run_cmd->add_option("--dims", ra.dims, "Embedding dimensions");
  run_cmd->add_option("--walk-length", ra.walk_length, "Random walk length");
  run_cmd->add_option("--walks-per-node", ra.walks_per_node, "Walks started per node");
  run_cmd->add_option("--p", ra.p, "node2vec return parameter");
  run_cmd->add_option("--q", ra.q, "node2vec in-out parameter");
  run_cmd->add_option("--window", ra.window, "Skip-gram window");
  run_cmd->add_option("--negatives", ra.negatives, "Negative samples per pair");
  run_cmd->add_option("--epochs", ra.epochs, "Training epochs");
  run_cmd->add_option("--learning-rate", ra.learning_rate, "Initial learning rate");
  run_cmd->add_flag("--force", ra.force, "Replace artifacts built with a different configuration");
  run_cmd->add_flag("--quiet", ra.quiet, "Print nothing on success");

  std::string synth_out;
  int synth_weeks = 8;
  std::uint64_t synth_seed = 7;
  bool synth_drifting = false;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus, index CSVs and config");
  synth_cmd->add_option("--out", synth_out, "Directory to write")->required();
  synth_cmd->add_option("--weeks", synth_weeks, "Number of news weeks")->check(CLI::Range(1, 520));
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_flag("--drifting", synth_drifting, "Drifting-community corpus instead");

  std::string wv_path, wv_pca;
  double d_coph = 0.85;
  auto* wv_cmd = app.add_subcommand("wordvec", "Cluster word vectors by average cosine linkage");
  wv_cmd->add_option("vectors", wv_path, "Text file of 'token v1 v2 ...' lines")->required()->check(CLI::ExistingFile);
  wv_cmd->add_option("--d-coph", d_coph, "Cophenetic distance cut");
  wv_cmd->add_option("--pca", wv_pca, "Write 2-D PCA coordinates here");

  std::string kw_out, kw_word;
  auto* kw_cmd = app.add_subcommand("keyword", "Follow communities containing a keyword across weeks");
  kw_cmd->add_option("keyword", kw_word, "Entity to follow")->required();
  kw_cmd->add_option("--out", kw_out, "Pipeline output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(ra);
    if (*synth_cmd) return synth(synth_out, synth_weeks, synth_seed, synth_drifting);
    if (*wv_cmd) return wordvec(wv_path, d_coph, wv_pca);
    if (*kw_cmd) return keyword(kw_out, normalize_entity(kw_word));
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

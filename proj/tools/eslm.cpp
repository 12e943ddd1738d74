// Command-line surface for the entity representation pipeline: synthetic data
// generation, model training, and the three evaluation reports (clustering,
// ranking, prior-vs-rank), each with a JSON run manifest.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eslm/eslm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string hex64(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Globals {
  uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
};

class Manifest {
 public:
  Manifest(const std::string& command, const Globals& g) {
    j_["command"] = command;
    j_["version"] = kVersion;
    j_["seed"] = g.seed;
    j_["threads"] = g.threads;
    j_["config"] = json::object();
    j_["inputs"] = json::object();
    j_["outputs"] = json::object();
    j_["wall_times_sec"] = json::object();
    path_ = fs::path(g.out_dir) / (command + "_manifest.json");
  }

  void config(const std::string& key, json value) { j_["config"][key] = std::move(value); }
  void input(const fs::path& p) {
    j_["inputs"][p.string()] = "fnv64:" + hex64(eslm::hash_file(p.string()));
  }
  void output(const fs::path& p) {
    j_["outputs"][p.string()] = "fnv64:" + hex64(eslm::hash_file(p.string()));
  }
  void stage(const std::string& name, double sec) { j_["wall_times_sec"][name] = sec; }

  void write() {
    j_["wall_times_sec"]["total"] = total_.seconds();
    std::ofstream out(path_);
    if (!out) throw eslm::Error("cannot write manifest: " + path_.string());
    out << j_.dump(2) << '\n';
  }

 private:
  json j_;
  fs::path path_;
  Timer total_;
};

// "a..b" (inclusive) or a comma-separated list.
std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  const size_t dots = s.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(s.substr(0, dots));
    const int hi = std::stoi(s.substr(dots + 2));
    if (lo > hi) throw eslm::Error("bad range '" + s + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw eslm::Error("bad list '" + s + "'");
  return out;
}

void write_tsv(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw eslm::Error("cannot open for writing: " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

eslm::Corpus load_corpus_cli(const std::string& path, int64_t max_vocab,
                             const std::string& stopwords_path) {
  eslm::CorpusConfig cfg;
  cfg.max_vocab_size = max_vocab;
  if (!stopwords_path.empty()) cfg.stopwords = eslm::load_stopwords(stopwords_path);
  return eslm::load_corpus(path, cfg);
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string corpus, associations, stopwords;
  int64_t max_vocab = 60000;
};

int run_ingest(const IngestArgs& a, const Globals& g) {
  Manifest manifest("ingest", g);
  manifest.config("corpus", a.corpus);
  manifest.config("associations", a.associations);
  manifest.config("max_vocab", a.max_vocab);
  manifest.config("stopwords", a.stopwords);
  manifest.input(a.corpus);
  manifest.input(a.associations);
  if (!a.stopwords.empty()) manifest.input(a.stopwords);

  const eslm::Corpus corpus = load_corpus_cli(a.corpus, a.max_vocab, a.stopwords);
  const eslm::AssociationIndex assoc = eslm::load_associations(a.associations, corpus);

  const fs::path vocab_path = fs::path(g.out_dir) / "vocabulary.tsv";
  std::vector<std::string> lines{"term\tfrequency"};
  for (int t = 0; t < corpus.vocabulary.size(); ++t)
    lines.push_back(corpus.vocabulary.terms[t] + '\t' +
                    std::to_string(corpus.vocabulary.frequencies[t]));
  write_tsv(vocab_path, lines);

  std::cout << "documents\t" << corpus.num_documents() << '\n'
            << "tokens\t" << corpus.total_tokens() << '\n'
            << "vocabulary\t" << corpus.vocabulary.size() << '\n'
            << "stopword_types_removed\t" << corpus.vocabulary.stopwords_removed << '\n'
            << "entities\t" << assoc.num_entities() << '\n'
            << "associations\t" << assoc.num_edges() << '\n';

  manifest.output(vocab_path);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------

int run_synth(eslm::OrgConfig cfg, const Globals& g) {
  cfg.seed = g.seed;
  Manifest manifest("synth", g);
  manifest.config("n_entities", cfg.n_entities);
  manifest.config("n_committees", cfg.n_committees);
  manifest.config("n_rank_levels", cfg.n_rank_levels);
  manifest.config("vocab_size", cfg.vocab_size);
  manifest.config("n_docs", cfg.n_docs);
  manifest.config("doc_length_mean", cfg.doc_length_mean);
  manifest.config("topic_concentration", cfg.topic_concentration);
  manifest.config("coauthor_rate", cfg.coauthor_rate);
  manifest.config("docs_per_rank_multiplier", cfg.docs_per_rank_multiplier);

  const eslm::OrgData org = eslm::generate_org(cfg);
  const fs::path dir(g.out_dir);
  const fs::path corpus_path = dir / "corpus.jsonl";
  const fs::path assoc_path = dir / "associations.tsv";
  const fs::path groups_path = dir / "groups.tsv";
  const fs::path ranks_path = dir / "ranks.tsv";
  eslm::write_org(org, corpus_path.string(), assoc_path.string(), groups_path.string(),
                  ranks_path.string());
  for (const auto& p : {corpus_path, assoc_path, groups_path, ranks_path}) manifest.output(p);
  manifest.write();
  std::cout << "wrote " << org.docs.size() << " documents, " << org.associations.size()
            << " associations, " << cfg.n_entities << " entities\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string method;
  std::string corpus, associations, stopwords;
  int64_t max_vocab = 60000;
  std::string k_list = "32,64,128,256";
  // w2v / doc2vec
  int window = 5, negatives = 5, epochs = 5;
  double w2v_lr = 0.025;
  // lda
  double alpha = 0.1, beta = 0.1;
  int iterations = 100;
  // sert
  double lr = 0.01;
  int batch_size = 256, max_epochs = 100, patience = 5, softmax_samples = 0;
  double validation_fraction = 0.1;
};

int run_train(const TrainArgs& a, const Globals& g) {
  const eslm::Method method = eslm::parse_method(a.method);
  Manifest manifest("train", g);
  manifest.config("method", a.method);
  manifest.config("k", a.k_list);
  manifest.config("corpus", a.corpus);
  manifest.config("associations", a.associations);
  manifest.config("max_vocab", a.max_vocab);
  manifest.config("stopwords", a.stopwords);

  const std::vector<int> ks = parse_int_list(a.k_list);
  const bool needs_corpus = method != eslm::Method::GraphPca && method != eslm::Method::Random;

  eslm::Corpus corpus;
  eslm::AssociationIndex assoc;
  if (needs_corpus) {
    if (a.corpus.empty()) throw eslm::Error("train: --corpus is required for method " + a.method);
    manifest.input(a.corpus);
    if (!a.stopwords.empty()) manifest.input(a.stopwords);
    corpus = load_corpus_cli(a.corpus, a.max_vocab, a.stopwords);
  }
  if (a.associations.empty()) throw eslm::Error("train: --associations is required");
  manifest.input(a.associations);
  assoc = needs_corpus ? eslm::load_associations(a.associations, corpus)
                       : eslm::load_associations_standalone(a.associations);

  const fs::path dir(g.out_dir);
  for (const int k : ks) {
    Timer stage;
    const uint64_t fit_seed = eslm::mix_seed(g.seed, static_cast<uint64_t>(k));
    eslm::EntityMatrix entities;
    std::optional<eslm::SertModel> sert;
    switch (method) {
      case eslm::Method::Lsi: {
        const eslm::DocSpace space = eslm::fit_lsi(corpus, k);
        entities = eslm::aggregate_entities(space, corpus, assoc, g.threads);
        break;
      }
      case eslm::Method::Lda: {
        const eslm::DocSpace space =
            eslm::fit_lda(corpus, k, a.alpha, a.beta, a.iterations, fit_seed);
        entities = eslm::aggregate_entities(space, corpus, assoc, g.threads);
        break;
      }
      case eslm::Method::W2vSg:
      case eslm::Method::W2vCbow: {
        const auto variant = method == eslm::Method::W2vSg ? eslm::W2vVariant::SG
                                                           : eslm::W2vVariant::CBOW;
        const eslm::DocSpace space = eslm::fit_word2vec(corpus, k, variant, a.window,
                                                        a.negatives, a.epochs, fit_seed, a.w2v_lr);
        entities = eslm::aggregate_entities(space, corpus, assoc, g.threads);
        break;
      }
      case eslm::Method::Doc2vec:
        entities = eslm::fit_doc2vec_entities(corpus, assoc, k, a.window, a.negatives, a.epochs,
                                              fit_seed, a.w2v_lr);
        break;
      case eslm::Method::Sert: {
        eslm::TrainConfig cfg;
        cfg.learning_rate = a.lr;
        cfg.batch_size = a.batch_size;
        cfg.max_epochs = a.max_epochs;
        cfg.patience = a.patience;
        cfg.validation_fraction = a.validation_fraction;
        cfg.softmax_samples = a.softmax_samples;
        cfg.seed = fit_seed;
        const eslm::SertModel model = eslm::train_sert(corpus, assoc, k, cfg);
        entities.entity_ids = assoc.entities;
        entities.method = eslm::Method::Sert;
        entities.vectors = model.entity_vectors;
        sert = model;
        break;
      }
      case eslm::Method::GraphPca: {
        const eslm::CoassociationGraph graph = eslm::coassociation_graph(assoc);
        entities = eslm::graph_pca(graph, k);
        break;
      }
      case eslm::Method::Random:
        entities = eslm::random_entities(assoc.entities, k, fit_seed);
        break;
    }

    const std::string stem = a.method + "_k" + std::to_string(k);
    const fs::path entities_path = dir / (stem + ".entities.eslm");
    eslm::save_entities(entities, entities_path.string());
    manifest.output(entities_path);
    if (sert) {
      const fs::path model_path = dir / (stem + ".model.eslm");
      eslm::save_sert(*sert, corpus.vocabulary.terms, assoc.entities, model_path.string());
      manifest.output(model_path);
    }
    manifest.stage("k=" + std::to_string(k), stage.seconds());
    std::cout << "wrote " << entities_path.string() << " (" << entities.num_entities() << " x "
              << entities.k() << ")\n";
  }
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalClusterArgs {
  std::vector<std::string> models;
  std::string groups;
  std::string K_list = "1..99";
  int restarts = 10;
  bool no_normalize = false;
  std::string out = "clustering.tsv";
};

int run_eval_cluster(const EvalClusterArgs& a, const Globals& g) {
  Manifest manifest("eval-cluster", g);
  manifest.config("models", a.models);
  manifest.config("groups", a.groups);
  manifest.config("K", a.K_list);
  manifest.config("restarts", a.restarts);
  manifest.config("normalize", !a.no_normalize);
  manifest.input(a.groups);
  for (const auto& m : a.models) manifest.input(m);

  std::ifstream gin(a.groups);
  if (!gin) throw eslm::Error("cannot open groups file: " + a.groups);
  const auto rows = eslm::load_groups(gin, a.groups);
  const eslm::GroupAssignment truth = eslm::smallest_group_assignment(rows);
  const std::vector<int> Ks = parse_int_list(a.K_list);

  std::vector<std::string> lines{"method\tk\tK\tmean_ami\tstd_ami"};
  int model_idx = 0;
  for (const auto& model_path : a.models) {
    const eslm::EntityMatrix raw = eslm::load_entities(model_path);
    const eslm::EntityMatrix matrix = a.no_normalize ? raw : eslm::normalize_rows(raw);
    std::map<std::string, int> row_of;
    for (int i = 0; i < matrix.num_entities(); ++i) row_of.emplace(matrix.entity_ids[i], i);

    // Entities lacking ground truth, or missing from the model, are excluded.
    std::vector<int> matrix_rows;
    std::vector<int> truth_labels;
    for (size_t i = 0; i < truth.entities.size(); ++i) {
      const auto it = row_of.find(truth.entities[i]);
      if (it == row_of.end()) {
        std::cerr << "warning: " << model_path << ": no vector for entity " << truth.entities[i]
                  << ", excluded\n";
        continue;
      }
      matrix_rows.push_back(it->second);
      truth_labels.push_back(truth.partition.labels[i]);
    }
    if (matrix_rows.size() < 2)
      throw eslm::Error("groups file covers fewer than 2 entities present in " + model_path);
    eslm::MatF points(matrix_rows.size(), matrix.k());
    for (size_t i = 0; i < matrix_rows.size(); ++i) points.row(i) = matrix.vectors.row(matrix_rows[i]);
    eslm::Partition truth_part;
    truth_part.labels = truth_labels;

    for (const int K : Ks) {
      if (K > static_cast<int>(matrix_rows.size())) {
        std::cerr << "warning: K=" << K << " exceeds " << matrix_rows.size()
                  << " covered entities, skipped\n";
        continue;
      }
      const uint64_t kseed = eslm::mix_seed(eslm::mix_seed(g.seed, model_idx), K);
      const auto results = eslm::kmeans(points, K, a.restarts, kseed, g.threads);
      std::vector<double> scores;
      scores.reserve(results.size());
      for (const auto& r : results) scores.push_back(eslm::ami(r.partition, truth_part));
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= static_cast<double>(scores.size());
      double var = 0.0;
      for (double s : scores) var += (s - mean) * (s - mean);
      var /= static_cast<double>(scores.size());
      lines.push_back(std::string(eslm::method_name(matrix.method)) + '\t' +
                      std::to_string(matrix.k()) + '\t' + std::to_string(K) + '\t' + fmt6(mean) +
                      '\t' + fmt6(std::sqrt(var)));
    }
    ++model_idx;
  }
  const fs::path out_path = fs::path(g.out_dir) / a.out;
  write_tsv(out_path, lines);
  manifest.output(out_path);
  manifest.write();
  std::cout << "wrote " << out_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalRankArgs {
  std::vector<std::string> models;
  std::string associations;
  std::string out = "ranking.tsv";
};

int run_eval_rank(const EvalRankArgs& a, const Globals& g) {
  Manifest manifest("eval-rank", g);
  manifest.config("models", a.models);
  manifest.config("associations", a.associations);
  manifest.input(a.associations);
  for (const auto& m : a.models) manifest.input(m);

  const eslm::AssociationIndex assoc = eslm::load_associations_standalone(a.associations);
  const eslm::CoassociationGraph graph = eslm::coassociation_graph(assoc);
  const int X = graph.num_entities();
  {
    int positive = 0;
    for (int i = 0; i < X; ++i)
      if (graph.weights.row(i).sum() > 0) ++positive;
    if (positive < 2) throw eslm::Error("need at least 2 entities with positive co-association");
  }

  struct ModelEval {
    std::string method;
    int k = 0;
    std::vector<double> ndcg_scores;  // aligned across models (same query order)
    std::vector<double> rprec_scores;
    int n_skipped = 0;
  };
  std::vector<ModelEval> evals;

  for (const auto& model_path : a.models) {
    const eslm::EntityMatrix matrix = eslm::load_entities(model_path);
    std::map<std::string, int> row_of;
    for (int i = 0; i < matrix.num_entities(); ++i) row_of.emplace(matrix.entity_ids[i], i);
    std::vector<int> graph_to_row(X);
    for (int i = 0; i < X; ++i) {
      const auto it = row_of.find(graph.entity_ids[i]);
      if (it == row_of.end())
        throw eslm::Error(model_path + ": no vector for entity " + graph.entity_ids[i]);
      graph_to_row[i] = it->second;
    }
    std::vector<int> row_to_graph(matrix.num_entities(), -1);
    for (int i = 0; i < X; ++i) row_to_graph[graph_to_row[i]] = i;

    ModelEval ev;
    ev.method = eslm::method_name(matrix.method);
    ev.k = matrix.k();
    for (int q = 0; q < X; ++q) {
      eslm::GainMap gains;
      for (int l = 0; l < X; ++l)
        if (l != q && graph.weights(q, l) > 0)
          gains[graph_to_row[l]] = static_cast<int>(graph.weights(q, l));
      const auto ranking_pairs = eslm::rank_similar(matrix, graph_to_row[q]);
      std::vector<int> ranked;
      ranked.reserve(ranking_pairs.size());
      for (const auto& [row, score] : ranking_pairs) ranked.push_back(row);
      const auto n = eslm::ndcg(ranked, gains);
      const auto r = eslm::r_precision(ranked, gains);
      if (!n.has_value()) {
        ++ev.n_skipped;
        continue;
      }
      ev.ndcg_scores.push_back(*n);
      ev.rprec_scores.push_back(*r);
    }
    evals.push_back(std::move(ev));
  }

  auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };

  // Best model per k by mean NDCG; every row reports the paired test of its
  // NDCG scores against that best model (the best row compares to itself).
  std::map<int, int> best_of_k;
  for (size_t i = 0; i < evals.size(); ++i) {
    const int k = evals[i].k;
    const auto it = best_of_k.find(k);
    if (it == best_of_k.end() ||
        mean_of(evals[i].ndcg_scores) > mean_of(evals[it->second].ndcg_scores))
      best_of_k[k] = static_cast<int>(i);
  }

  std::vector<std::string> lines{"method\tk\tndcg\tr_precision\tp_vs_best\tn_queries\tn_skipped"};
  for (const auto& ev : evals) {
    const auto& best = evals[best_of_k[ev.k]];
    double p = 1.0;
    if (ev.ndcg_scores.size() >= 2) p = eslm::paired_ttest(ev.ndcg_scores, best.ndcg_scores).p;
    lines.push_back(ev.method + '\t' + std::to_string(ev.k) + '\t' + fmt6(mean_of(ev.ndcg_scores)) +
                    '\t' + fmt6(mean_of(ev.rprec_scores)) + '\t' + fmt6(p) + '\t' +
                    std::to_string(ev.ndcg_scores.size()) + '\t' + std::to_string(ev.n_skipped));
  }
  const fs::path out_path = fs::path(g.out_dir) / a.out;
  write_tsv(out_path, lines);
  manifest.output(out_path);
  manifest.write();
  std::cout << "wrote " << out_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalPriorArgs {
  std::string model;
  std::string ranks;
  std::string out = "prior.tsv";
};

int run_eval_prior(const EvalPriorArgs& a, const Globals& g) {
  Manifest manifest("eval-prior", g);
  manifest.config("model", a.model);
  manifest.config("ranks", a.ranks);
  manifest.input(a.model);
  manifest.input(a.ranks);

  const eslm::Container c = eslm::read_container(a.model);
  if (c.method_tag != eslm::detail::kSertTag)
    throw eslm::Error(a.model + ": prior undefined for this method");
  const eslm::LoadedSert loaded = eslm::load_sert(a.model);
  const eslm::VecD prior = eslm::sert_prior(loaded.model);

  std::ifstream rin(a.ranks);
  if (!rin) throw eslm::Error("cannot open ranks file: " + a.ranks);
  const eslm::RankGroundTruth gt = eslm::load_ranks(rin, a.ranks);
  const eslm::RankPriorSummary summary =
      eslm::rank_prior_summary(prior, loaded.entity_ids, gt);

  std::vector<std::string> lines{"label\tordinal\tcount\tmin\tq1\tmedian\tq3\tmax"};
  for (const auto& row : summary.rows)
    lines.push_back(row.label + '\t' + std::to_string(row.ordinal) + '\t' +
                    std::to_string(row.count) + '\t' + fmt6(row.stats.min) + '\t' +
                    fmt6(row.stats.q1) + '\t' + fmt6(row.stats.median) + '\t' +
                    fmt6(row.stats.q3) + '\t' + fmt6(row.stats.max));
  const std::string rho = fmt6(summary.spearman_rho);
  lines.push_back("spearman\t-1\t" + std::to_string(summary.n_covered) + '\t' + rho + '\t' + rho +
                  '\t' + rho + '\t' + rho + '\t' + rho);

  const fs::path out_path = fs::path(g.out_dir) / a.out;
  write_tsv(out_path, lines);
  manifest.output(out_path);
  manifest.write();
  std::cout << "wrote " << out_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string clustering, ranking, prior;
  std::string out = "report.md";
};

std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw eslm::Error("cannot open: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string markdown_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::string out = "| " ;
  for (size_t c = 0; c < rows[0].size(); ++c) out += rows[0][c] + " | ";
  out += "\n|";
  for (size_t c = 0; c < rows[0].size(); ++c) out += " --- |";
  out += "\n";
  for (size_t r = 1; r < rows.size(); ++r) {
    out += "| ";
    for (size_t c = 0; c < rows[r].size(); ++c) out += rows[r][c] + " | ";
    out += "\n";
  }
  return out;
}

int run_report(const ReportArgs& a, const Globals& g) {
  Manifest manifest("report", g);
  manifest.config("clustering", a.clustering);
  manifest.config("ranking", a.ranking);
  manifest.config("prior", a.prior);

  std::string md = "# Entity representation results\n";
  if (!a.clustering.empty()) {
    manifest.input(a.clustering);
    const auto rows = read_tsv(a.clustering);
    md += "\n## Clustering (mean AMI over K-means restarts)\n\n";
    // Best K per (method, k).
    struct Best {
      int K = 0;
      double ami = -2.0;
      double std_ami = 0.0;
    };
    std::map<std::pair<std::string, std::string>, Best> best;
    for (size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() < 5) continue;
      const double v = std::stod(rows[r][3]);
      auto& b = best[{rows[r][0], rows[r][1]}];
      if (v > b.ami) b = {std::stoi(rows[r][2]), v, std::stod(rows[r][4])};
    }
    std::vector<std::vector<std::string>> table{{"method", "k", "best K", "mean AMI", "std"}};
    for (const auto& [key, b] : best)
      table.push_back({key.first, key.second, std::to_string(b.K), fmt6(b.ami), fmt6(b.std_ami)});
    md += markdown_table(table);
  }
  if (!a.ranking.empty()) {
    manifest.input(a.ranking);
    md += "\n## Ranking (co-association relevance)\n\n";
    md += markdown_table(read_tsv(a.ranking));
  }
  if (!a.prior.empty()) {
    manifest.input(a.prior);
    md += "\n## Prior probability by rank\n\n";
    md += markdown_table(read_tsv(a.prior));
  }

  const fs::path out_path = fs::path(g.out_dir) / a.out;
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw eslm::Error("cannot open for writing: " + out_path.string());
  out << md;
  out.close();
  manifest.output(out_path);
  manifest.write();
  std::cout << "wrote " << out_path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entity representation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads; 1 keeps every stage deterministic")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "load a corpus and report its statistics");
  ingest->add_option("--corpus", ingest_args.corpus, "JSONL corpus")->required();
  ingest->add_option("--associations", ingest_args.associations, "doc<TAB>entity file")->required();
  ingest->add_option("--max-vocab", ingest_args.max_vocab, "vocabulary cap")->capture_default_str();
  ingest->add_option("--stopwords", ingest_args.stopwords, "stopword file, one term per line");

  eslm::OrgConfig org;
  auto* synth = app.add_subcommand("synth", "generate a synthetic organization");
  synth->add_option("--entities", org.n_entities)->capture_default_str();
  synth->add_option("--committees", org.n_committees)->capture_default_str();
  synth->add_option("--rank-levels", org.n_rank_levels)->capture_default_str();
  synth->add_option("--vocab", org.vocab_size)->capture_default_str();
  synth->add_option("--docs", org.n_docs)->capture_default_str();
  synth->add_option("--doc-length-mean", org.doc_length_mean)->capture_default_str();
  synth->add_option("--topic-concentration", org.topic_concentration)->capture_default_str();
  synth->add_option("--coauthor-rate", org.coauthor_rate)->capture_default_str();
  synth->add_option("--rank-multiplier", org.docs_per_rank_multiplier)->capture_default_str();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit a representation and write entity vectors");
  train->add_option("--method", train_args.method,
                    "lsi|lda|w2v-sg|w2v-cbow|doc2vec|sert|graph-pca|random")
      ->required();
  train->add_option("--corpus", train_args.corpus, "JSONL corpus");
  train->add_option("--associations", train_args.associations, "doc<TAB>entity file")->required();
  train->add_option("--k", train_args.k_list, "dimensionalities, comma list or a..b")
      ->capture_default_str();
  train->add_option("--max-vocab", train_args.max_vocab)->capture_default_str();
  train->add_option("--stopwords", train_args.stopwords);
  train->add_option("--window", train_args.window)->capture_default_str();
  train->add_option("--negatives", train_args.negatives)->capture_default_str();
  train->add_option("--epochs", train_args.epochs)->capture_default_str();
  train->add_option("--w2v-lr", train_args.w2v_lr)->capture_default_str();
  train->add_option("--alpha", train_args.alpha)->capture_default_str();
  train->add_option("--beta", train_args.beta)->capture_default_str();
  train->add_option("--iterations", train_args.iterations)->capture_default_str();
  train->add_option("--lr", train_args.lr)->capture_default_str();
  train->add_option("--batch-size", train_args.batch_size)->capture_default_str();
  train->add_option("--max-epochs", train_args.max_epochs)->capture_default_str();
  train->add_option("--patience", train_args.patience)->capture_default_str();
  train->add_option("--validation-fraction", train_args.validation_fraction)
      ->capture_default_str();
  train->add_option("--softmax-samples", train_args.softmax_samples)->capture_default_str();

  EvalClusterArgs ec_args;
  auto* ec = app.add_subcommand("eval-cluster", "K-means + AMI against ground-truth groups");
  ec->add_option("--models", ec_args.models, "entity matrix files")->required()->expected(-1);
  ec->add_option("--groups", ec_args.groups, "group<TAB>entity file")->required();
  ec->add_option("--K", ec_args.K_list, "cluster counts, comma list or a..b")
      ->capture_default_str();
  ec->add_option("--restarts", ec_args.restarts)->capture_default_str();
  ec->add_flag("--no-normalize", ec_args.no_normalize, "cluster raw (unnormalized) vectors");
  ec->add_option("--out", ec_args.out)->capture_default_str();

  EvalRankArgs er_args;
  auto* er = app.add_subcommand("eval-rank", "NDCG / R-Precision on co-association gains");
  er->add_option("--models", er_args.models, "entity matrix files")->required()->expected(-1);
  er->add_option("--associations", er_args.associations, "doc<TAB>entity file")->required();
  er->add_option("--out", er_args.out)->capture_default_str();

  EvalPriorArgs ep_args;
  auto* ep = app.add_subcommand("eval-prior", "prior probability summary by rank");
  ep->add_option("--model", ep_args.model, "log-linear model file")->required();
  ep->add_option("--ranks", ep_args.ranks, "entity<TAB>label<TAB>ordinal file")->required();
  ep->add_option("--out", ep_args.out)->capture_default_str();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "combine evaluation TSVs into one summary");
  report->add_option("--clustering", report_args.clustering);
  report->add_option("--ranking", report_args.ranking);
  report->add_option("--prior", report_args.prior);
  report->add_option("--out", report_args.out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(g.out_dir);
    if (*ingest) return run_ingest(ingest_args, g);
    if (*synth) return run_synth(org, g);
    if (*train) return run_train(train_args, g);
    if (*ec) return run_eval_cluster(ec_args, g);
    if (*er) return run_eval_rank(er_args, g);
    if (*ep) return run_eval_prior(ep_args, g);
    if (*report) return run_report(report_args, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

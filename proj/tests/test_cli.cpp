#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eslm/eslm.hpp"

using namespace eslm;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(ESLM_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char chunk[4096];
  while (fgets(chunk, sizeof(chunk), pipe)) output += chunk;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
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

// One shared synthetic dataset plus trained models, built on first use.
struct Fixture {
  fs::path dir;
  fs::path corpus, associations, groups, ranks;

  Fixture() {
    dir = fs::temp_directory_path() / "eslm_cli_fixture";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const RunResult synth = run(
        "--seed 1 --out-dir " + dir.string() +
        " synth --entities 12 --committees 3 --rank-levels 3 --vocab 150 --docs 200"
        " --doc-length-mean 30 --topic-concentration 0.85");
    if (synth.exit_code != 0) throw Error("fixture synth failed: " + synth.output);
    corpus = dir / "corpus.jsonl";
    associations = dir / "associations.tsv";
    groups = dir / "groups.tsv";
    ranks = dir / "ranks.tsv";

    const std::string common =
        " --corpus " + corpus.string() + " --associations " + associations.string();
    const RunResult lsi =
        run("--seed 1 --out-dir " + dir.string() + " train --method lsi" + common + " --k 4,8");
    if (lsi.exit_code != 0) throw Error("fixture lsi train failed: " + lsi.output);
    const RunResult rnd = run("--seed 1 --out-dir " + dir.string() +
                              " train --method random --associations " + associations.string() +
                              " --k 4");
    if (rnd.exit_code != 0) throw Error("fixture random train failed: " + rnd.output);
    const RunResult sert =
        run("--seed 1 --out-dir " + dir.string() + " train --method sert" + common +
            " --k 4 --lr 0.1 --batch-size 32 --max-epochs 8 --patience 3");
    if (sert.exit_code != 0) throw Error("fixture sert train failed: " + sert.output);
  }

  fs::path model(const std::string& name) const { return dir / name; }
};

const Fixture& fx() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("version flag and bad invocations") {
  CHECK(run("--version").output.find("0.1.0") != std::string::npos);
  CHECK(run("no-such-command").exit_code != 0);
  CHECK(run("train").exit_code != 0);  // --method and --associations required
  const RunResult missing = run("ingest --corpus /nonexistent.jsonl --associations /nope.tsv");
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("synth writes the four dataset files and a manifest") {
  const Fixture& f = fx();
  for (const fs::path& p : {f.corpus, f.associations, f.groups, f.ranks}) CHECK(fs::exists(p));

  int lines = 0;
  std::ifstream in(f.corpus);
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 200);

  const fs::path manifest = f.dir / "synth_manifest.json";
  REQUIRE(fs::exists(manifest));
  const auto j = nlohmann::json::parse(slurp(manifest));
  CHECK(j.at("command") == "synth");
  CHECK(j.at("seed") == 1);
  CHECK(j.at("config").at("n_entities") == 12);
  CHECK(j.at("outputs").size() == 4);
  for (const auto& [path, digest] : j.at("outputs").items()) {
    (void)path;
    const std::string d = digest.get<std::string>();
    REQUIRE(d.rfind("fnv64:", 0) == 0);
    CHECK(d.size() == 6 + 16);
  }
  CHECK(j.at("wall_times_sec").contains("total"));
}

TEST_CASE("train sweeps k and writes loadable entity matrices") {
  const Fixture& f = fx();
  for (int k : {4, 8}) {
    const fs::path p = f.model("lsi_k" + std::to_string(k) + ".entities.eslm");
    REQUIRE(fs::exists(p));
    const EntityMatrix m = load_entities(p.string());
    CHECK(m.num_entities() == 12);
    CHECK(m.k() == k);
    CHECK(m.method == Method::Lsi);
    CHECK(!m.normalized);
  }
  // trained from associations alone; no corpus required
  const EntityMatrix rnd = load_entities(f.model("random_k4.entities.eslm").string());
  CHECK(rnd.num_entities() == 12);
  CHECK(rnd.method == Method::Random);

  const auto j = nlohmann::json::parse(slurp(f.dir / "train_manifest.json"));
  CHECK(j.at("command") == "train");
  CHECK(j.at("inputs").size() >= 1);
}

TEST_CASE("training twice with one seed reproduces files byte for byte") {
  const Fixture& f = fx();
  const fs::path d1 = f.dir / "rerun1", d2 = f.dir / "rerun2";
  for (const fs::path& d : {d1, d2}) {
    fs::create_directories(d);
    const RunResult r = run("--seed 7 --out-dir " + d.string() +
                            " train --method doc2vec --corpus " + f.corpus.string() +
                            " --associations " + f.associations.string() + " --k 4 --epochs 2");
    REQUIRE(r.exit_code == 0);
  }
  CHECK(slurp(d1 / "doc2vec_k4.entities.eslm") == slurp(d2 / "doc2vec_k4.entities.eslm"));

  // a different seed must change the trained vectors
  const RunResult other = run("--seed 8 --out-dir " + d2.string() +
                              " train --method doc2vec --corpus " + f.corpus.string() +
                              " --associations " + f.associations.string() + " --k 4 --epochs 2");
  REQUIRE(other.exit_code == 0);
  CHECK(slurp(d1 / "doc2vec_k4.entities.eslm") != slurp(d2 / "doc2vec_k4.entities.eslm"));
}

TEST_CASE("sert training saves both the entity matrix and the model") {
  const Fixture& f = fx();
  REQUIRE(fs::exists(f.model("sert_k4.entities.eslm")));
  REQUIRE(fs::exists(f.model("sert_k4.model.eslm")));
  const LoadedSert s = load_sert(f.model("sert_k4.model.eslm").string());
  CHECK(s.model.k == 4);
  CHECK(s.entity_ids.size() == 12);
  const VecD prior = sert_prior(s.model);
  CHECK(prior.sum() == Catch::Approx(1.0).margin(1e-9));
  const EntityMatrix m = load_entities(f.model("sert_k4.entities.eslm").string());
  REQUIRE(m.vectors.rows() == s.model.entity_vectors.rows());
  REQUIRE(m.vectors.cols() == s.model.entity_vectors.cols());
  CHECK(std::memcmp(m.vectors.data(), s.model.entity_vectors.data(),
                    sizeof(float) * m.vectors.size()) == 0);
}

TEST_CASE("eval-cluster scores each model at each K") {
  const Fixture& f = fx();
  const fs::path out = f.dir / "clustering.tsv";
  const RunResult r =
      run("--seed 3 --out-dir " + f.dir.string() + " eval-cluster --models " +
          f.model("lsi_k4.entities.eslm").string() + " " +
          f.model("random_k4.entities.eslm").string() + " --groups " + f.groups.string() +
          " --K 2,3,4 --restarts 5");
  REQUIRE(r.exit_code == 0);
  const auto rows = read_tsv(out);
  REQUIRE(rows.size() == 1 + 2 * 3);  // header + 2 models x 3 K values
  CHECK(rows[0] == std::vector<std::string>{"method", "k", "K", "mean_ami", "std_ami"});

  double lsi_k3 = -1, random_best = -1;
  for (size_t i = 1; i < rows.size(); ++i) {
    const double mean = std::stod(rows[i][3]);
    if (rows[i][0] == "lsi" && rows[i][2] == "3") lsi_k3 = mean;
    if (rows[i][0] == "random") random_best = std::max(random_best, mean);
  }
  // Three planted committees with high concentration. The score is a mean
  // over restarts, so the occasional bad local optimum drags it below 1.
  CHECK(lsi_k3 > 0.7);
  CHECK(random_best < 0.35);
  CHECK(lsi_k3 > random_best + 0.4);
}

TEST_CASE("eval-cluster skips K above the covered entity count with a warning") {
  const Fixture& f = fx();
  const RunResult r = run("--out-dir " + f.dir.string() + " eval-cluster --models " +
                          f.model("lsi_k4.entities.eslm").string() + " --groups " +
                          f.groups.string() + " --K 2,40 --restarts 2 --out skipk.tsv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("skip") != std::string::npos);
  const auto rows = read_tsv(f.dir / "skipk.tsv");
  CHECK(rows.size() == 2);  // header + K=2 only
}

TEST_CASE("eval-rank reports ndcg, r-precision, and the best-model t-test") {
  const Fixture& f = fx();
  const RunResult r = run("--out-dir " + f.dir.string() + " eval-rank --models " +
                          f.model("lsi_k4.entities.eslm").string() + " " +
                          f.model("random_k4.entities.eslm").string() + " --associations " +
                          f.associations.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = read_tsv(f.dir / "ranking.tsv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"method", "k", "ndcg", "r_precision", "p_vs_best",
                                            "n_queries", "n_skipped"});
  const auto& lsi = rows[1][0] == "lsi" ? rows[1] : rows[2];
  const auto& rnd = rows[1][0] == "random" ? rows[1] : rows[2];
  REQUIRE(lsi[0] == "lsi");
  REQUIRE(rnd[0] == "random");
  CHECK(std::stod(lsi[2]) > std::stod(rnd[2]));  // lsi beats random on ndcg
  const auto& best = std::stod(lsi[2]) >= std::stod(rnd[2]) ? lsi : rnd;
  CHECK(std::stod(best[4]) == 1.0);  // best model compared with itself
  CHECK(std::stoi(lsi[5]) > 0);
  CHECK(std::stoi(lsi[5]) + std::stoi(lsi[6]) <= 12);
}

TEST_CASE("eval-prior summarizes the trained prior by rank level") {
  const Fixture& f = fx();
  const RunResult r = run("--out-dir " + f.dir.string() + " eval-prior --model " +
                          f.model("sert_k4.model.eslm").string() + " --ranks " +
                          f.ranks.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = read_tsv(f.dir / "prior.tsv");
  REQUIRE(rows.size() == 1 + 3 + 1);  // header, one row per rank level, spearman row
  CHECK(rows[0][0] == "label");
  int last_ordinal = -1;
  for (size_t i = 1; i + 1 < rows.size(); ++i) {
    const int ordinal = std::stoi(rows[i][1]);
    CHECK(ordinal == last_ordinal + 1);
    last_ordinal = ordinal;
    CHECK(std::stoi(rows[i][2]) == 4);  // 12 entities over 3 levels
  }
  const auto& spearman_row = rows.back();
  CHECK(spearman_row[0] == "spearman");
  CHECK(spearman_row[1] == "-1");
  CHECK(std::stoi(spearman_row[2]) == 12);
  const double rho = std::stod(spearman_row[3]);
  CHECK(rho >= -1.0);
  CHECK(rho <= 1.0);
  for (size_t c = 4; c < spearman_row.size(); ++c) CHECK(std::stod(spearman_row[c]) == rho);
}

TEST_CASE("eval-prior rejects entity matrices") {
  const Fixture& f = fx();
  const RunResult r = run("--out-dir " + f.dir.string() + " eval-prior --model " +
                          f.model("lsi_k4.entities.eslm").string() + " --ranks " +
                          f.ranks.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("prior undefined for this method") != std::string::npos);
}

TEST_CASE("a uniform-bias model yields one shared prior value everywhere") {
  const Fixture& f = fx();
  SertModel model = init_sert(5, 12, 4, 3);
  model.biases.setConstant(0.125f);
  std::vector<std::string> vocab{"aa", "bb", "cc", "dd", "ee"};
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back(detail::padded_id('e', i, 2));
  const fs::path mp = f.dir / "uniform.model.eslm";
  save_sert(model, vocab, ids, mp.string());

  const RunResult r = run("--out-dir " + f.dir.string() + " eval-prior --model " + mp.string() +
                          " --ranks " + f.ranks.string() + " --out uniform_prior.tsv");
  REQUIRE(r.exit_code == 0);
  const auto rows = read_tsv(f.dir / "uniform_prior.tsv");
  REQUIRE(rows.size() == 5);
  for (size_t i = 1; i + 1 < rows.size(); ++i) {
    CHECK(std::stod(rows[i][5]) == Catch::Approx(1.0 / 12).margin(1e-9));  // median column
    CHECK(std::stod(rows[i][3]) == Catch::Approx(1.0 / 12).margin(1e-9));  // min column
    CHECK(std::stod(rows[i][7]) == Catch::Approx(1.0 / 12).margin(1e-9));  // max column
  }
  CHECK(std::stod(rows.back()[3]) == 0.0);  // constant prior: rho defined as 0
}

TEST_CASE("ingest prints corpus statistics and writes the vocabulary") {
  const Fixture& f = fx();
  const RunResult r = run("--out-dir " + f.dir.string() + " ingest --corpus " +
                          f.corpus.string() + " --associations " + f.associations.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("documents") != std::string::npos);
  CHECK(r.output.find("200") != std::string::npos);
  CHECK(r.output.find("entities") != std::string::npos);
  const auto rows = read_tsv(f.dir / "vocabulary.tsv");
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == std::vector<std::string>{"term", "frequency"});
  // descending frequency order
  for (size_t i = 2; i < rows.size(); ++i)
    CHECK(std::stoll(rows[i][1]) <= std::stoll(rows[i - 1][1]));
}

TEST_CASE("report combines the evaluation tables into markdown") {
  const Fixture& f = fx();
  const RunResult r = run("--out-dir " + f.dir.string() + " report --clustering " +
                          (f.dir / "clustering.tsv").string() + " --ranking " +
                          (f.dir / "ranking.tsv").string() + " --prior " +
                          (f.dir / "prior.tsv").string());
  REQUIRE(r.exit_code == 0);
  const std::string md = slurp(f.dir / "report.md");
  CHECK(md.find("lsi") != std::string::npos);
  CHECK(md.find("|") != std::string::npos);
  CHECK(md.find("ndcg") != std::string::npos);
}

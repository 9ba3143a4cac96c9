// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dln/data.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct cli_result {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / ("dln_cli_test_" + std::to_string(++counter));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

cli_result run_cli(const std::string& args) {
  const fs::path dir = scratch_dir();
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = std::string(DLN_CLI_PATH) + " " + args + " >" + out_file.string() +
                          " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  cli_result res;
  res.exit_code = WEXITSTATUS(status);
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Small AND-task CSVs for train/eval runs.
void write_task_csvs(const fs::path& dir, int n_train, int n_test) {
  auto to_csv = [](const dln::feature_matrix& m) {
    std::string text = "f0,f1,label\n";
    for (int r = 0; r < m.rows; ++r) {
      text += std::to_string(m.at(r, 0)) + "," + std::to_string(m.at(r, 1)) + "," +
              std::to_string(m.labels[static_cast<std::size_t>(r)]) + "\n";
    }
    return text;
  };
  write_text(dir / "train.csv", to_csv(testutil::threshold_task(n_train, 1001, false)));
  write_text(dir / "test.csv", to_csv(testutil::threshold_task(n_test, 1002, false)));
}

const std::string kSequences =
    "1 0.1 0.2 0.3 0.4 0.5 0.4 0.3\n"
    "0 0.9 0.8 0.7 0.9 0.8 0.7 0.9\n"
    "1 0.2 0.3 0.4 0.5 0.4 0.3 0.2\n";

}  // namespace

TEST_CASE("extract writes a feature CSV with 14 columns plus label") {
  const fs::path dir = scratch_dir();
  write_text(dir / "seq.txt", kSequences);
  const auto res =
      run_cli("extract --in " + (dir / "seq.txt").string() + " --out " + (dir / "f.csv").string());
  CHECK(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc.at("command") == "extract");
  CHECK(doc.at("features") == dln::kBasicFeatureCount);

  const dln::feature_matrix m = dln::load_feature_csv((dir / "f.csv").string());
  CHECK(m.cols() == dln::kBasicFeatureCount);
  CHECK(m.rows == 3);
  CHECK(fs::exists(dir / "f.csv.manifest.json"));
}

TEST_CASE("extract rejects ragged input with exit code 2 and a line number") {
  const fs::path dir = scratch_dir();
  write_text(dir / "bad.txt", "1 1 2 3 4\n0 1 2\n");
  const auto res =
      run_cli("extract --in " + (dir / "bad.txt").string() + " --out " + (dir / "f.csv").string());
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("line 2") != std::string::npos);
}

TEST_CASE("extract reports unwritable outputs with exit code 3") {
  const fs::path dir = scratch_dir();
  write_text(dir / "seq.txt", kSequences);
  const auto res = run_cli("extract --in " + (dir / "seq.txt").string() +
                           " --out /nonexistent_dir_zz/f.csv");
  CHECK(res.exit_code == 3);
}

TEST_CASE("train solves the AND task end to end and eval reproduces the metric") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 400, 200);
  write_text(dir / "task.cfg",
             "hidden_sizes = 8\n"
             "group_size = 4\n"
             "ste_threshold = true\n"
             "ste_logic = true\n"
             "ste_sum = true\n"
             "learning_rate = 0.03\n"
             "epochs = 60\n");
  const auto res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                           (dir / "test.csv").string() + " --out " + (dir / "model.json").string() +
                           " --config " + (dir / "task.cfg").string() + " --seed 1");
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc.at("test_balanced_accuracy").get<double>() >= 0.9);
  CHECK(doc.at("total_ops").get<long long>() >= 0);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "model.json.manifest.json"));

  const auto eval_res = run_cli("eval --model " + (dir / "model.json").string() + " --data " +
                                (dir / "test.csv").string());
  CHECK(eval_res.exit_code == 0);
  const json eval_doc = json::parse(eval_res.out);
  CHECK(eval_doc.at("balanced_accuracy").get<double>() ==
        doctest::Approx(doc.at("test_balanced_accuracy").get<double>()).epsilon(1e-15));
}

TEST_CASE("train with zero epochs still writes a model and near-chance metrics") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 200, 100);
  const auto res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                           (dir / "test.csv").string() + " --out " + (dir / "model.json").string() +
                           " --seed 5 --epochs 0 --hidden 6 --group-size 2");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "model.json"));
  const json doc = json::parse(res.out);
  CHECK(doc.at("final_loss").is_null());
}

TEST_CASE("train fails with exit 2 on a missing label column") {
  const fs::path dir = scratch_dir();
  write_text(dir / "train.csv", "a,b\n1,2\n");
  write_text(dir / "test.csv", "a,b\n1,2\n");
  const auto res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                           (dir / "test.csv").string() + " --out " + (dir / "m.json").string());
  CHECK(res.exit_code == 2);
}

TEST_CASE("train fails with exit 4 on an invalid config file") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 120, 60);
  write_text(dir / "bad.cfg", "subset_gate_num = 5\n");
  const auto res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                           (dir / "test.csv").string() + " --config " + (dir / "bad.cfg").string() +
                           " --out " + (dir / "m.json").string());
  CHECK(res.exit_code == 4);

  write_text(dir / "unknown.cfg", "not_a_key = 1\n");
  const auto res2 = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                            (dir / "test.csv").string() + " --config " +
                            (dir / "unknown.cfg").string() + " --out " + (dir / "m.json").string());
  CHECK(res2.exit_code == 4);
}

TEST_CASE("training runs are bit-identical for one seed") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 150, 80);
  const std::string base = "train --train " + (dir / "train.csv").string() + " --test " +
                           (dir / "test.csv").string() + " --seed 11 --epochs 10 --hidden 6 " +
                           "--group-size 2 --out ";
  const auto a = run_cli(base + (dir / "a.json").string());
  const auto b = run_cli(base + (dir / "b.json").string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  // stdout JSON differs only in the model path
  json da = json::parse(a.out), db = json::parse(b.out);
  da.erase("model");
  db.erase("model");
  CHECK(da == db);
}

TEST_CASE("hpo writes a reusable best config and a full history") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 90, 40);
  const std::string cmd = "hpo --train " + (dir / "train.csv").string() + " --trials 2 --seed 7" +
                          " --out " + (dir / "best.cfg").string();
  const auto res = run_cli(cmd);
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc.at("trials") == 2);

  const std::string history = slurp(dir / "best.cfg.history.jsonl");
  int lines = 0;
  for (char ch : history) lines += ch == '\n';
  CHECK(lines == 2);
  const auto parses = [](const std::string& text) {
    try {
      const json parsed = json::parse(text);
      return parsed.is_object();
    } catch (...) {
      return false;
    }
  };
  CHECK(parses(history.substr(0, history.find('\n'))));

  // same seed -> identical best config bytes
  const auto res2 = run_cli("hpo --train " + (dir / "train.csv").string() +
                            " --trials 2 --seed 7 --out " + (dir / "best2.cfg").string());
  REQUIRE(res2.exit_code == 0);
  CHECK(slurp(dir / "best.cfg") == slurp(dir / "best2.cfg"));

  // the best config file is loadable by train
  const auto train_res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                                 (dir / "test.csv").string() + " --config " +
                                 (dir / "best.cfg").string() + " --epochs 2 --out " +
                                 (dir / "m.json").string());
  CHECK(train_res.exit_code == 0);
}

TEST_CASE("compile emits rules, graph and cost files; reruns are byte-identical") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 400, 200);
  write_text(dir / "task.cfg",
             "hidden_sizes = 8\n"
             "group_size = 4\n"
             "ste_threshold = true\n"
             "ste_logic = true\n"
             "ste_sum = true\n"
             "learning_rate = 0.03\n"
             "epochs = 60\n");
  const auto train_res =
      run_cli("train --train " + (dir / "train.csv").string() + " --test " +
              (dir / "test.csv").string() + " --out " + (dir / "model.json").string() +
              " --config " + (dir / "task.cfg").string() + " --seed 1");
  REQUIRE(train_res.exit_code == 0);

  const std::string cmd = "compile --model " + (dir / "model.json").string() + " --out " +
                          (dir / "circuit").string();
  const auto res = run_cli(cmd);
  REQUIRE(res.exit_code == 0);
  const json doc = json::parse(res.out);
  CHECK(doc.at("total_ops").get<long long>() ==
        doc.at("gate_ops").get<long long>() + doc.at("comparator_ops").get<long long>());

  const std::string rules = slurp(dir / "circuit.rules.txt");
  const std::string graph = slurp(dir / "circuit.dot");
  const std::string cost = slurp(dir / "circuit.cost.json");
  CHECK_FALSE(rules.empty());
  std::string why;
  CHECK_MESSAGE(testutil::dot_syntax_ok(graph, &why), why);
  const json cost_doc = json::parse(cost, nullptr, /*allow_exceptions=*/false);
  CHECK_FALSE(cost_doc.is_discarded());

  // The learned solution contains a bare conjunction of the two feature
  // comparators among its rules.
  bool found_conjunction = false;
  std::istringstream lines(rules);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find("∧") != std::string::npos && line.find("¬") == std::string::npos &&
        line.find("feat[0]") != std::string::npos && line.find("feat[1]") != std::string::npos) {
      found_conjunction = true;
    }
  }
  CHECK(found_conjunction);

  const auto res2 = run_cli(cmd);
  REQUIRE(res2.exit_code == 0);
  CHECK(slurp(dir / "circuit.rules.txt") == rules);
  CHECK(slurp(dir / "circuit.dot") == graph);
  CHECK(slurp(dir / "circuit.cost.json") == cost);
  CHECK(res2.out == res.out);
}

TEST_CASE("compile fails with exit 2 on a corrupt model") {
  const fs::path dir = scratch_dir();
  write_text(dir / "broken.json", "{\"format\": \"dln-bundle\", \"version\":");
  const auto res = run_cli("compile --model " + (dir / "broken.json").string() + " --out " +
                           (dir / "c").string());
  CHECK(res.exit_code == 2);
}

TEST_CASE("unknown flags exit with the parse code") {
  const auto res = run_cli("train --no-such-flag");
  CHECK(res.exit_code == 2);
}

TEST_CASE("config files round-trip seeds above the signed 64-bit range") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 60, 30);
  write_text(dir / "big.cfg",
             "hidden_sizes = 4\ngroup_size = 2\nepochs = 0\n"
             "seed = 16462000697783136304\n");
  const auto res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                           (dir / "test.csv").string() + " --config " + (dir / "big.cfg").string() +
                           " --out " + (dir / "m.json").string());
  CHECK(res.exit_code == 0);
  CHECK(json::parse(res.out).at("seed").get<std::uint64_t>() == 16462000697783136304ULL);
}

TEST_CASE("eval rejects data with a different schema") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 120, 60);
  const auto train_res = run_cli("train --train " + (dir / "train.csv").string() + " --test " +
                                 (dir / "test.csv").string() + " --seed 2 --epochs 2 --hidden 4 " +
                                 "--group-size 2 --out " + (dir / "m.json").string());
  REQUIRE(train_res.exit_code == 0);
  write_text(dir / "other.csv", "zzz,label\n0.5,0\n0.6,1\n");
  const auto res = run_cli("eval --model " + (dir / "m.json").string() + " --data " +
                           (dir / "other.csv").string());
  CHECK(res.exit_code == 2);
}

TEST_CASE("hpo workers flag preserves the deterministic history") {
  const fs::path dir = scratch_dir();
  write_task_csvs(dir, 80, 40);
  const auto a = run_cli("hpo --train " + (dir / "train.csv").string() +
                         " --trials 3 --seed 5 --workers 1 --out " + (dir / "a.cfg").string());
  const auto b = run_cli("hpo --train " + (dir / "train.csv").string() +
                         " --trials 3 --seed 5 --workers 3 --out " + (dir / "b.cfg").string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir / "a.cfg") == slurp(dir / "b.cfg"));
  // histories agree apart from wall-clock timings
  auto strip_wall = [](const std::string& text) {
    std::string out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      json j = json::parse(line);
      j.erase("wall_seconds");
      out += j.dump() + "\n";
    }
    return out;
  };
  CHECK(strip_wall(slurp(dir / "a.cfg.history.jsonl")) ==
        strip_wall(slurp(dir / "b.cfg.history.jsonl")));
}

TEST_CASE("sequence data flows through extract, train, eval and compile") {
  const fs::path dir = scratch_dir();

  // Two separable sequence shapes: rising ramps (class 1) and noisy flat
  // series (class 0); the statistics bank separates them by trend slope.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string text;
  for (int i = 0; i < 120; ++i) {
    const bool rising = i % 2;
    text += rising ? "1" : "0";
    double level = 0.2 + 0.3 * unit(rng);
    for (int t = 0; t < 24; ++t) {
      const double v = rising ? level + 0.02 * t + 0.01 * unit(rng) : level + 0.05 * unit(rng);
      text += " " + std::to_string(v);
    }
    text += "\n";
  }
  write_text(dir / "train_seq.txt", text);

  std::string test_text;
  for (int i = 0; i < 60; ++i) {
    const bool rising = i % 2;
    test_text += rising ? "1" : "0";
    double level = 0.2 + 0.3 * unit(rng);
    for (int t = 0; t < 24; ++t) {
      const double v = rising ? level + 0.02 * t + 0.01 * unit(rng) : level + 0.05 * unit(rng);
      test_text += " " + std::to_string(v);
    }
    test_text += "\n";
  }
  write_text(dir / "test_seq.txt", test_text);

  REQUIRE(run_cli("extract --in " + (dir / "train_seq.txt").string() + " --out " +
                  (dir / "train_f.csv").string())
              .exit_code == 0);
  REQUIRE(run_cli("extract --in " + (dir / "test_seq.txt").string() + " --out " +
                  (dir / "test_f.csv").string())
              .exit_code == 0);

  write_text(dir / "seq.cfg",
             "hidden_sizes = 12\n"
             "group_size = 4\n"
             "ste_threshold = true\n"
             "ste_logic = true\n"
             "ste_sum = true\n"
             "learning_rate = 0.03\n"
             "epochs = 40\n");
  const auto train_res = run_cli("train --train " + (dir / "train_f.csv").string() + " --test " +
                                 (dir / "test_f.csv").string() + " --config " +
                                 (dir / "seq.cfg").string() + " --seed 1 --out " +
                                 (dir / "m.json").string());
  REQUIRE(train_res.exit_code == 0);
  const json doc = json::parse(train_res.out);
  CHECK(doc.at("test_balanced_accuracy").get<double>() >= 0.9);

  const auto eval_res = run_cli("eval --model " + (dir / "m.json").string() + " --data " +
                                (dir / "test_f.csv").string());
  REQUIRE(eval_res.exit_code == 0);
  CHECK(json::parse(eval_res.out).at("balanced_accuracy").get<double>() ==
        doctest::Approx(doc.at("test_balanced_accuracy").get<double>()).epsilon(1e-15));

  const auto compile_res = run_cli("compile --model " + (dir / "m.json").string() + " --out " +
                                   (dir / "rules").string());
  REQUIRE(compile_res.exit_code == 0);
  const std::string rules = slurp(dir / "rules.rules.txt");
  CHECK(rules.find("class 0:") != std::string::npos);
  CHECK(rules.find("class 1:") != std::string::npos);
}

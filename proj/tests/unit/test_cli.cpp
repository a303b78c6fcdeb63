#include "doctest.h"

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seep/cli.hpp"
#include "seep/metrics.hpp"
#include "seep/run_export.hpp"
#include "support.hpp"

using namespace seep;
using seep::test::slurp;
using seep::test::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "seep");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json load(const std::filesystem::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("synth then detect writes every output") {
  TempDir t;
  const auto run = (t / "run").string(), out = (t / "det").string();
  REQUIRE(cli({"synth", "--out", run, "--seed", "3"}).code == 0);
  CHECK(std::filesystem::exists(t / "run" / "synth_config.json"));
  const auto r = cli({"detect", run, "--k", "5", "--tau", "1e-8", "--out", out});
  REQUIRE(r.code == 0);
  for (const char* f : {"report.json", "flagged.u32", "seeds.u32", "trace.jsonl", "scores.csv"}) {
    CHECK(std::filesystem::exists(t / "det" / f));
  }
  const auto rep = load(t / "det" / "report.json");
  CHECK(rep["metrics"]["far"].get<double>() < 1.0);
  CHECK(rep["config"]["k"] == 5);
  CHECK(rep["terminated_by"] == "threshold");
  const auto flagged = binary::read_u32_all(t / "det" / "flagged.u32");
  CHECK(flagged.size() == rep["n_flagged"].get<std::size_t>());
  const auto trace = slurp(t / "det" / "trace.jsonl");
  const auto first = nlohmann::json::parse(trace.substr(0, trace.find('\n')));
  CHECK(first.contains("frontier"));
  CHECK(first.contains("precision"));
}

TEST_CASE("detect is byte-identical across runs") {
  TempDir t;
  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--preset", "mixed", "--seed", "2"}).code == 0);
  REQUIRE(cli({"detect", run, "--out", (t / "a").string()}).code == 0);
  REQUIRE(cli({"detect", run, "--out", (t / "b").string()}).code == 0);
  for (const char* f : {"report.json", "flagged.u32", "seeds.u32", "trace.jsonl", "scores.csv"}) {
    CHECK(slurp(t / "a" / f) == slurp(t / "b" / f));
  }
}

TEST_CASE("scorer and density ablation flags") {
  TempDir t;
  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--seed", "1", "--n", "600"}).code == 0);
  CHECK(cli({"detect", run, "--scorer", "mean", "--out", (t / "m").string()}).code == 0);
  CHECK(load(t / "m" / "report.json")["config"]["scorer"] == "mean");
  CHECK(cli({"detect", run, "--density", "gmm", "--gmm-components", "2", "--out", (t / "g").string()}).code == 0);
  CHECK(load(t / "g" / "report.json")["config"]["density"] == "gmm");
  CHECK(cli({"detect", run, "--density-space", "raw", "--out", (t / "r").string()}).code == 0);
}

TEST_CASE("ablate reports equal discard counts") {
  TempDir t;
  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--seed", "1"}).code == 0);
  REQUIRE(cli({"ablate", run, "--out", (t / "ab").string()}).code == 0);
  const auto j = load(t / "ab" / "ablation.json");
  CHECK(j["seep"]["n_flagged"] == j["discard_count"]);
  CHECK(j["dynamics_only"]["n_flagged"] == j["discard_count"]);
  CHECK(j["seep"]["metrics"]["far"].get<double>() < 1.0);
  // Separable poison is also overconfident, so dynamics alone nearly suffice here.
  CHECK(j["dynamics_only"]["metrics"]["far"].get<double>() < 2.5);
}

TEST_CASE("baseline clustering") {
  TempDir t;
  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--seed", "1", "--n", "500"}).code == 0);
  REQUIRE(cli({"baseline", "clustering", run, "--discard-count", "100", "--out", (t / "c").string()}).code == 0);
  CHECK(binary::read_u32_all(t / "c" / "flagged.u32").size() == 100);
  CHECK(cli({"baseline", "clustering", run, "--discard-count", "501", "--out", (t / "c").string()}).code == 2);
  CHECK(cli({"baseline", "clustering", run, "--out", (t / "c").string()}).code == 2);
}

TEST_CASE("benign run reports FAR as undefined") {
  TempDir t;
  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--preset", "benign", "--seed", "1"}).code == 0);
  REQUIRE(cli({"detect", run, "--out", (t / "d").string()}).code == 0);
  const auto m = load(t / "d" / "report.json")["metrics"];
  CHECK(m["far"] == "undefined");
  CHECK(m["recall"] == "undefined");
  CHECK(m["frr"].is_number());
}

TEST_CASE("export without mask still detects") {
  TempDir t;
  const auto run = t / "run";
  REQUIRE(cli({"synth", "--out", run.string(), "--seed", "1", "--n", "400"}).code == 0);
  auto j = load(run / "manifest.json");
  j["arrays"].erase("poison_mask");
  std::ofstream(run / "manifest.json") << j.dump(2);
  REQUIRE(cli({"detect", run.string(), "--out", (t / "d").string()}).code == 0);
  CHECK(load(t / "d" / "report.json")["metrics"].is_null());
}

TEST_CASE("viz export") {
  TempDir t;
  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--seed", "1", "--n", "300"}).code == 0);
  const auto csv = (t / "viz" / "pca.csv").string();
  REQUIRE(cli({"viz-export", run, "--out", csv}).code == 0);
  const auto text = slurp(csv);
  CHECK(text.rfind("instance_id,pc1,pc2,is_seed,is_flagged,is_poison\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 301);
}

TEST_CASE("eval") {
  TempDir t;
  PredictionFile f;
  f.n_classes = 2;
  f.target_label = 0;
  f.sets = {{"clean", PredictionRole::clean, "backdoored", {1, 1}, std::vector<std::uint32_t>{1, 1}},
            {"poisoned", PredictionRole::poisoned, "backdoored", {0, 0}, std::nullopt},
            {"benign_poisoned", PredictionRole::poisoned, "benign", {0, 1}, std::nullopt}};
  write_prediction_file(f, t / "predictions");
  const auto r = cli({"eval", t.path().string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["sets"][0]["cacc"] == 100.0);
  CHECK(j["sets"][1]["asr"] == 100.0);
  CHECK(j["sets"][1]["asr_gap"] == 50.0);

  f.target_label.reset();
  write_prediction_file(f, t / "nt");
  const auto bad = cli({"eval", (t / "nt").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("target_label") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir t;
  CHECK(cli({"detect", (t / "missing").string(), "--out", (t / "o").string()}).code == 2);
  CHECK(cli({"detect", "x", "--out", "y", "--k", "0"}).code == 2);
  CHECK(cli({"detect", "x", "--out", "y", "--tau", "-1"}).code == 2);
  CHECK(cli({"detect", "x", "--out", "y", "--scorer", "median"}).code == 2);
  CHECK(cli({"detect", "x", "--out", "y", "--density-space", "pca:0"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);

  const auto run = (t / "run").string();
  REQUIRE(cli({"synth", "--out", run, "--n", "200"}).code == 0);
  std::ofstream(t / "file") << "x";
  CHECK(cli({"detect", run, "--out", (t / "file" / "sub").string()}).code == 3);
}

TEST_CASE("help documents flags with their defaults") {
  const auto r = cli({"detect", "--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--k", "--tau", "--seed-fraction", "--scorer", "--density", "--bandwidth",
                           "--gmm-components", "--density-space", "--max-iterations", "--refit-density"}) {
    CHECK(r.out.find(flag) != std::string::npos);
  }
  CHECK(r.out.find("1e-08") != std::string::npos);
  CHECK(r.out.find("reference setting: 5") != std::string::npos);
}

TEST_CASE("installed binary maps errors to exit codes") {
  const std::string bin = SEEP_BINARY;
  CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
  const int rc = std::system((bin + " detect /nonexistent/dir --out /tmp/x 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(rc) == 2);
}

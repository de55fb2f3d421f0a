// Copyright 2026 The ConfLog Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CONFLOG_CLI_PATH;
const std::string kFixtures = CONFLOG_FIXTURES_DIR;
const std::string kCorpus = kFixtures + "/minicorpus";
const std::string kDocs = kFixtures + "/params.xml";

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  std::string out_file = "/tmp/conflog_cli_out_" + std::to_string(counter++) + ".txt";
  int rc = std::system((kCli + " " + args + " > " + out_file + " 2>&1").c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(rc);
  std::ifstream in(out_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.output = buf.str();
  fs::remove(out_file);
  return r;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

std::string tmp_path(const std::string& name) { return "/tmp/conflog_cli_" + name; }

// the manifest carries wall-clock timings; strip it when comparing reports
nlohmann::json without_manifest(nlohmann::json j) {
  j.erase("manifest");
  return j;
}

}  // namespace

TEST_CASE("engines prints the labeled set and records timing in the manifest") {
  std::string rep = tmp_path("engines.json");
  auto r = run("engines --src " + kCorpus + " --docs " + kDocs + " --report " + rep);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("class\tkind") != std::string::npos);
  auto j = read_json(rep);
  CHECK(j["engines"].size() >= 12);
  REQUIRE(j.contains("manifest"));
  double t = j["manifest"]["timings_seconds"]["engine_labeling"].get<double>();
  CHECK(t >= 0.0);
  CHECK(t < 1.0);
  CHECK(j["manifest"]["config"]["command"] == "engines");
}

TEST_CASE("analyze reports one sensitive block per corpus case") {
  std::string rep = tmp_path("analyze.json");
  auto r = run("analyze --src " + kCorpus + " --docs " + kDocs + " --quiet --report " + rep);
  REQUIRE(r.exit_code == 0);
  auto j = read_json(rep);
  CHECK(j["blocks"].size() == 12);
  for (const auto& b : j["blocks"]) {
    CHECK(b["parameters"].size() >= 1);
    CHECK(b["path_len"].get<int>() >= 1);
  }
  // deterministic modulo the timing manifest
  std::string rep2 = tmp_path("analyze2.json");
  REQUIRE(run("analyze --src " + kCorpus + " --docs " + kDocs + " --quiet --report " + rep2)
              .exit_code == 0);
  CHECK(without_manifest(j).dump() == without_manifest(read_json(rep2)).dump());
}

TEST_CASE("analyze can dump the dependence graph") {
  std::string dump = tmp_path("pdg.json");
  auto r = run("analyze --src " + kCorpus + " --docs " + kDocs + " --quiet --dump-pdg " + dump +
               " --report " + tmp_path("analyze3.json"));
  REQUIRE(r.exit_code == 0);
  auto j = read_json(dump);
  CHECK(j["edges"].size() > 0);
}

TEST_CASE("a tighter path bound can only shrink the block set") {
  std::string rep = tmp_path("analyze_b1.json");
  auto r = run("analyze --src " + kCorpus + " --docs " + kDocs +
               " --max-path-len 1 --quiet --report " + rep);
  REQUIRE(r.exit_code == 0);
  auto j = read_json(rep);
  CHECK(j["blocks"].size() <= 12);
  CHECK(j["manifest"]["config"]["max_path_len"] == 1);
}

TEST_CASE("enhance injects once and is idempotent") {
  std::string out1 = tmp_path("enh1"), out2 = tmp_path("enh2");
  fs::remove_all(out1);
  fs::remove_all(out2);
  std::string rep1 = tmp_path("enh1.json"), rep2 = tmp_path("enh2.json");

  auto r1 = run("enhance --src " + kCorpus + " --docs " + kDocs + " --out " + out1 +
                " --quiet --report " + rep1);
  REQUIRE(r1.exit_code == 0);
  auto j1 = read_json(rep1);
  CHECK(j1["injected"] == 12);
  CHECK(j1["kept"] == 0);

  auto r2 = run("enhance --src " + out1 + " --docs " + kDocs + " --out " + out2 +
                " --quiet --report " + rep2);
  REQUIRE(r2.exit_code == 0);
  auto j2 = read_json(rep2);
  CHECK(j2["injected"] == 0);
  CHECK(j2["kept"] == 12);

  // second pass copies the enhanced sources byte for byte
  for (const auto& entry : fs::directory_iterator(out1)) {
    std::ifstream a(entry.path()), b(fs::path(out2) / entry.path().filename());
    REQUIRE(b.good());
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("evaluate scores a prediction file against ground truth") {
  nlohmann::json truth = nlohmann::json::array();
  nlohmann::json predicted = nlohmann::json::array();
  truth.push_back({{"file", "a.mini"},
                   {"line", 10},
                   {"block_id", "b0"},
                   {"level", "warn"},
                   {"variables", {"x"}},
                   {"text", "value out of range"}});
  truth.push_back({{"file", "a.mini"},
                   {"line", 20},
                   {"block_id", "b1"},
                   {"level", "info"},
                   {"variables", nlohmann::json::array()},
                   {"text", "processed"}});
  predicted.push_back({{"file", "a.mini"},
                       {"line", 11},
                       {"block_id", "b0"},
                       {"level", "warn"},
                       {"variables", {"x"}},
                       {"text", "value out of range"}});
  predicted.push_back({{"file", "a.mini"},
                       {"line", 28},
                       {"block_id", "b1"},
                       {"level", "info"},
                       {"variables", nlohmann::json::array()},
                       {"text", "processed"}});
  std::ofstream(tmp_path("truth.json")) << truth.dump();
  std::ofstream(tmp_path("pred.json")) << predicted.dump();

  std::string rep = tmp_path("eval.json");
  auto r = run("evaluate --truth " + tmp_path("truth.json") + " --predicted " +
               tmp_path("pred.json") + " --quiet --report " + rep);
  REQUIRE(r.exit_code == 0);
  auto j = read_json(rep);
  CHECK(j["coverage"].get<double>() == 0.5);
  CHECK(j["coverage_percent"] == "50%");
  CHECK(j["avg_la"].get<double>() == 1.0);
}

TEST_CASE("invalid inputs exit with code 1") {
  CHECK(run("analyze --src " + kCorpus + " --docs " + kDocs + " --max-path-len 0").exit_code == 1);
  CHECK(run("analyze --src " + kCorpus).exit_code == 1);
  CHECK(run("analyze --docs " + kDocs).exit_code == 1);
  CHECK(run("analyze --src /nonexistent_dir_42 --docs " + kDocs).exit_code == 1);

  std::ofstream(tmp_path("junk.json")) << "{\"not_units\": 1}";
  CHECK(run("analyze --ir " + tmp_path("junk.json") + " --docs " + kDocs).exit_code == 1);
}

TEST_CASE("external backend without an endpoint is an input error") {
  std::string out = tmp_path("enh_ext");
  auto r = run("enhance --src " + kCorpus + " --docs " + kDocs + " --out " + out +
               " --backend external");
  CHECK(r.exit_code == 1);
}

TEST_CASE("unreachable external endpoints fall back to the template backend") {
  std::string out = tmp_path("enh_fb");
  fs::remove_all(out);
  std::string rep = tmp_path("enh_fb.json");
  auto r = run("enhance --src " + kCorpus + " --docs " + kDocs + " --out " + out +
               " --backend external --endpoint http://127.0.0.1:1 --quiet --report " + rep);
  REQUIRE(r.exit_code == 0);
  auto j = read_json(rep);
  CHECK(j["injected"] == 12);
  CHECK(j["external_fallbacks"] == 12);
}

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

#include "conflog/logsynth.hpp"

#include "catch_amalgamated.hpp"

using namespace conflog;

namespace {

ParameterCatalog make_catalog(const std::vector<std::string>& keys) {
  ParameterCatalog cat;
  int i = 0;
  for (const auto& k : keys) {
    ConfigParameter p;
    p.key = k;
    p.source_doc = "inline";
    p.source_index = i++;
    cat.add(std::move(p));
  }
  return cat;
}

struct Analyzed {
  std::vector<CompilationUnit> units;
  std::vector<SensitiveBlock> blocks;
};

Analyzed analyze(const std::string& text, const std::vector<std::string>& keys,
                 const std::string& file = "t.mini") {
  Analyzed a;
  a.units = parse_sources({{file, text}});
  auto cat = make_catalog(keys);
  auto engines = label_engines(a.units, cat);
  auto pdg = build_pdg(a.units, true);
  auto sources = find_sources(a.units, pdg, engines, cat);
  auto paths = track_taints(a.units, pdg, sources, 30);
  a.blocks = extract_blocks(a.units, pdg, paths);
  return a;
}

const char* kEngineDef = R"(
class Configuration {
  static string FRAMEWORK_KEY = "mapreduce.framework.name";
  static string AVOID_KEY = "dfs.namenode.avoid.write.stale.datanode";
  static string SIZE_KEY = "io.buffer.size";
  public bool getBoolean(string key, bool def) {
    return def;
  }
  public string get(string key, string def) {
    return def;
  }
  public int getInt(string key, int def) {
    return def;
  }
}
)";

const std::vector<std::string> kKeys = {"mapreduce.framework.name",
                                        "dfs.namenode.avoid.write.stale.datanode",
                                        "io.buffer.size"};

}  // namespace

TEST_CASE("inspect_existing keeps logs naming a parameter key") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
      LOG.warn("dfs.namenode.avoid.write.stale.datanode is on");
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  CHECK(inspect_existing(a.units, a.blocks[0]) == Decision::KeepExisting);
}

TEST_CASE("inspect_existing keeps logs printing a tainted variable") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
      LOG.warn("stale avoidance={}", avoid);
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  CHECK(inspect_existing(a.units, a.blocks[0]) == Decision::KeepExisting);
}

TEST_CASE("inspect_existing flags uninformative logs and injects without logs") {
  auto flagged = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
      LOG.info("done");
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                         kKeys);
  REQUIRE(flagged.blocks.size() == 1);
  std::string why;
  CHECK(inspect_existing(flagged.units, flagged.blocks[0], &why) ==
        Decision::InjectAndFlagRedundant);
  CHECK_FALSE(why.empty());

  auto bare = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                      kKeys);
  REQUIRE(bare.blocks.size() == 1);
  CHECK(inspect_existing(bare.units, bare.blocks[0]) == Decision::Inject);
}

TEST_CASE("both arms writing one target classify as fallback_path") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  CHECK(classify_scenario(a.units, a.blocks[0]) == Scenario::FallbackPath);
}

TEST_CASE("early return classifies as service_switch") {
  auto a = analyze(std::string(kEngineDef) + R"(
class SharedCache {
  Configuration conf;
  int state;
  void start() {
    string name = conf.get(Configuration.FRAMEWORK_KEY, "local");
    if (name == "yarn") {
      this.state = 1;
    } else {
      return;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  CHECK(classify_scenario(a.units, a.blocks[0]) == Scenario::ServiceSwitch);
}

TEST_CASE("single rescaling write classifies as config_processing") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int bytes;
  void init() {
    int n = conf.getInt(Configuration.SIZE_KEY, 4);
    if (n > 0) {
      this.bytes = n * 1024;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  CHECK(classify_scenario(a.units, a.blocks[0]) == Scenario::ConfigProcessing);
}

TEST_CASE("drafts carry scenario level, keys, arity, and guidance") {
  auto a = analyze(std::string(kEngineDef) + R"(
class SharedCache {
  Configuration conf;
  int state;
  void start() {
    string name = conf.get(Configuration.FRAMEWORK_KEY, "local");
    if (name == "yarn") {
      this.state = 1;
    } else {
      return;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  auto scenario = classify_scenario(a.units, a.blocks[0]);
  auto d = synthesize_template(a.units, a.blocks[0], scenario, Decision::Inject);
  CHECK(d.level == LogLevel::Warn);
  CHECK(d.message_template.find("mapreduce.framework.name") != std::string::npos);
  CHECK(d.guidance == "Please set 'mapreduce.framework.name' to 'yarn'.");
  REQUIRE(d.variables.size() == 1);
  CHECK(d.variables[0] == "name == \"yarn\"");
  size_t placeholders = 0;
  for (size_t i = 0; i + 1 < d.message_template.size(); ++i)
    if (d.message_template[i] == '{' && d.message_template[i + 1] == '}') ++placeholders;
  CHECK(placeholders == d.variables.size());
  // within the handling span or immediately after the check
  CHECK(d.insert_line > a.blocks[0].entry_line.line);
  CHECK(d.insert_line <= a.blocks[0].handling_span.end);
}

TEST_CASE("opaque predicates fall back to quoting the condition") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    }
    return;
  }
}
)",
                   kKeys);
  REQUIRE(a.blocks.size() == 1);
  auto d = synthesize_template(a.units, a.blocks[0],
                               classify_scenario(a.units, a.blocks[0]), Decision::Inject);
  CHECK(d.message_template.find("checked condition: avoid") != std::string::npos);
  CHECK(d.message_template.find("dfs.namenode.avoid.write.stale.datanode") != std::string::npos);
  CHECK(d.guidance.empty());
}

TEST_CASE("config_processing drafts log at INFO") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int bytes;
  void init() {
    int n = conf.getInt(Configuration.SIZE_KEY, 4);
    if (n > 0) {
      this.bytes = n * 1024;
    }
    return;
  }
}
)",
                   kKeys);
  auto d = synthesize_template(a.units, a.blocks[0],
                               classify_scenario(a.units, a.blocks[0]), Decision::Inject);
  CHECK(d.level == LogLevel::Info);
}

TEST_CASE("template backend is deterministic") {
  auto run = [] {
    auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                     kKeys);
    auto d = synthesize_template(a.units, a.blocks[0],
                                 classify_scenario(a.units, a.blocks[0]), Decision::Inject);
    return draft_to_json(d).dump();
  };
  CHECK(run() == run());
}

TEST_CASE("rewrite inserts exactly one statement and round-trips") {
  std::string src = std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    } else {
      this.interval = 5;
    }
    return;
  }
}
)";
  auto a = analyze(src, kKeys);
  auto d = synthesize_template(a.units, a.blocks[0],
                               classify_scenario(a.units, a.blocks[0]), Decision::Inject);
  std::string out = rewrite_source(src, d);

  std::vector<std::string> before, after;
  auto split = [](const std::string& s, std::vector<std::string>& v) {
    std::istringstream in(s);
    std::string l;
    while (std::getline(in, l)) v.push_back(l);
  };
  split(src, before);
  split(out, after);
  REQUIRE(after.size() == before.size() + 1);
  const std::string& injected = after[d.insert_line - 1];
  CHECK(injected.find("LOG.warn(") != std::string::npos);
  // indentation matches the displaced line
  CHECK(injected.substr(0, injected.find("LOG")) ==
        before[d.insert_line - 1].substr(0, before[d.insert_line - 1].find_first_not_of(" \t")));
  // stripping the injected line restores the original byte for byte
  after.erase(after.begin() + (d.insert_line - 1));
  CHECK(after == before);
}

TEST_CASE("rewrite refuses inserts that break parsing") {
  std::string src = "class C {\n  void f() {\n    return;\n  }\n}\n";
  auto units = parse_sources({{"t.mini", src}});
  LogDraft d;
  d.decision = Decision::Inject;
  d.insert_file = "t.mini";
  d.insert_line = 1;  // before `class`, outside any method body
  d.message_template = "x";
  CHECK_THROWS_AS(rewrite_source(src, d), ReparseFailure);
}

TEST_CASE("keep_existing drafts rewrite to the identity") {
  std::string src = "class C {\n  void f() {\n    return;\n  }\n}\n";
  LogDraft d;
  d.decision = Decision::KeepExisting;
  CHECK(rewrite_source(src, d) == src);
}

TEST_CASE("generator responses are gated by the wire invariants") {
  GeneratorRequest req;
  req.code_whole = "class C {\n  void f() {\n    int x = 1;\n  }\n}\n";
  req.code_specified = "    int x = 1;";
  req.params = {"k.one"};

  GeneratorResponse ok;
  ok.enhanced_code = "class C {\n  void f() {\n    LOG.warn(\"k.one bad\");\n    int x = 1;\n  }\n}\n";
  ok.inserted_line = 3;
  ok.level = LogLevel::Warn;
  ok.message_template = "k.one bad";
  CHECK_NOTHROW(validate_response(req, ok, "t.mini"));

  GeneratorResponse multi = ok;
  multi.enhanced_code =
      "class C {\n  void f() {\n    LOG.warn(\"k.one bad\");\n    LOG.warn(\"again\");\n    int "
      "x = 1;\n  }\n}\n";
  CHECK_THROWS_AS(validate_response(req, multi, "t.mini"), ResponseRejected);

  GeneratorResponse vague = ok;
  vague.enhanced_code = "class C {\n  void f() {\n    LOG.warn(\"oops\");\n    int x = 1;\n  }\n}\n";
  vague.message_template = "oops";
  CHECK_THROWS_AS(validate_response(req, vague, "t.mini"), ResponseRejected);
}

TEST_CASE("enhancing twice changes nothing the second time") {
  std::string src = std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    } else {
      this.interval = 5;
    }
    return;
  }
}
)";
  auto first = analyze(src, kKeys);
  REQUIRE(first.blocks.size() == 1);
  REQUIRE(inspect_existing(first.units, first.blocks[0]) == Decision::Inject);
  auto d = synthesize_template(first.units, first.blocks[0],
                               classify_scenario(first.units, first.blocks[0]), Decision::Inject);
  std::string enhanced = rewrite_source(src, d);

  auto second = analyze(enhanced, kKeys);
  REQUIRE(second.blocks.size() == 1);
  CHECK(inspect_existing(second.units, second.blocks[0]) == Decision::KeepExisting);
}

TEST_CASE("rendered log lines expose the parameter key for replay") {
  auto a = analyze(std::string(kEngineDef) + R"(
class User {
  Configuration conf;
  int interval;
  void init() {
    bool avoid = conf.getBoolean(Configuration.AVOID_KEY, false);
    if (avoid) {
      this.interval = 3;
    } else {
      this.interval = 5;
    }
    return;
  }
}
)",
                   kKeys);
  auto d = synthesize_template(a.units, a.blocks[0],
                               classify_scenario(a.units, a.blocks[0]), Decision::Inject);
  std::string line = render_log_line(d);
  CHECK(line.find("WARN") == 0);
  CHECK(line.find("dfs.namenode.avoid.write.stale.datanode") != std::string::npos);
  CHECK(line.find("{}") == std::string::npos);
}

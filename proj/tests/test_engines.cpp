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

#include "conflog/engines.hpp"

#include "catch_amalgamated.hpp"
#include "conflog/parser.hpp"

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

std::vector<CompilationUnit> parse_one(const std::string& text) {
  return parse_sources({{"t.mini", text}});
}

}  // namespace

TEST_CASE("class with a colored constant and no getters is a key_holder seed") {
  auto units = parse_one(R"(
class DFSConfigKeys {
  static string AVOID_KEY = "dfs.namenode.avoid.write.stale.datanode";
}
)");
  auto cat = make_catalog({"dfs.namenode.avoid.write.stale.datanode"});
  auto set = label_engines(units, cat);
  const ConfigEngine* e = set.find("DFSConfigKeys");
  REQUIRE(e != nullptr);
  CHECK(e->kind == EngineKind::KeyHolder);
  CHECK(e->getters.empty());
  REQUIRE(e->colored_constants.count("AVOID_KEY"));
  CHECK(e->colored_constants.at("AVOID_KEY") == "dfs.namenode.avoid.write.stale.datanode");
  bool seeded = false;
  for (const auto& [cls, reason] : set.expansion_trace)
    if (cls == "DFSConfigKeys" && reason == ExpansionReason::Seed) seeded = true;
  CHECK(seeded);
}

TEST_CASE("inheritance expands in both directions") {
  auto units = parse_one(R"(
class CommonConfigurationKeys {
  static string IPC_KEY = "ipc.ping.interval";
}
class DFSConfigKeys extends CommonConfigurationKeys {
  static string AVOID_KEY = "dfs.namenode.avoid.write.stale.datanode";
}
class HdfsServerConstants extends DFSConfigKeys {
  static string UNRELATED = "not a key";
}
)");
  auto cat = make_catalog({"dfs.namenode.avoid.write.stale.datanode", "ipc.ping.interval"});
  auto set = label_engines(units, cat);
  REQUIRE(set.find("CommonConfigurationKeys") != nullptr);
  REQUIRE(set.find("DFSConfigKeys") != nullptr);
  // subclass of an engine is an engine; it inherits the colored members
  const ConfigEngine* sub = set.find("HdfsServerConstants");
  REQUIRE(sub != nullptr);
  CHECK(sub->kind == EngineKind::KeyHolder);
  CHECK(sub->colored_constants.count("AVOID_KEY"));
  bool via_inherit = false;
  for (const auto& [cls, reason] : set.expansion_trace)
    if (cls == "HdfsServerConstants" && reason == ExpansionReason::Inheritance) via_inherit = true;
  CHECK(via_inherit);
}

TEST_CASE("generic getter plus colored constant is a both_holder") {
  auto units = parse_one(R"(
class Configuration {
  static string DEFAULT_FS = "fs.defaultFS";
  public bool getBoolean(string key, bool def) {
    return def;
  }
}
)");
  auto cat = make_catalog({"fs.defaultFS"});
  auto set = label_engines(units, cat);
  const ConfigEngine* e = set.find("Configuration");
  REQUIRE(e != nullptr);
  CHECK(e->kind == EngineKind::BothHolder);
  const Getter* g = e->find_getter("Configuration.getBoolean(string,bool):bool");
  REQUIRE(g != nullptr);
  CHECK(g->style == GetterStyle::GenericByKey);
}

TEST_CASE("expanded class with only a generic getter is a dict_holder") {
  auto units = parse_one(R"(
class DFSConfigKeys {
  static string AVOID_KEY = "dfs.namenode.avoid.write.stale.datanode";
}
class Props {
  DFSConfigKeys keys;
  public string get(string key) {
    return key;
  }
}
)");
  auto cat = make_catalog({"dfs.namenode.avoid.write.stale.datanode"});
  auto set = label_engines(units, cat);
  const ConfigEngine* e = set.find("Props");
  REQUIRE(e != nullptr);
  CHECK(e->kind == EngineKind::DictHolder);
  bool via_comp = false;
  for (const auto& [cls, reason] : set.expansion_trace)
    if (cls == "Props" && reason == ExpansionReason::Composition) via_comp = true;
  CHECK(via_comp);
}

TEST_CASE("built-in specific getters carry known keys; void methods excluded") {
  auto units = parse_one(R"(
class Conf {
  static string RESILIENT_KEY = "dfs.resilient.enabled";
  public bool getBoolean(string key, bool def) {
    return def;
  }
  public bool getResilient() {
    bool v = this.getBoolean(RESILIENT_KEY, false);
    return v;
  }
  public void reload() {
    return;
  }
}
)");
  auto cat = make_catalog({"dfs.resilient.enabled"});
  auto set = label_engines(units, cat);
  const ConfigEngine* e = set.find("Conf");
  REQUIRE(e != nullptr);
  CHECK(e->kind == EngineKind::BothHolder);
  const Getter* g = e->find_getter("Conf.getResilient():bool");
  REQUIRE(g != nullptr);
  CHECK(g->style == GetterStyle::BuiltInSpecific);
  REQUIRE(g->known_keys.size() == 1);
  CHECK(g->known_keys[0] == "dfs.resilient.enabled");
  CHECK(e->find_getter("Conf.reload():void") == nullptr);
}

TEST_CASE("nested classes of engines are expanded via composition") {
  auto units = parse_one(R"(
class Outer {
  static string KEY = "a.b.c";
  class Inner {
    static string OTHER = "x.y.z";
  }
}
)");
  auto cat = make_catalog({"a.b.c", "x.y.z"});
  auto set = label_engines(units, cat);
  CHECK(set.find("Outer") != nullptr);
  const ConfigEngine* inner = set.find("Outer.Inner");
  REQUIRE(inner != nullptr);
  CHECK(inner->kind == EngineKind::KeyHolder);
}

TEST_CASE("every engine satisfies its kind invariant") {
  auto units = parse_one(R"(
class Keys {
  static string K1 = "k.one";
}
class Store extends Keys {
  public int getInt(string key) {
    return 0;
  }
}
class Reader {
  Store s;
  public string read(string key) {
    return key;
  }
}
)");
  auto cat = make_catalog({"k.one"});
  auto set = label_engines(units, cat);
  for (const auto& e : set.engines) {
    int generic = 0, builtin = 0;
    for (const auto& g : e.getters)
      (g.style == GetterStyle::GenericByKey ? generic : builtin)++;
    switch (e.kind) {
      case EngineKind::KeyHolder:
        CHECK(!e.colored_constants.empty());
        CHECK(e.getters.empty());
        break;
      case EngineKind::DictHolder:
        CHECK(generic >= 1);
        break;
      case EngineKind::BothHolder:
        CHECK(generic >= 1);
        CHECK((!e.colored_constants.empty() || builtin >= 1));
        break;
    }
  }
}

TEST_CASE("adding an unrelated class never removes or reclassifies engines") {
  std::string base = R"(
class Keys {
  static string K1 = "k.one";
}
class Conf extends Keys {
  public bool getBoolean(string key, bool def) {
    return def;
  }
}
)";
  auto cat = make_catalog({"k.one"});
  auto before = label_engines(parse_one(base), cat);
  auto after = label_engines(
      parse_one(base + "\nclass Bystander {\n  int counter;\n  void tick() {\n    this.counter "
                       "= 1;\n  }\n}\n"),
      cat);
  CHECK(after.find("Bystander") == nullptr);
  for (const auto& e : before.engines) {
    const ConfigEngine* e2 = after.find(e.class_name);
    REQUIRE(e2 != nullptr);
    CHECK(e2->kind == e.kind);
  }
}

TEST_CASE("expansion trace replays: every non-seed links to an earlier engine class") {
  auto units = parse_one(R"(
class Keys {
  static string K1 = "k.one";
}
class Sub extends Keys {
  int x;
}
class Holder {
  Sub s;
  public int get(string key) {
    return 0;
  }
}
)");
  auto cat = make_catalog({"k.one"});
  auto set = label_engines(units, cat);

  std::map<std::string, const ClassDecl*> by_name;
  for (const auto& u : units)
    for (const auto& c : u.classes) by_name[c.qualified_name] = &c;

  std::set<std::string> labeled_so_far;
  for (const auto& [cls, reason] : set.expansion_trace) {
    if (reason != ExpansionReason::Seed) {
      const ClassDecl* c = by_name.at(cls);
      bool linked = false;
      if (c->superclass && labeled_so_far.count(*c->superclass)) linked = true;
      if (c->nested_in && labeled_so_far.count(*c->nested_in)) linked = true;
      for (const auto& f : c->fields)
        if (labeled_so_far.count(f.type)) linked = true;
      // inheritance also flows child -> parent
      for (const auto& [name, other] : by_name)
        if (labeled_so_far.count(name) && other->superclass == cls) linked = true;
      CHECK(linked);
    }
    labeled_so_far.insert(cls);
  }
  // every engine appears in the trace
  std::set<std::string> traced;
  for (const auto& [cls, reason] : set.expansion_trace) traced.insert(cls);
  for (const auto& e : set.engines) CHECK(traced.count(e.class_name));
}

TEST_CASE("labeling records a wall-clock duration") {
  auto units = parse_one("class K {\n  static string A = \"p.q\";\n}\n");
  auto cat = make_catalog({"p.q"});
  auto set = label_engines(units, cat);
  CHECK(set.labeling_seconds >= 0.0);
  CHECK(set.labeling_seconds < 1.0);
}

TEST_CASE("extra seeds force labeling of an otherwise unlabeled class") {
  auto units = parse_one(R"(
class Registry {
  public string lookup(string key) {
    return key;
  }
}
)");
  auto cat = make_catalog({"some.key"});
  auto none = label_engines(units, cat);
  CHECK(none.find("Registry") == nullptr);
  auto forced = label_engines(units, cat, {"Registry"});
  const ConfigEngine* e = forced.find("Registry");
  REQUIRE(e != nullptr);
  CHECK(e->kind == EngineKind::DictHolder);
}

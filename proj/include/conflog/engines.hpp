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

#ifndef CONFLOG_ENGINES_HPP
#define CONFLOG_ENGINES_HPP

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "conflog/catalog.hpp"
#include "conflog/ir.hpp"

namespace conflog {

enum class EngineKind { KeyHolder, DictHolder, BothHolder };

inline const char* to_string(EngineKind k) {
  switch (k) {
    case EngineKind::KeyHolder: return "key_holder";
    case EngineKind::DictHolder: return "dict_holder";
    case EngineKind::BothHolder: return "both_holder";
  }
  return "?";
}

enum class GetterStyle { GenericByKey, BuiltInSpecific };

inline const char* to_string(GetterStyle s) {
  return s == GetterStyle::GenericByKey ? "generic_by_key" : "built_in_specific";
}

struct Getter {
  MethodSig sig;
  GetterStyle style = GetterStyle::GenericByKey;
  // Keys a built-in getter is known to serve (from constants read in its body).
  std::vector<std::string> known_keys;
  bool operator==(const Getter&) const = default;
};

struct ConfigEngine {
  std::string class_name;
  EngineKind kind = EngineKind::KeyHolder;
  std::map<std::string, std::string> colored_constants;  // field name -> parameter key
  std::vector<Getter> getters;
  bool operator==(const ConfigEngine&) const = default;

  const Getter* find_getter(const std::string& sig_str) const {
    for (const auto& g : getters)
      if (g.sig.str() == sig_str) return &g;
    return nullptr;
  }
};

enum class ExpansionReason { Seed, Inheritance, Composition };

inline const char* to_string(ExpansionReason r) {
  switch (r) {
    case ExpansionReason::Seed: return "seed";
    case ExpansionReason::Inheritance: return "inheritance";
    case ExpansionReason::Composition: return "composition";
  }
  return "?";
}

struct EngineSet {
  std::vector<ConfigEngine> engines;
  std::vector<std::pair<std::string, ExpansionReason>> expansion_trace;
  double labeling_seconds = 0.0;

  const ConfigEngine* find(const std::string& class_name) const {
    for (const auto& e : engines)
      if (e.class_name == class_name) return &e;
    return nullptr;
  }
  // getter call resolution: callee signature -> (engine, getter)
  std::pair<const ConfigEngine*, const Getter*> getter_by_callee(
      const std::string& callee_sig) const {
    for (const auto& e : engines)
      if (const Getter* g = e.find_getter(callee_sig)) return {&e, g};
    return {nullptr, nullptr};
  }
};

namespace detail {

// Effective (own + inherited) members of a class.
struct EffectiveMembers {
  std::map<std::string, std::string> colored;  // field -> key
  std::vector<const MethodDecl*> generic_getters;
  std::vector<const MethodDecl*> builtin_candidates;  // no-arg value methods
};

inline bool is_generic_by_key(const MethodDecl& m) {
  if (!m.is_public || m.sig.return_type == "void") return false;
  for (const auto& pt : m.sig.param_types)
    if (pt == "string") return true;
  return false;
}

inline bool is_value_returning_no_key(const MethodDecl& m) {
  if (!m.is_public || m.sig.return_type == "void") return false;
  for (const auto& pt : m.sig.param_types)
    if (pt == "string") return false;
  return true;
}

// Keys referenced inside a method body: string constants that are catalog
// keys, or reads of colored constant fields.
inline std::vector<std::string> keys_referenced(
    const MethodDecl& m, const ParameterCatalog& catalog,
    const std::map<std::string, std::string>& colored_fields /* qualified -> key */) {
  std::set<std::string> keys;
  for (const auto& b : m.blocks)
    for (const auto& s : b.stmts) {
      if (s.kind == StmtKind::ConstString && catalog.contains(s.value)) keys.insert(s.value);
      if (s.kind == StmtKind::FieldRead) {
        auto it = colored_fields.find(s.field);
        if (it != colored_fields.end()) keys.insert(it->second);
      }
    }
  return {keys.begin(), keys.end()};
}

}  // namespace detail

// Labels configuration engine classes: seeds are classes declaring constant
// string fields whose value is a documented parameter key; expansion follows
// subclass links, lexical nesting, and fields typed as an engine class.
inline EngineSet label_engines(const std::vector<CompilationUnit>& units,
                               const ParameterCatalog& catalog,
                               const std::vector<std::string>& extra_seeds = {}) {
  auto t0 = std::chrono::steady_clock::now();
  EngineSet out;

  std::vector<const ClassDecl*> classes;
  std::map<std::string, const ClassDecl*> by_name;
  for (const auto& u : units)
    for (const auto& c : u.classes) {
      classes.push_back(&c);
      by_name[c.qualified_name] = &c;
    }

  // colored constants per class (own fields only), qualified map for lookup
  std::map<std::string, std::map<std::string, std::string>> colored_own;
  std::map<std::string, std::string> colored_fields;  // "Class.FIELD" -> key
  for (const ClassDecl* c : classes)
    for (const auto& f : c->fields)
      if (f.const_string_init && catalog.contains(*f.const_string_init)) {
        colored_own[c->qualified_name][f.name] = *f.const_string_init;
        colored_fields[c->qualified_name + "." + f.name] = *f.const_string_init;
      }

  // seed set, in deterministic class order
  std::map<std::string, ExpansionReason> labeled;
  std::vector<std::string> order;
  auto mark = [&](const std::string& name, ExpansionReason reason) {
    if (labeled.count(name)) return false;
    labeled[name] = reason;
    order.push_back(name);
    out.expansion_trace.emplace_back(name, reason);
    return true;
  };
  for (const ClassDecl* c : classes)
    if (colored_own.count(c->qualified_name)) mark(c->qualified_name, ExpansionReason::Seed);
  for (const auto& extra : extra_seeds)
    if (by_name.count(extra)) mark(extra, ExpansionReason::Seed);

  // fixpoint expansion over inheritance (both directions), nesting and
  // engine-typed fields
  bool changed = true;
  while (changed) {
    changed = false;
    for (const ClassDecl* c : classes) {
      const std::string& name = c->qualified_name;
      if (!labeled.count(name)) {
        if (c->superclass && labeled.count(*c->superclass))
          changed |= mark(name, ExpansionReason::Inheritance);
        else if (c->nested_in && labeled.count(*c->nested_in))
          changed |= mark(name, ExpansionReason::Composition);
        else {
          for (const auto& f : c->fields)
            if (labeled.count(f.type)) {
              changed |= mark(name, ExpansionReason::Composition);
              break;
            }
        }
      } else if (c->superclass && !labeled.count(*c->superclass)) {
        // superclass of an engine that declares colored members is an engine
        if (colored_own.count(*c->superclass))
          changed |= mark(*c->superclass, ExpansionReason::Inheritance);
      }
    }
  }

  // classify each labeled class from its effective members
  for (const std::string& name : order) {
    const ClassDecl* c = by_name.count(name) ? by_name.at(name) : nullptr;
    if (!c) continue;
    detail::EffectiveMembers eff;
    const ClassDecl* cur = c;
    std::set<std::string> seen;
    while (cur && seen.insert(cur->qualified_name).second) {
      auto it = colored_own.find(cur->qualified_name);
      if (it != colored_own.end())
        for (const auto& [f, k] : it->second)
          eff.colored.emplace(f, k);  // nearest declaration wins
      for (const auto& m : cur->methods) {
        if (detail::is_generic_by_key(m)) eff.generic_getters.push_back(&m);
        else if (detail::is_value_returning_no_key(m)) eff.builtin_candidates.push_back(&m);
      }
      cur = cur->superclass && by_name.count(*cur->superclass) ? by_name.at(*cur->superclass)
                                                               : nullptr;
    }

    ConfigEngine e;
    e.class_name = name;
    e.colored_constants = eff.colored;

    std::vector<Getter> generic, builtin;
    for (const MethodDecl* m : eff.generic_getters)
      generic.push_back({m->sig, GetterStyle::GenericByKey, {}});
    // A no-arg value method counts as a built-in per-parameter getter only
    // when its body actually touches a documented key.
    for (const MethodDecl* m : eff.builtin_candidates) {
      auto keys = detail::keys_referenced(*m, catalog, colored_fields);
      if (!keys.empty()) builtin.push_back({m->sig, GetterStyle::BuiltInSpecific, keys});
    }

    if (!generic.empty()) {
      e.kind = (!eff.colored.empty() || !builtin.empty()) ? EngineKind::BothHolder
                                                          : EngineKind::DictHolder;
      e.getters = generic;
      e.getters.insert(e.getters.end(), builtin.begin(), builtin.end());
    } else if (!eff.colored.empty()) {
      e.kind = EngineKind::KeyHolder;  // identifier constants only, no value getters
    } else {
      // reached by expansion but provides neither keys nor getters: not an
      // engine on its own; keep the trace entry, drop the engine
      continue;
    }
    out.engines.push_back(std::move(e));
  }

  out.labeling_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline std::vector<MethodSig> getter_inventory(const ConfigEngine& engine) {
  std::vector<MethodSig> out;
  for (const auto& g : engine.getters) out.push_back(g.sig);
  return out;
}

inline nlohmann::json engine_set_to_json(const EngineSet& set) {
  nlohmann::json j;
  j["labeling_seconds"] = set.labeling_seconds;
  j["engines"] = nlohmann::json::array();
  for (const auto& e : set.engines) {
    nlohmann::json je;
    je["class"] = e.class_name;
    je["kind"] = to_string(e.kind);
    je["colored_constants"] = e.colored_constants;
    je["getters"] = nlohmann::json::array();
    for (const auto& g : e.getters)
      je["getters"].push_back({{"signature", g.sig.str()}, {"style", to_string(g.style)}});
    j["engines"].push_back(je);
  }
  j["expansion_trace"] = nlohmann::json::array();
  for (const auto& [cls, reason] : set.expansion_trace)
    j["expansion_trace"].push_back({{"class", cls}, {"reason", to_string(reason)}});
  return j;
}

}  // namespace conflog

#endif  // CONFLOG_ENGINES_HPP

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
//
// CIR: the on-disk IR format. JSON with top-level `units[] -> classes[]`,
// each method carrying `blocks[] -> statements[]` plus a per-unit line_map.

#ifndef CONFLOG_CIR_HPP
#define CONFLOG_CIR_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "conflog/ir.hpp"

namespace conflog {

struct SchemaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cir {

using nlohmann::json;

inline json stmt_to_json(const Statement& s) {
  json j;
  j["id"] = s.id;
  j["kind"] = to_string(s.kind);
  j["uses"] = s.uses;
  j["defs"] = s.defs;
  if (!s.op.empty()) j["op"] = s.op;
  if (!s.value.empty()) j["value"] = s.value;
  if (!s.field.empty()) j["field"] = s.field;
  if (!s.callee.empty()) j["callee"] = s.callee;
  if (!s.receiver.empty()) j["receiver"] = s.receiver;
  if (s.kind == StmtKind::Call) {
    j["args"] = s.args;
    if (s.ret >= 0) j["ret"] = s.ret;
  }
  if (s.kind == StmtKind::Branch) {
    j["cond"] = s.cond;
    j["then"] = s.then_block;
    if (s.else_block >= 0) j["else"] = s.else_block;
  }
  if (!s.text.empty()) j["text"] = s.text;
  return j;
}

inline Statement stmt_from_json(const json& j) {
  Statement s;
  s.id = j.at("id").get<int>();
  s.kind = stmt_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("uses")) s.uses = j["uses"].get<std::vector<int>>();
  if (j.contains("defs")) s.defs = j["defs"].get<std::vector<int>>();
  if (j.contains("op")) s.op = j["op"].get<std::string>();
  if (j.contains("value")) s.value = j["value"].get<std::string>();
  if (j.contains("field")) s.field = j["field"].get<std::string>();
  if (j.contains("callee")) s.callee = j["callee"].get<std::string>();
  if (j.contains("receiver")) s.receiver = j["receiver"].get<std::string>();
  if (j.contains("args")) s.args = j["args"].get<std::vector<int>>();
  if (j.contains("ret")) s.ret = j["ret"].get<int>();
  if (j.contains("cond")) s.cond = j["cond"].get<int>();
  if (j.contains("then")) s.then_block = j["then"].get<int>();
  if (j.contains("else")) s.else_block = j["else"].get<int>();
  if (j.contains("text")) s.text = j["text"].get<std::string>();
  return s;
}

inline json unit_to_json(const CompilationUnit& u) {
  json ju;
  ju["path"] = u.path;
  json classes = json::array();
  for (const auto& c : u.classes) {
    json jc;
    jc["name"] = c.qualified_name;
    if (c.superclass) jc["superclass"] = *c.superclass;
    if (c.nested_in) jc["nested_in"] = *c.nested_in;
    json fields = json::array();
    for (const auto& f : c.fields) {
      json jf;
      jf["name"] = f.name;
      jf["type"] = f.type;
      jf["static"] = f.is_static;
      if (f.const_string_init) jf["init"] = *f.const_string_init;
      fields.push_back(jf);
    }
    jc["fields"] = fields;
    json methods = json::array();
    for (const auto& m : c.methods) {
      json jm;
      jm["name"] = m.sig.name;
      jm["param_types"] = m.sig.param_types;
      jm["param_names"] = m.param_names;
      jm["params"] = m.params;
      jm["return_type"] = m.sig.return_type;
      jm["public"] = m.is_public;
      jm["decl_line"] = m.decl_line;
      json blocks = json::array();
      for (const auto& b : m.blocks) {
        json jb;
        jb["id"] = b.id;
        jb["succs"] = b.succs;
        json stmts = json::array();
        for (const auto& s : b.stmts) stmts.push_back(stmt_to_json(s));
        jb["statements"] = stmts;
        blocks.push_back(jb);
      }
      jm["blocks"] = blocks;
      methods.push_back(jm);
    }
    jc["methods"] = methods;
    classes.push_back(jc);
  }
  ju["classes"] = classes;
  json lm = json::array();
  for (const auto& [id, loc] : u.line_map)
    lm.push_back({{"id", id}, {"file", loc.file}, {"line", loc.line}});
  ju["line_map"] = lm;
  return ju;
}

inline CompilationUnit unit_from_json(const json& ju) {
  CompilationUnit u;
  try {
    u.path = ju.at("path").get<std::string>();
    for (const auto& jc : ju.at("classes")) {
      ClassDecl c;
      c.qualified_name = jc.at("name").get<std::string>();
      if (jc.contains("superclass")) c.superclass = jc["superclass"].get<std::string>();
      if (jc.contains("nested_in")) c.nested_in = jc["nested_in"].get<std::string>();
      for (const auto& jf : jc.value("fields", json::array())) {
        FieldDecl f;
        f.name = jf.at("name").get<std::string>();
        f.type = jf.value("type", "");
        f.is_static = jf.value("static", false);
        if (jf.contains("init")) f.const_string_init = jf["init"].get<std::string>();
        c.fields.push_back(std::move(f));
      }
      for (const auto& jm : jc.value("methods", json::array())) {
        MethodDecl m;
        m.sig.cls = c.qualified_name;
        m.sig.name = jm.at("name").get<std::string>();
        m.sig.param_types = jm.value("param_types", std::vector<std::string>{});
        m.sig.return_type = jm.value("return_type", "void");
        m.param_names = jm.value("param_names", std::vector<std::string>{});
        m.params = jm.value("params", std::vector<int>{});
        m.is_public = jm.value("public", true);
        m.decl_line = jm.value("decl_line", 0);
        for (const auto& jb : jm.at("blocks")) {
          BasicBlock b;
          b.id = jb.at("id").get<int>();
          b.succs = jb.value("succs", std::vector<int>{});
          for (const auto& js : jb.at("statements")) b.stmts.push_back(stmt_from_json(js));
          m.blocks.push_back(std::move(b));
        }
        c.methods.push_back(std::move(m));
      }
      u.classes.push_back(std::move(c));
    }
    for (const auto& e : ju.value("line_map", json::array()))
      u.line_map[e.at("id").get<int>()] = {e.at("file").get<std::string>(),
                                           e.at("line").get<int>()};
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("CIR schema error: ") + e.what());
  }
  return u;
}

}  // namespace cir

inline nlohmann::json emit_cir(const std::vector<CompilationUnit>& units) {
  nlohmann::json j;
  j["units"] = nlohmann::json::array();
  for (const auto& u : units) j["units"].push_back(cir::unit_to_json(u));
  return j;
}

inline void save_ir(const std::vector<CompilationUnit>& units, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << emit_cir(units).dump(2) << "\n";
}

inline std::vector<CompilationUnit> load_ir_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("units"))
    throw SchemaViolation("CIR schema error: missing top-level 'units'");
  std::vector<CompilationUnit> units;
  for (const auto& ju : j["units"]) units.push_back(cir::unit_from_json(ju));
  for (const auto& u : units) validate_unit(u);  // throws SsaViolation
  ProgramIndex check(units);                     // global statement id uniqueness
  return units;
}

inline std::vector<CompilationUnit> load_ir(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaViolation("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(std::string("CIR parse error: ") + e.what());
  }
  return load_ir_from_json(j);
}

}  // namespace conflog

#endif  // CONFLOG_CIR_HPP

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

#ifndef CONFLOG_LOGSYNTH_HPP
#define CONFLOG_LOGSYNTH_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "conflog/levels.hpp"
#include "conflog/parser.hpp"
#include "conflog/taint.hpp"

namespace conflog {

enum class Decision { KeepExisting, Inject, InjectAndFlagRedundant };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::KeepExisting: return "keep_existing";
    case Decision::Inject: return "inject";
    case Decision::InjectAndFlagRedundant: return "inject_and_flag_redundant";
  }
  return "?";
}

enum class Scenario { FallbackPath, ServiceSwitch, ConfigProcessing };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::FallbackPath: return "fallback_path";
    case Scenario::ServiceSwitch: return "service_switch";
    case Scenario::ConfigProcessing: return "config_processing";
  }
  return "?";
}

struct LogDraft {
  SensitiveBlock block;
  Decision decision = Decision::Inject;
  Scenario scenario = Scenario::ConfigProcessing;
  LogLevel level = LogLevel::Info;
  std::string insert_file;
  int insert_line = 0;  // statement inserted before this 1-based line
  std::string message_template;            // `{}` placeholders
  std::vector<std::string> variables;      // expression strings, one per placeholder
  std::string guidance;                    // remediation sentence, may be empty
  std::string rationale;                   // set for inject_and_flag_redundant
};

struct ConstraintUnderivable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ReparseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EndpointUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResponseRejected : std::runtime_error {
  explicit ResponseRejected(const std::string& why)
      : std::runtime_error("generator response rejected: " + why), reason(why) {}
  std::string reason;
};

namespace detail {

// Statement ids inside the branch's dependent region, recomputed from the
// method the same way the block extractor shaped handling_span.
inline std::set<StmtId> handling_region(const ProgramIndex& index, const SensitiveBlock& block) {
  const MethodDecl& m = *index.stmt(block.entry_stmt).method;
  std::set<StmtId> region;
  auto cdeps = control_dependent_blocks(m);
  auto it = cdeps.find(block.entry_stmt);
  if (it != cdeps.end())
    for (BlockId bid : it->second) {
      const BasicBlock* bb = m.block(bid);
      if (bb)
        for (const auto& s : bb->stmts) region.insert(s.id);
    }
  return region;
}

// Values carried along the block's taint paths, including every source def.
inline std::set<ValueId> tainted_values(const ProgramIndex& index, const SensitiveBlock& block) {
  std::set<ValueId> vals;
  auto absorb = [&](StmtId id) {
    const StmtRef* r = index.find_stmt(id);
    if (r)
      for (ValueId d : r->stmt->defs) vals.insert(d);
  };
  for (const auto& p : block.paths) {
    absorb(p.source.stmt);
    for (const auto& h : p.hops) absorb(h.stmt);
  }
  return vals;
}

inline std::string escape_for_literal(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline size_t count_placeholders(const std::string& tpl) {
  size_t n = 0;
  for (size_t i = 0; i + 1 < tpl.size(); ++i)
    if (tpl[i] == '{' && tpl[i + 1] == '}') ++n, ++i;
  return n;
}

struct Constraint {
  std::string text;                       // human-readable predicate description
  std::optional<std::string> expected;    // literal expected value, if derivable
};

// Renders the checked predicate from the branch condition's defining
// statement; equality against a literal or colored constant yields an
// expected value for the guidance sentence.
inline Constraint derive_constraint(const ProgramIndex& index, const SensitiveBlock& block) {
  const StmtRef& br = index.stmt(block.entry_stmt);
  StmtId cond_def = index.def_site(br.method->sig, br.stmt->cond);
  if (cond_def < 0) throw ConstraintUnderivable("condition has no visible definition");
  const Statement& def = *index.stmt(cond_def).stmt;

  auto literal_of = [&](ValueId v) -> std::optional<std::string> {
    StmtId d = index.def_site(br.method->sig, v);
    if (d < 0) return std::nullopt;
    const Statement& s = *index.stmt(d).stmt;
    if (s.kind == StmtKind::ConstString) return "'" + s.value + "'";
    if (s.kind == StmtKind::Assign && s.op == "const") return s.value;
    if (s.kind == StmtKind::FieldRead) {
      // colored constant fields carry their string initializer
      auto dot = s.field.rfind('.');
      if (dot == std::string::npos) return std::nullopt;
      const ClassDecl* c = index.find_class(s.field.substr(0, dot));
      if (!c) return std::nullopt;
      for (const auto& f : c->fields)
        if (f.name == s.field.substr(dot + 1) && f.const_string_init)
          return "'" + *f.const_string_init + "'";
      return std::nullopt;
    }
    return std::nullopt;
  };

  static const std::map<std::string, std::string> ops = {
      {"==", "must equal"},          {"!=", "must differ from"},
      {"<", "must stay below"},      {"<=", "must not exceed"},
      {">", "must stay above"},      {">=", "must be at least"}};
  if (def.kind == StmtKind::Assign && ops.count(def.op) && def.uses.size() == 2) {
    auto lhs = literal_of(def.uses[0]);
    auto rhs = literal_of(def.uses[1]);
    Constraint c;
    c.text = "checked condition: " + br.stmt->text;
    if (rhs && !lhs) {
      c.text = "value " + ops.at(def.op) + " " + *rhs;
      if (def.op == "==") c.expected = *rhs;
    } else if (lhs && !rhs) {
      c.text = "value " + ops.at(def.op) + " " + *lhs;
      if (def.op == "==") c.expected = *lhs;
    }
    return c;
  }
  if (def.kind == StmtKind::Assign || def.kind == StmtKind::Call ||
      def.kind == StmtKind::FieldRead || def.kind == StmtKind::Phi)
    throw ConstraintUnderivable("predicate is not a comparison: " + br.stmt->text);
  throw ConstraintUnderivable("opaque predicate");
}

}  // namespace detail

// keep_existing iff a log inside the spans already names a block parameter
// verbatim or prints a tainted value; inject when no logs exist; otherwise
// inject and flag the uninformative logs.
inline Decision inspect_existing(const std::vector<CompilationUnit>& units,
                                 const SensitiveBlock& block, std::string* rationale = nullptr) {
  if (block.existing_logs.empty()) return Decision::Inject;
  ProgramIndex index(units);
  auto tainted = detail::tainted_values(index, block);
  for (StmtId id : block.existing_logs) {
    const Statement& s = *index.stmt(id).stmt;
    for (const auto& key : block.parameters)
      if (s.text.find(key) != std::string::npos) return Decision::KeepExisting;
    for (ValueId u : s.uses)
      if (tainted.count(u)) return Decision::KeepExisting;
  }
  if (rationale)
    *rationale = "existing logging in the block mentions neither a parameter key "
                 "nor a configuration-derived value";
  return Decision::InjectAndFlagRedundant;
}

// fallback_path: the branch picks between alternative values for one target
// (both arms write it, or a phi joins an arm-defined value). service_switch:
// the handling region exits the method. Otherwise config_processing.
inline Scenario classify_scenario(const std::vector<CompilationUnit>& units,
                                  const SensitiveBlock& block) {
  ProgramIndex index(units);
  const MethodDecl& m = *index.stmt(block.entry_stmt).method;
  auto region = detail::handling_region(index, block);

  std::map<std::string, int> field_writes;
  bool has_return = false;
  std::set<ValueId> region_defs;
  for (StmtId id : region) {
    const Statement& s = *index.stmt(id).stmt;
    if (s.kind == StmtKind::FieldWrite) ++field_writes[s.field];
    if (s.kind == StmtKind::Return) has_return = true;
    for (ValueId d : s.defs) region_defs.insert(d);
  }
  bool fallback = false;
  for (const auto& [field, n] : field_writes)
    if (n >= 2) fallback = true;
  if (!fallback)
    for (const auto& bb : m.blocks)
      for (const auto& s : bb.stmts)
        if (s.kind == StmtKind::Phi)
          for (ValueId u : s.uses)
            if (region_defs.count(u)) fallback = true;

  if (fallback) return Scenario::FallbackPath;
  if (has_return) return Scenario::ServiceSwitch;
  return Scenario::ConfigProcessing;
}

// Builds the three-part draft: severity by scenario, a template naming every
// parameter plus the checked constraint, and the condition expression as the
// runtime variable. Guidance appears when an expected value is derivable.
inline LogDraft synthesize_template(const std::vector<CompilationUnit>& units,
                                    const SensitiveBlock& block, Scenario scenario,
                                    Decision decision) {
  if (decision == Decision::KeepExisting)
    throw std::logic_error("keep_existing drafts are not synthesized");
  ProgramIndex index(units);
  const StmtRef& br = index.stmt(block.entry_stmt);

  LogDraft d;
  d.block = block;
  d.decision = decision;
  d.scenario = scenario;
  d.level = scenario == Scenario::ConfigProcessing ? LogLevel::Info : LogLevel::Warn;
  d.insert_file = block.entry_line.file;

  // insert point: first line of the handling region; for early-exit blocks,
  // immediately before the return
  auto region = detail::handling_region(index, block);
  int first = 0, ret_line = 0;
  for (StmtId id : region) {
    int line = index.loc(id).line;
    if (line <= block.entry_line.line) continue;
    if (first == 0 || line < first) first = line;
    if (index.stmt(id).stmt->kind == StmtKind::Return && (ret_line == 0 || line < ret_line))
      ret_line = line;
  }
  d.insert_line = first > 0 ? first : block.entry_line.line + 1;
  if (scenario == Scenario::ServiceSwitch && ret_line > 0) d.insert_line = ret_line;

  std::string keys;
  for (const auto& k : block.parameters) keys += (keys.empty() ? "'" : ", '") + k + "'";

  std::string constraint;
  std::optional<std::string> expected;
  try {
    auto c = detail::derive_constraint(index, block);
    constraint = c.text;
    expected = c.expected;
  } catch (const ConstraintUnderivable&) {
    constraint = "checked condition: " + br.stmt->text;
  }

  static const std::map<Scenario, std::string> phrase = {
      {Scenario::FallbackPath, "falling back to an alternative value"},
      {Scenario::ServiceSwitch, "switching the dependent service path"},
      {Scenario::ConfigProcessing, "processing the configured value"}};

  d.message_template = "Configuration parameter " + keys + " " +
                       phrase.at(scenario) + "; " + constraint + "; observed {}";
  d.variables = {br.stmt->text};
  if (expected && !block.parameters.empty()) {
    d.guidance = "Please set '" + *block.parameters.begin() + "' to " + *expected + ".";
    d.message_template += ". " + d.guidance;
  }
  if (decision == Decision::InjectAndFlagRedundant)
    d.rationale = "existing logging lacks configuration detail";
  return d;
}

// The statement text the draft inserts.
inline std::string render_statement(const LogDraft& d) {
  std::string level = to_string(d.level);
  for (auto& c : level) c = char(std::tolower(static_cast<unsigned char>(c)));
  std::string out = "LOG." + level + "(\"" + detail::escape_for_literal(d.message_template) + "\"";
  for (const auto& v : d.variables) out += ", " + v;
  out += ");";
  return out;
}

// The run-time line such a statement would emit, placeholders filled with
// the variable expressions.
inline std::string render_log_line(const LogDraft& d) {
  std::string msg = d.message_template;
  size_t vi = 0, pos = 0;
  while ((pos = msg.find("{}", pos)) != std::string::npos && vi < d.variables.size()) {
    msg.replace(pos, 2, "<" + d.variables[vi] + ">");
    pos += d.variables[vi].size() + 2;
    ++vi;
  }
  return std::string(to_string(d.level)) + " " + msg;
}

// Inserts exactly one statement before insert_line, indentation copied from
// the displaced line. The result must re-parse; otherwise the original is
// left untouched and ReparseFailure is raised.
inline std::string rewrite_source(const std::string& original, const LogDraft& draft) {
  if (draft.decision == Decision::KeepExisting) return original;
  std::vector<std::string> lines;
  std::istringstream in(original);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  int at = draft.insert_line;  // 1-based
  if (at < 1 || at > int(lines.size()) + 1)
    throw ReparseFailure("insert line " + std::to_string(at) + " outside the file");

  std::string indent;
  if (at <= int(lines.size())) {
    const std::string& ref = lines[at - 1];
    indent = ref.substr(0, ref.find_first_not_of(" \t"));
  }
  lines.insert(lines.begin() + (at - 1), indent + render_statement(draft));

  std::string out;
  for (const auto& l : lines) out += l + "\n";
  try {
    parse_sources({{draft.insert_file, out}});
  } catch (const SyntaxError& e) {
    throw ReparseFailure(std::string("enhanced source no longer parses: ") + e.what());
  }
  return out;
}

struct GeneratorRequest {
  std::string code_whole;
  std::string code_specified;  // sub-span of code_whole
  std::vector<std::string> params;
  std::vector<std::string> existing_logs;
};

struct GeneratorResponse {
  std::string enhanced_code;
  int inserted_line = 0;
  LogLevel level = LogLevel::Info;
  std::string message_template;
  std::vector<std::string> variables;
};

inline nlohmann::json to_json(const GeneratorRequest& r) {
  return {{"code_whole", r.code_whole},
          {"code_specified", r.code_specified},
          {"params", r.params},
          {"existing_logs", r.existing_logs}};
}

inline GeneratorResponse response_from_json(const nlohmann::json& j) {
  GeneratorResponse r;
  r.enhanced_code = j.at("enhanced_code").get<std::string>();
  r.inserted_line = j.at("inserted_line").get<int>();
  r.level = parse_level(j.at("level").get<std::string>());
  r.message_template = j.at("message_template").get<std::string>();
  r.variables = j.at("variables").get<std::vector<std::string>>();
  return r;
}

// Gatekeeping for externally produced drafts: exactly one inserted line, a
// parseable result, and at least one request param mentioned.
inline void validate_response(const GeneratorRequest& req, const GeneratorResponse& resp,
                              const std::string& file) {
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
  };
  auto orig = split(req.code_whole);
  auto enh = split(resp.enhanced_code);
  if (enh.size() != orig.size() + 1) throw ResponseRejected("multi-insert");
  if (resp.inserted_line < 1 || resp.inserted_line > int(enh.size()))
    throw ResponseRejected("inserted_line out of range");
  auto stripped = enh;
  stripped.erase(stripped.begin() + (resp.inserted_line - 1));
  if (stripped != orig) throw ResponseRejected("multi-insert");

  try {
    std::string joined;
    for (const auto& l : enh) joined += l + "\n";
    parse_sources({{file, joined}});
  } catch (const SyntaxError&) {
    throw ResponseRejected("inserted statement does not parse");
  }

  bool informative = false;
  for (const auto& k : req.params) {
    if (resp.message_template.find(k) != std::string::npos) informative = true;
    for (const auto& v : resp.variables)
      if (v.find(k) != std::string::npos) informative = true;
  }
  if (!informative) throw ResponseRejected("not configuration-informative");
  if (detail::count_placeholders(resp.message_template) != resp.variables.size())
    throw ResponseRejected("placeholder/variable arity mismatch");
}

// POSTs the request to `<endpoint>/generate` and validates the response.
// Callers fall back to the template backend on EndpointUnavailable or
// ResponseRejected.
inline GeneratorResponse call_external_generator(const std::string& endpoint,
                                                 const GeneratorRequest& req,
                                                 const std::string& file) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  auto res = client.Post("/generate", to_json(req).dump(), "application/json");
  if (!res) throw EndpointUnavailable("no response from " + endpoint);
  if (res->status != 200)
    throw EndpointUnavailable(endpoint + " returned status " + std::to_string(res->status));
  GeneratorResponse resp;
  try {
    resp = response_from_json(nlohmann::json::parse(res->body));
  } catch (const std::exception& e) {
    throw ResponseRejected(std::string("malformed response document: ") + e.what());
  }
  validate_response(req, resp, file);
  return resp;
}

inline nlohmann::json draft_to_json(const LogDraft& d) {
  return {{"method", d.block.method.str()},
          {"file", d.insert_file},
          {"decision", to_string(d.decision)},
          {"scenario", to_string(d.scenario)},
          {"level", to_string(d.level)},
          {"insert_line", d.insert_line},
          {"message_template", d.message_template},
          {"variables", d.variables},
          {"guidance", d.guidance},
          {"rationale", d.rationale},
          {"parameters", std::vector<std::string>(d.block.parameters.begin(),
                                                  d.block.parameters.end())}};
}

}  // namespace conflog

#endif  // CONFLOG_LOGSYNTH_HPP

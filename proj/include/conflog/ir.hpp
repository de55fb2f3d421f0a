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

#ifndef CONFLOG_IR_HPP
#define CONFLOG_IR_HPP

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace conflog {

using StmtId = int;
using ValueId = int;
using BlockId = int;

struct SourceLoc {
  std::string file;
  int line = 0;  // 1-based
  bool operator==(const SourceLoc&) const = default;
};

enum class StmtKind {
  Assign,       // copy / literal / unary / binary op / parameter entry
  ConstString,  // string literal load
  FieldRead,
  FieldWrite,
  Call,
  Branch,
  Phi,
  Return,
};

inline const char* to_string(StmtKind k) {
  switch (k) {
    case StmtKind::Assign: return "assign";
    case StmtKind::ConstString: return "const-string";
    case StmtKind::FieldRead: return "field-read";
    case StmtKind::FieldWrite: return "field-write";
    case StmtKind::Call: return "call";
    case StmtKind::Branch: return "branch";
    case StmtKind::Phi: return "phi";
    case StmtKind::Return: return "return";
  }
  return "?";
}

inline StmtKind stmt_kind_from_string(const std::string& s) {
  if (s == "assign") return StmtKind::Assign;
  if (s == "const-string") return StmtKind::ConstString;
  if (s == "field-read") return StmtKind::FieldRead;
  if (s == "field-write") return StmtKind::FieldWrite;
  if (s == "call") return StmtKind::Call;
  if (s == "branch") return StmtKind::Branch;
  if (s == "phi") return StmtKind::Phi;
  if (s == "return") return StmtKind::Return;
  throw std::invalid_argument("unknown statement kind: " + s);
}

struct Statement {
  StmtId id = -1;
  StmtKind kind = StmtKind::Assign;
  std::vector<ValueId> uses;
  std::vector<ValueId> defs;

  // Kind-specific payloads. Unused ones stay empty / -1.
  std::string op;       // assign: "copy", "param", "const", "==", "+", "!", ...
  std::string value;    // literal text for const-string / const assigns
  std::string field;    // qualified field name for field-read/field-write
  std::string callee;   // resolved signature, or bare name for external calls
  std::string receiver;
  std::vector<ValueId> args;
  ValueId ret = -1;     // call return value (also present in defs)
  ValueId cond = -1;    // branch condition (also present in uses)
  BlockId then_block = -1;
  BlockId else_block = -1;
  std::string text;     // source expression snippet, for report rendering

  bool is_log_call() const {
    return kind == StmtKind::Call && callee.rfind("LOG.", 0) == 0;
  }
  bool operator==(const Statement&) const = default;
};

struct BasicBlock {
  BlockId id = -1;
  std::vector<Statement> stmts;
  std::vector<BlockId> succs;
  bool operator==(const BasicBlock&) const = default;
};

struct MethodSig {
  std::string cls;
  std::string name;
  std::vector<std::string> param_types;
  std::string return_type;

  std::string str() const {
    std::string s = cls + "." + name + "(";
    for (size_t i = 0; i < param_types.size(); ++i) {
      if (i) s += ",";
      s += param_types[i];
    }
    return s + "):" + return_type;
  }
  bool operator==(const MethodSig&) const = default;
  auto operator<=>(const MethodSig&) const = default;
};

struct MethodDecl {
  MethodSig sig;
  std::vector<std::string> param_names;
  std::vector<ValueId> params;  // entry values, defined by param-entry assigns
  std::vector<BasicBlock> blocks;  // blocks[0] is the entry block
  bool is_public = true;
  int decl_line = 0;
  bool operator==(const MethodDecl&) const = default;

  const BasicBlock* block(BlockId b) const {
    for (const auto& bb : blocks)
      if (bb.id == b) return &bb;
    return nullptr;
  }
};

struct FieldDecl {
  std::string name;
  std::string type;
  std::optional<std::string> const_string_init;
  bool is_static = false;
  bool operator==(const FieldDecl&) const = default;
};

struct ClassDecl {
  std::string qualified_name;
  std::optional<std::string> superclass;
  std::optional<std::string> nested_in;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  bool operator==(const ClassDecl&) const = default;
};

struct CompilationUnit {
  std::string path;
  std::vector<ClassDecl> classes;
  std::map<StmtId, SourceLoc> line_map;
  bool operator==(const CompilationUnit&) const = default;
};

struct SsaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat view over a statement's location in the program, built once and
// shared by the dependence and taint passes.
struct StmtRef {
  const CompilationUnit* unit = nullptr;
  const ClassDecl* cls = nullptr;
  const MethodDecl* method = nullptr;
  const BasicBlock* block = nullptr;
  const Statement* stmt = nullptr;
};

class ProgramIndex {
 public:
  explicit ProgramIndex(const std::vector<CompilationUnit>& units) : units_(&units) {
    for (const auto& u : units)
      for (const auto& c : u.classes) {
        classes_[c.qualified_name] = &c;
        for (const auto& m : c.methods) {
          methods_[m.sig.str()] = {&u, &c, &m, nullptr, nullptr};
          for (const auto& b : m.blocks)
            for (const auto& s : b.stmts) {
              if (stmts_.count(s.id))
                throw SsaViolation("duplicate statement id " + std::to_string(s.id));
              stmts_[s.id] = {&u, &c, &m, &b, &s};
              for (ValueId d : s.defs) value_defs_[{m.sig.str(), d}] = s.id;
            }
        }
      }
  }

  const std::vector<CompilationUnit>& units() const { return *units_; }

  const ClassDecl* find_class(const std::string& qname) const {
    auto it = classes_.find(qname);
    return it == classes_.end() ? nullptr : it->second;
  }
  const StmtRef* find_stmt(StmtId id) const {
    auto it = stmts_.find(id);
    return it == stmts_.end() ? nullptr : &it->second;
  }
  const StmtRef& stmt(StmtId id) const {
    auto* r = find_stmt(id);
    if (!r) throw std::out_of_range("unknown statement id " + std::to_string(id));
    return *r;
  }
  const StmtRef* find_method(const std::string& sig) const {
    auto it = methods_.find(sig);
    return it == methods_.end() ? nullptr : &it->second;
  }
  // Defining statement of an SSA value within a method, or -1.
  StmtId def_site(const MethodSig& sig, ValueId v) const {
    auto it = value_defs_.find({sig.str(), v});
    return it == value_defs_.end() ? -1 : it->second;
  }
  SourceLoc loc(StmtId id) const {
    const auto& r = stmt(id);
    auto it = r.unit->line_map.find(id);
    return it == r.unit->line_map.end() ? SourceLoc{} : it->second;
  }
  std::vector<StmtId> all_stmt_ids() const {
    std::vector<StmtId> out;
    out.reserve(stmts_.size());
    for (const auto& [id, _] : stmts_) out.push_back(id);
    return out;
  }

  // Walks the superclass chain looking for a method by name and arity.
  const MethodDecl* resolve_method(const std::string& cls, const std::string& name,
                                   size_t arity) const {
    const ClassDecl* c = find_class(cls);
    std::set<std::string> seen;
    while (c && seen.insert(c->qualified_name).second) {
      for (const auto& m : c->methods)
        if (m.sig.name == name && m.sig.param_types.size() == arity) return &m;
      c = c->superclass ? find_class(*c->superclass) : nullptr;
    }
    return nullptr;
  }
  const FieldDecl* resolve_field(const std::string& cls, const std::string& name) const {
    const ClassDecl* c = find_class(cls);
    std::set<std::string> seen;
    while (c && seen.insert(c->qualified_name).second) {
      for (const auto& f : c->fields)
        if (f.name == name) return &f;
      c = c->superclass ? find_class(*c->superclass) : nullptr;
    }
    return nullptr;
  }

 private:
  const std::vector<CompilationUnit>* units_;
  std::map<std::string, const ClassDecl*> classes_;
  std::map<std::string, StmtRef> methods_;
  std::map<StmtId, StmtRef> stmts_;
  std::map<std::pair<std::string, ValueId>, StmtId> value_defs_;
};

// Dominator sets per block, iterative dataflow over a small CFG.
inline std::map<BlockId, std::set<BlockId>> dominators(const MethodDecl& m) {
  if (m.blocks.empty()) return {};
  std::set<BlockId> all;
  std::map<BlockId, std::vector<BlockId>> preds;
  for (const auto& b : m.blocks) {
    all.insert(b.id);
    for (BlockId s : b.succs) preds[s].push_back(b.id);
  }
  BlockId entry = m.blocks.front().id;
  std::map<BlockId, std::set<BlockId>> dom;
  for (BlockId b : all) dom[b] = (b == entry) ? std::set<BlockId>{entry} : all;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : m.blocks) {
      if (b.id == entry) continue;
      std::set<BlockId> nd = all;
      if (preds[b.id].empty()) {
        nd = {b.id};  // unreachable block dominates only itself
      } else {
        for (BlockId p : preds[b.id]) {
          std::set<BlockId> tmp;
          std::set_intersection(nd.begin(), nd.end(), dom[p].begin(), dom[p].end(),
                                std::inserter(tmp, tmp.begin()));
          nd = std::move(tmp);
        }
        nd.insert(b.id);
      }
      if (nd != dom[b.id]) {
        dom[b.id] = std::move(nd);
        changed = true;
      }
    }
  }
  return dom;
}

// Checks the SSA property for one method: every value defined exactly once,
// every use's def dominates the use (phi uses are checked against the
// corresponding predecessor block instead).
inline void validate_ssa(const MethodDecl& m) {
  std::map<ValueId, std::pair<BlockId, size_t>> defpos;
  for (const auto& b : m.blocks)
    for (size_t i = 0; i < b.stmts.size(); ++i)
      for (ValueId d : b.stmts[i].defs) {
        if (!defpos.emplace(d, std::make_pair(b.id, i)).second)
          throw SsaViolation(m.sig.str() + ": value v" + std::to_string(d) +
                             " defined more than once");
      }
  auto dom = dominators(m);
  auto dominates = [&](BlockId a, BlockId b) { return dom.at(b).count(a) > 0; };
  for (const auto& b : m.blocks)
    for (size_t i = 0; i < b.stmts.size(); ++i)
      for (ValueId u : b.stmts[i].uses) {
        auto it = defpos.find(u);
        if (it == defpos.end())
          throw SsaViolation(m.sig.str() + ": value v" + std::to_string(u) +
                             " used but never defined");
        auto [db, di] = it->second;
        if (b.stmts[i].kind == StmtKind::Phi) continue;  // checked per-edge by construction
        bool ok = (db == b.id) ? di < i : dominates(db, b.id);
        if (!ok)
          throw SsaViolation(m.sig.str() + ": value v" + std::to_string(u) +
                             " used before its definition dominates the use");
      }
  // CFG connectivity from entry.
  if (m.blocks.empty()) return;
  std::set<BlockId> seen{m.blocks.front().id};
  std::vector<BlockId> work{m.blocks.front().id};
  while (!work.empty()) {
    BlockId b = work.back();
    work.pop_back();
    const BasicBlock* bb = m.block(b);
    if (!bb) throw SsaViolation(m.sig.str() + ": edge to missing block");
    for (BlockId s : bb->succs)
      if (seen.insert(s).second) work.push_back(s);
  }
  if (seen.size() != m.blocks.size())
    throw SsaViolation(m.sig.str() + ": CFG has blocks unreachable from entry");
}

inline void validate_unit(const CompilationUnit& u) {
  std::set<StmtId> ids;
  for (const auto& c : u.classes)
    for (const auto& m : c.methods) {
      validate_ssa(m);
      for (const auto& b : m.blocks)
        for (const auto& s : b.stmts) {
          if (!ids.insert(s.id).second)
            throw SsaViolation("duplicate statement id " + std::to_string(s.id));
          if (!u.line_map.count(s.id))
            throw SsaViolation("statement " + std::to_string(s.id) + " missing from line_map");
        }
    }
  for (const auto& [id, loc] : u.line_map)
    if (!ids.count(id))
      throw SsaViolation("line_map entry for unknown statement " + std::to_string(id));
}

}  // namespace conflog

#endif  // CONFLOG_IR_HPP

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

#ifndef CONFLOG_TAINT_HPP
#define CONFLOG_TAINT_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "conflog/catalog.hpp"
#include "conflog/engines.hpp"
#include "conflog/ir.hpp"
#include "conflog/pdg.hpp"

namespace conflog {

struct SourceStatement {
  StmtId stmt = -1;  // a call statement
  std::string engine_class;
  EngineKind engine_kind = EngineKind::BothHolder;
  std::string getter_sig;
  GetterStyle getter_style = GetterStyle::GenericByKey;
  std::vector<std::string> bound_keys;
  bool valid = false;
  std::string reason;  // "ok", "key_holder_excluded", "unconstrained_key"
  bool operator==(const SourceStatement&) const = default;
};

struct TaintHop {
  StmtId stmt = -1;
  EdgeKind edge = EdgeKind::Data;
  bool operator==(const TaintHop&) const = default;
};

struct TaintPath {
  SourceStatement source;
  std::vector<TaintHop> hops;  // first hop leaves the source statement
  StmtId sink = -1;            // a branch statement
  bool operator==(const TaintPath&) const = default;
};

struct LineSpan {
  int begin = 0;  // inclusive, 1-based
  int end = 0;    // inclusive
  bool contains(int line) const { return line >= begin && line <= end; }
  bool operator==(const LineSpan&) const = default;
};

struct SensitiveBlock {
  MethodSig method;
  StmtId entry_stmt = -1;  // the checking branch
  SourceLoc entry_line;
  LineSpan checking_span;
  LineSpan handling_span;
  std::set<std::string> parameters;
  std::vector<TaintPath> paths;
  std::vector<StmtId> existing_logs;
};

namespace detail {

// Backward walk from an SSA value to the string constants that reach it:
// colored constant field reads and literal catalog keys. Follows copies,
// phis, call-return edges into callees and call-arg edges back into callers.
struct KeyProvenance {
  std::set<std::string> colored_keys;  // via a colored constant field
  std::set<std::string> literal_keys;  // via a raw string literal
};

inline KeyProvenance trace_key_argument(const ProgramIndex& index, const Pdg& pdg,
                                        const MethodSig& sig, ValueId value,
                                        const ParameterCatalog& catalog,
                                        const std::map<std::string, std::string>& colored_fields) {
  KeyProvenance out;
  // reverse edge lookups for param-entry and call-return chasing
  std::map<StmtId, std::vector<StmtId>> rev_call_arg;
  for (const auto& e : pdg.edges())
    if (e.kind == EdgeKind::CallArg) rev_call_arg[e.to].push_back(e.from);

  std::set<StmtId> seen;
  std::deque<StmtId> work;
  StmtId d0 = index.def_site(sig, value);
  if (d0 >= 0) work.push_back(d0);
  int budget = 200;
  while (!work.empty() && budget-- > 0) {
    StmtId id = work.front();
    work.pop_front();
    if (!seen.insert(id).second) continue;
    const StmtRef& r = index.stmt(id);
    const Statement& s = *r.stmt;
    switch (s.kind) {
      case StmtKind::ConstString:
        if (catalog.contains(s.value)) out.literal_keys.insert(s.value);
        break;
      case StmtKind::FieldRead: {
        auto it = colored_fields.find(s.field);
        if (it != colored_fields.end()) out.colored_keys.insert(it->second);
        break;
      }
      case StmtKind::Assign:
        if (s.op == "param") {
          for (StmtId from : rev_call_arg[id]) work.push_back(from);
        } else {
          for (ValueId u : s.uses) {
            StmtId d = index.def_site(r.method->sig, u);
            if (d >= 0) work.push_back(d);
          }
        }
        break;
      case StmtKind::Phi:
        for (ValueId u : s.uses) {
          StmtId d = index.def_site(r.method->sig, u);
          if (d >= 0) work.push_back(d);
        }
        break;
      case StmtKind::Call: {
        // follow into the callee's returns when resolved
        const StmtRef* callee = index.find_method(s.callee);
        if (callee)
          for (const auto& b : callee->method->blocks)
            for (const auto& cs : b.stmts)
              if (cs.kind == StmtKind::Return && !cs.uses.empty())
                work.push_back(cs.id);
        break;
      }
      case StmtKind::Return:
        for (ValueId u : s.uses) {
          StmtId d = index.def_site(r.method->sig, u);
          if (d >= 0) work.push_back(d);
        }
        break;
      default:
        break;
    }
  }
  return out;
}

inline std::map<std::string, std::string> colored_field_map(const EngineSet& engines) {
  std::map<std::string, std::string> out;
  for (const auto& e : engines.engines)
    for (const auto& [field, key] : e.colored_constants)
      out[e.class_name + "." + field] = key;
  return out;
}

// Colored constants declared by key_holder / both_holder engines only, for
// the dict-holder key-argument constraint.
inline std::map<std::string, std::string> constrained_field_map(const EngineSet& engines) {
  std::map<std::string, std::string> out;
  for (const auto& e : engines.engines) {
    if (e.kind == EngineKind::DictHolder) continue;
    for (const auto& [field, key] : e.colored_constants)
      out[e.class_name + "." + field] = key;
  }
  return out;
}

}  // namespace detail

// Every call statement targeting an engine accessor, with type-specific
// validation: key-holder accessors are excluded; both-holder getters need no
// key-type constraint; dict-holder getters require every key argument to
// trace to a colored constant of a key-holder or both-holder engine.
inline std::vector<SourceStatement> find_sources(const std::vector<CompilationUnit>& units,
                                                 const Pdg& pdg, const EngineSet& engines,
                                                 const ParameterCatalog& catalog) {
  ProgramIndex index(units);
  auto colored = detail::colored_field_map(engines);
  auto constrained = detail::constrained_field_map(engines);
  std::vector<SourceStatement> out;

  for (const auto& u : units)
    for (const auto& c : u.classes)
      for (const auto& m : c.methods)
        for (const auto& b : m.blocks)
          for (const auto& s : b.stmts) {
            if (s.kind != StmtKind::Call || s.is_log_call()) continue;
            auto [engine, getter] = engines.getter_by_callee(s.callee);
            if (!engine) {
              // calls to any accessor of a key-holder engine are candidates
              // so the exclusion shows up in reports
              const StmtRef* callee = index.find_method(s.callee);
              if (!callee) continue;
              const ConfigEngine* e = engines.find(callee->cls->qualified_name);
              if (!e || e->kind != EngineKind::KeyHolder) continue;
              if (callee->method->sig.return_type == "void") continue;
              SourceStatement src;
              src.stmt = s.id;
              src.engine_class = e->class_name;
              src.engine_kind = e->kind;
              src.getter_sig = s.callee;
              src.valid = false;
              src.reason = "key_holder_excluded";
              out.push_back(std::move(src));
              continue;
            }
            SourceStatement src;
            src.stmt = s.id;
            src.engine_class = engine->class_name;
            src.engine_kind = engine->kind;
            src.getter_sig = getter->sig.str();
            src.getter_style = getter->style;

            if (engine->kind == EngineKind::KeyHolder) {
              src.valid = false;
              src.reason = "key_holder_excluded";
              out.push_back(std::move(src));
              continue;
            }

            if (getter->style == GetterStyle::BuiltInSpecific) {
              src.bound_keys = getter->known_keys;
              src.valid = true;
              src.reason = "ok";
              out.push_back(std::move(src));
              continue;
            }

            // generic_by_key: resolve keys from the string-typed arguments
            std::set<std::string> keys;
            bool all_constrained = true;
            for (size_t i = 0; i < getter->sig.param_types.size() && i < s.args.size(); ++i) {
              if (getter->sig.param_types[i] != "string") continue;
              auto prov = detail::trace_key_argument(index, pdg, m.sig, s.args[i], catalog,
                                                     colored);
              auto strict = detail::trace_key_argument(index, pdg, m.sig, s.args[i], catalog,
                                                       constrained);
              for (const auto& k : prov.colored_keys) keys.insert(k);
              for (const auto& k : prov.literal_keys) keys.insert(k);
              if (strict.colored_keys.empty()) all_constrained = false;
            }
            src.bound_keys.assign(keys.begin(), keys.end());
            if (engine->kind == EngineKind::DictHolder && !all_constrained) {
              src.valid = false;
              src.reason = "unconstrained_key";
            } else {
              src.valid = true;
              src.reason = "ok";
            }
            out.push_back(std::move(src));
          }

  std::sort(out.begin(), out.end(),
            [](const SourceStatement& a, const SourceStatement& b) { return a.stmt < b.stmt; });
  return out;
}

// BFS taint propagation from each valid source over the PDG, bounded by
// max_path_len hops. A sink is a branch whose condition value is reached
// through a data edge; the emitted path is a shortest witness with
// deterministic (smallest statement id) tie-breaking. The Pdg stores only
// ids, so sink detection consults the program for statement kinds.
inline std::vector<TaintPath> track_taints(const std::vector<CompilationUnit>& units,
                                           const Pdg& pdg,
                                           const std::vector<SourceStatement>& sources,
                                           int max_path_len) {
  if (max_path_len < 1) throw std::invalid_argument("max_path_len must be >= 1");
  ProgramIndex index(units);
  std::vector<TaintPath> out;

  for (const auto& src : sources) {
    if (!src.valid || !pdg.has_node(src.stmt)) continue;

    std::map<StmtId, int> dist{{src.stmt, 0}};
    std::map<StmtId, std::pair<StmtId, EdgeKind>> parent;
    std::deque<StmtId> queue{src.stmt};
    while (!queue.empty()) {
      StmtId n = queue.front();
      queue.pop_front();
      int d = dist[n];
      if (d == max_path_len) continue;
      for (const PdgEdge* e : pdg.out_edges(n)) {
        auto it = dist.find(e->to);
        if (it == dist.end()) {
          dist[e->to] = d + 1;
          parent[e->to] = {n, e->kind};
          queue.push_back(e->to);
        } else if (it->second == d + 1) {
          auto pit = parent.find(e->to);
          if (pit != parent.end() && n < pit->second.first) pit->second = {n, e->kind};
        }
      }
    }

    // best (shortest, then smallest-predecessor) data edge into each branch
    std::map<StmtId, std::pair<int, StmtId>> sink_best;  // sink -> (len, pred)
    for (const auto& e : pdg.edges()) {
      if (e.kind != EdgeKind::Data) continue;
      auto it = dist.find(e.from);
      if (it == dist.end() || it->second + 1 > max_path_len) continue;
      const StmtRef* r = index.find_stmt(e.to);
      if (!r || r->stmt->kind != StmtKind::Branch) continue;
      int len = it->second + 1;
      auto cur = sink_best.find(e.to);
      if (cur == sink_best.end() || len < cur->second.first ||
          (len == cur->second.first && e.from < cur->second.second))
        sink_best[e.to] = {len, e.from};
    }

    for (const auto& [sink, best] : sink_best) {
      TaintPath path;
      path.source = src;
      path.sink = sink;
      std::vector<TaintHop> rev{{sink, EdgeKind::Data}};
      StmtId cur = best.second;
      while (cur != src.stmt) {
        auto [p, kind] = parent.at(cur);
        rev.push_back({cur, kind});
        cur = p;
      }
      path.hops.assign(rev.rbegin(), rev.rend());
      out.push_back(std::move(path));
    }
  }

  std::sort(out.begin(), out.end(), [](const TaintPath& a, const TaintPath& b) {
    if (a.sink != b.sink) return a.sink < b.sink;
    return a.source.stmt < b.source.stmt;
  });
  return out;
}

// Groups sinks by enclosing method and extracts one sensitive block per sink
// branch: the checking line plus the handling region (branch arms and the
// statements forward data-dependent on values defined there).
inline std::vector<SensitiveBlock> extract_blocks(const std::vector<CompilationUnit>& units,
                                                  const Pdg& pdg,
                                                  const std::vector<TaintPath>& paths) {
  ProgramIndex index(units);
  std::map<StmtId, SensitiveBlock> by_sink;

  for (const auto& p : paths) {
    const StmtRef& sref = index.stmt(p.sink);
    SensitiveBlock& blk = by_sink[p.sink];
    if (blk.entry_stmt < 0) {
      blk.method = sref.method->sig;
      blk.entry_stmt = p.sink;
      blk.entry_line = index.loc(p.sink);
      blk.checking_span = {blk.entry_line.line, blk.entry_line.line};

      // handling region: statements in blocks control-dependent on the sink
      const MethodDecl& m = *sref.method;
      auto cdeps = control_dependent_blocks(m);
      std::set<StmtId> region;
      auto it = cdeps.find(p.sink);
      if (it != cdeps.end())
        for (BlockId bid : it->second) {
          const BasicBlock* bb = m.block(bid);
          if (bb)
            for (const auto& s : bb->stmts) region.insert(s.id);
        }
      // forward data dependence within the method on values defined inside
      std::set<ValueId> defined;
      for (StmtId id : region)
        for (ValueId d : index.stmt(id).stmt->defs) defined.insert(d);
      bool grew = true;
      while (grew) {
        grew = false;
        for (const auto& bb : m.blocks)
          for (const auto& s : bb.stmts) {
            if (region.count(s.id)) continue;
            for (ValueId u : s.uses)
              if (defined.count(u)) {
                region.insert(s.id);
                for (ValueId d : s.defs) defined.insert(d);
                grew = true;
                break;
              }
          }
      }

      int lo = blk.entry_line.line, hi = blk.entry_line.line;
      for (StmtId id : region) {
        SourceLoc loc = index.loc(id);
        if (loc.line > 0) {
          lo = std::min(lo, loc.line);
          hi = std::max(hi, loc.line);
        }
      }
      // the handling part follows the check; don't extend above the branch
      blk.handling_span = {std::max(lo, blk.entry_line.line), hi};

      // existing logging calls inside the spans, same method
      for (const auto& bb : m.blocks)
        for (const auto& s : bb.stmts)
          if (s.is_log_call()) {
            int line = index.loc(s.id).line;
            if (blk.checking_span.contains(line) || blk.handling_span.contains(line))
              blk.existing_logs.push_back(s.id);
          }
    }
    for (const auto& k : p.source.bound_keys) blk.parameters.insert(k);
    blk.paths.push_back(p);
  }

  std::vector<SensitiveBlock> out;
  for (auto& [sink, blk] : by_sink) out.push_back(std::move(blk));
  std::sort(out.begin(), out.end(), [](const SensitiveBlock& a, const SensitiveBlock& b) {
    if (a.entry_line.file != b.entry_line.file) return a.entry_line.file < b.entry_line.file;
    if (a.entry_line.line != b.entry_line.line) return a.entry_line.line < b.entry_line.line;
    return a.method.str() < b.method.str();
  });
  return out;
}

inline nlohmann::json blocks_to_json(const std::vector<SensitiveBlock>& blocks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : blocks) {
    nlohmann::json j;
    j["method"] = b.method.str();
    j["file"] = b.entry_line.file;
    j["entry_line"] = b.entry_line.line;
    j["checking_span"] = {b.checking_span.begin, b.checking_span.end};
    j["handling_span"] = {b.handling_span.begin, b.handling_span.end};
    j["parameters"] = std::vector<std::string>(b.parameters.begin(), b.parameters.end());
    j["path_len"] = b.paths.empty() ? 0 : int(b.paths.front().hops.size());
    j["existing_logs"] = b.existing_logs;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace conflog

#endif  // CONFLOG_TAINT_HPP

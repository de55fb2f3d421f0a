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

#ifndef CONFLOG_PDG_HPP
#define CONFLOG_PDG_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "conflog/ir.hpp"

namespace conflog {

enum class EdgeKind { Data, Control, CallArg, CallReturn };

inline const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Data: return "data";
    case EdgeKind::Control: return "control";
    case EdgeKind::CallArg: return "call-arg";
    case EdgeKind::CallReturn: return "call-return";
  }
  return "?";
}

struct PdgEdge {
  StmtId from = -1;
  StmtId to = -1;
  EdgeKind kind = EdgeKind::Data;
  auto operator<=>(const PdgEdge&) const = default;
};

struct UnknownNode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Pdg {
 public:
  Pdg(std::vector<StmtId> nodes, std::vector<PdgEdge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::sort(nodes_.begin(), nodes_.end());
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (size_t i = 0; i < edges_.size(); ++i) out_[edges_[i].from].push_back(i);
  }

  const std::vector<StmtId>& nodes() const { return nodes_; }
  const std::vector<PdgEdge>& edges() const { return edges_; }
  bool has_node(StmtId n) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), n);
  }
  std::vector<const PdgEdge*> out_edges(StmtId n) const {
    std::vector<const PdgEdge*> out;
    auto it = out_.find(n);
    if (it != out_.end())
      for (size_t i : it->second) out.push_back(&edges_[i]);
    return out;
  }

 private:
  std::vector<StmtId> nodes_;
  std::vector<PdgEdge> edges_;
  std::map<StmtId, std::vector<size_t>> out_;
};

namespace detail {

// Post-dominator sets over a method CFG with a virtual exit (-1) joined to
// every block lacking successors (and to every return-terminated block).
inline std::map<BlockId, std::set<BlockId>> post_dominators(const MethodDecl& m) {
  constexpr BlockId kExit = -1;
  std::set<BlockId> all{kExit};
  std::map<BlockId, std::vector<BlockId>> rsuccs;  // reverse CFG successors = CFG preds
  std::map<BlockId, std::vector<BlockId>> succs;
  for (const auto& b : m.blocks) {
    all.insert(b.id);
    succs[b.id] = b.succs;
    if (b.succs.empty()) succs[b.id].push_back(kExit);
  }
  std::map<BlockId, std::set<BlockId>> pdom;
  for (BlockId b : all) pdom[b] = (b == kExit) ? std::set<BlockId>{kExit} : all;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : m.blocks) {
      std::set<BlockId> nd = all;
      for (BlockId s : succs[b.id]) {
        std::set<BlockId> tmp;
        std::set_intersection(nd.begin(), nd.end(), pdom[s].begin(), pdom[s].end(),
                              std::inserter(tmp, tmp.begin()));
        nd = std::move(tmp);
      }
      nd.insert(b.id);
      if (nd != pdom[b.id]) {
        pdom[b.id] = std::move(nd);
        changed = true;
      }
    }
  }
  return pdom;
}

}  // namespace detail

// Blocks control-dependent on each branch statement: for a branch in block b
// with successor s, every block on the post-dominator chain from s up to
// (excluding) b's immediate post-dominator region is dependent. Classic
// Ferrante-Ottenstein-Warren formulation over sets.
inline std::map<StmtId, std::set<BlockId>> control_dependent_blocks(const MethodDecl& m) {
  auto pdom = detail::post_dominators(m);
  std::map<StmtId, std::set<BlockId>> out;
  // A block n is control dependent on branch b iff n does not post-dominate
  // b and n is reachable from some successor of b without passing through a
  // post-dominator of b.
  std::map<BlockId, const BasicBlock*> by_id;
  for (const auto& b : m.blocks) by_id[b.id] = &b;
  for (const auto& b : m.blocks) {
    if (b.stmts.empty() || b.stmts.back().kind != StmtKind::Branch) continue;
    const Statement& br = b.stmts.back();
    // ipdom region = blocks post-dominating b (excluding b)
    std::set<BlockId> stop;
    for (const auto& [blk, pd] : pdom)
      if (blk != b.id && pdom[b.id].count(blk)) stop.insert(blk);
    std::set<BlockId> dep;
    std::vector<BlockId> work(b.succs.begin(), b.succs.end());
    std::set<BlockId> seen;
    while (!work.empty()) {
      BlockId n = work.back();
      work.pop_back();
      if (n < 0 || stop.count(n) || !seen.insert(n).second) continue;
      dep.insert(n);
      for (BlockId s : by_id.at(n)->succs) work.push_back(s);
    }
    out[br.id] = dep;
  }
  return out;
}

inline Pdg build_pdg(const std::vector<CompilationUnit>& units, bool include_control) {
  ProgramIndex index(units);
  std::vector<StmtId> nodes = index.all_stmt_ids();
  std::vector<PdgEdge> edges;

  // field-write sites by qualified field name, program-wide
  std::map<std::string, std::vector<StmtId>> field_writes;
  for (const auto& u : units)
    for (const auto& c : u.classes)
      for (const auto& m : c.methods)
        for (const auto& b : m.blocks)
          for (const auto& s : b.stmts)
            if (s.kind == StmtKind::FieldWrite && !s.field.empty())
              field_writes[s.field].push_back(s.id);

  for (const auto& u : units)
    for (const auto& c : u.classes)
      for (const auto& m : c.methods) {
        // def -> use data edges within the method
        std::map<ValueId, StmtId> defsite;
        for (const auto& b : m.blocks)
          for (const auto& s : b.stmts)
            for (ValueId d : s.defs) defsite[d] = s.id;
        for (const auto& b : m.blocks)
          for (const auto& s : b.stmts)
            for (ValueId uv : s.uses) {
              auto it = defsite.find(uv);
              if (it != defsite.end() && it->second != s.id)
                edges.push_back({it->second, s.id, EdgeKind::Data});
            }

        // field-write -> field-read, name-sensitive
        for (const auto& b : m.blocks)
          for (const auto& s : b.stmts)
            if (s.kind == StmtKind::FieldRead && !s.field.empty()) {
              auto it = field_writes.find(s.field);
              if (it != field_writes.end())
                for (StmtId w : it->second)
                  if (w != s.id) edges.push_back({w, s.id, EdgeKind::Data});
            }

        // control dependence, intra-procedural
        if (include_control) {
          auto cdeps = control_dependent_blocks(m);
          for (const auto& [br, blocks] : cdeps)
            for (BlockId blk : blocks) {
              const BasicBlock* bb = m.block(blk);
              if (!bb) continue;
              for (const auto& s : bb->stmts)
                if (s.id != br) edges.push_back({br, s.id, EdgeKind::Control});
            }
        }

        // inter-procedural call edges
        for (const auto& b : m.blocks)
          for (const auto& s : b.stmts) {
            if (s.kind != StmtKind::Call) continue;
            const StmtRef* callee = index.find_method(s.callee);
            if (!callee) continue;  // external or LOG call: no call edges
            const MethodDecl& cm = *callee->method;
            for (size_t i = 0; i < s.args.size() && i < cm.params.size(); ++i) {
              StmtId arg_def = index.def_site(m.sig, s.args[i]);
              StmtId param_entry = index.def_site(cm.sig, cm.params[i]);
              if (arg_def >= 0 && param_entry >= 0)
                edges.push_back({arg_def, param_entry, EdgeKind::CallArg});
            }
            if (s.ret >= 0)
              for (const auto& cb : cm.blocks)
                for (const auto& cs : cb.stmts)
                  if (cs.kind == StmtKind::Return)
                    edges.push_back({cs.id, s.id, EdgeKind::CallReturn});
          }
      }

  return Pdg(std::move(nodes), std::move(edges));
}

// Nodes reachable from `from` by a directed path of at most `max_hops` edges,
// excluding `from` itself. Visited-set BFS, loop-safe.
inline std::set<StmtId> reachable_within(const Pdg& pdg, StmtId from, int max_hops) {
  if (max_hops < 1) throw std::invalid_argument("max_hops must be >= 1");
  if (!pdg.has_node(from)) throw UnknownNode("unknown node " + std::to_string(from));
  std::set<StmtId> seen{from};
  std::set<StmtId> out;
  std::deque<std::pair<StmtId, int>> queue{{from, 0}};
  while (!queue.empty()) {
    auto [n, d] = queue.front();
    queue.pop_front();
    if (d == max_hops) continue;
    for (const PdgEdge* e : pdg.out_edges(n))
      if (seen.insert(e->to).second) {
        out.insert(e->to);
        queue.emplace_back(e->to, d + 1);
      }
  }
  return out;
}

inline nlohmann::json pdg_to_json(const Pdg& pdg) {
  nlohmann::json j;
  j["nodes"] = pdg.nodes();
  j["edges"] = nlohmann::json::array();
  for (const auto& e : pdg.edges())
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}});
  return j;
}

}  // namespace conflog

#endif  // CONFLOG_PDG_HPP

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
// Front end for the mini class language:
//
//   class DatanodeManager extends Base {
//     Configuration conf;
//     int heartbeatRecheckInterval;
//     public void init(int recheckInterval) {
//       bool avoid = conf.getBoolean(DFSConfigKeys.AVOID_KEY, false);
//       if (avoid) { this.heartbeatRecheckInterval = recheckInterval; }
//       LOG.info("started with {}", avoid);
//     }
//   }
//
// Files carry the ".mini" extension. Lowering produces SSA directly:
// structured if/else only, so phi insertion happens at the join block.

#ifndef CONFLOG_PARSER_HPP
#define CONFLOG_PARSER_HPP

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "conflog/ir.hpp"

namespace conflog {

struct SyntaxError : std::runtime_error {
  SyntaxError(const std::string& file, int line, int col, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(col) +
                           ": " + msg),
        file(file), line(line), col(col) {}
  std::string file;
  int line;
  int col;
};

namespace minilang {

struct Token {
  enum Kind { Ident, Int, Str, Punct, End } kind = End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  Lexer(std::string src, std::string file) : src_(std::move(src)), file_(std::move(file)) {
    advance();
  }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(file_, tok_.line, tok_.col, msg);
  }
  const std::string& file() const { return file_; }

 private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') { ++line_; col_ = 1; ++pos_; continue; }
      if (c == ' ' || c == '\t' || c == '\r') { ++pos_; ++col_; continue; }
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) { tok_.kind = Token::End; tok_.text = "<eof>"; return; }
    char c = src_[pos_];
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t s = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(s, pos_ - s);
      col_ += int(pos_ - s);
      return;
    }
    if (std::isdigit((unsigned char)c)) {
      size_t s = pos_;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) ++pos_;
      tok_.kind = Token::Int;
      tok_.text = src_.substr(s, pos_ - s);
      col_ += int(pos_ - s);
      return;
    }
    if (c == '"') {
      size_t s = ++pos_;
      std::string out;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\n') throw SyntaxError(file_, line_, col_, "unterminated string");
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          ++pos_;
          char e = src_[pos_];
          out += (e == 'n') ? '\n' : (e == 't') ? '\t' : e;
        } else {
          out += src_[pos_];
        }
        ++pos_;
      }
      if (pos_ >= src_.size()) throw SyntaxError(file_, line_, col_, "unterminated string");
      ++pos_;
      tok_.kind = Token::Str;
      tok_.text = out;
      col_ += int(pos_ - s) + 1;
      return;
    }
    // two-char operators first
    static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
    for (const char* op : two)
      if (src_.compare(pos_, 2, op) == 0) {
        tok_.kind = Token::Punct;
        tok_.text = op;
        pos_ += 2;
        col_ += 2;
        return;
      }
    tok_.kind = Token::Punct;
    tok_.text = std::string(1, c);
    ++pos_;
    ++col_;
  }

  std::string src_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// ---- AST -------------------------------------------------------------------

struct Expr {
  enum Kind { IntLit, StrLit, BoolLit, Binop, Unop, Chain } kind = IntLit;
  std::string op;                       // Binop/Unop operator
  std::string literal;                  // literal payload
  std::vector<std::string> segs;        // Chain: identifier segments
  bool this_prefix = false;             // Chain started with `this.`
  bool is_call = false;                 // Chain ends in a call
  std::vector<Expr> args;               // call arguments
  std::vector<Expr> kids;               // Binop/Unop operands
  int line = 0;
  std::string text;                     // source rendering
};

struct Stmt {
  enum Kind { If, Return, LocalAssign, FieldAssign, ExprStmt } kind = ExprStmt;
  Expr expr;                      // condition / rhs / call
  std::string decl_type;          // LocalAssign: optional declared type
  std::string target;             // LocalAssign local name / FieldAssign field name
  bool target_this = false;       // FieldAssign through `this.`
  std::vector<std::string> target_segs;  // FieldAssign full chain (e.g. Class.FIELD)
  std::vector<Stmt> then_body, else_body;
  bool has_else = false;
  int line = 0;
};

struct Field {
  std::string type, name;
  std::optional<std::string> init_string;
  bool is_static = false;
  int line = 0;
};

struct Method {
  std::string return_type, name;
  std::vector<std::pair<std::string, std::string>> params;  // (type, name)
  std::vector<Stmt> body;
  bool is_public = true;
  int line = 0;
};

struct Class {
  std::string name;  // simple name
  std::optional<std::string> extends;
  std::vector<Field> fields;
  std::vector<Method> methods;
  std::vector<Class> nested;
  int line = 0;
};

// ---- Recursive-descent parser ---------------------------------------------

class Parser {
 public:
  explicit Parser(Lexer lex) : lex_(std::move(lex)) {}

  std::vector<Class> parse_unit() {
    std::vector<Class> out;
    while (lex_.peek().kind != Token::End) out.push_back(parse_class());
    return out;
  }

 private:
  Lexer lex_;

  bool at(const std::string& t) const {
    return lex_.peek().kind == Token::Punct ? lex_.peek().text == t
                                            : (lex_.peek().kind == Token::Ident &&
                                               lex_.peek().text == t);
  }
  Token expect(const std::string& t) {
    if (!at(t)) lex_.fail("expected '" + t + "', got '" + lex_.peek().text + "'");
    return lex_.take();
  }
  Token expect_ident() {
    if (lex_.peek().kind != Token::Ident)
      lex_.fail("expected identifier, got '" + lex_.peek().text + "'");
    return lex_.take();
  }

  Class parse_class() {
    Class c;
    c.line = lex_.peek().line;
    expect("class");
    c.name = expect_ident().text;
    if (at("extends")) {
      lex_.take();
      c.extends = parse_qname();
    }
    expect("{");
    while (!at("}")) {
      if (at("class")) {
        c.nested.push_back(parse_class());
        continue;
      }
      parse_member(c);
    }
    expect("}");
    return c;
  }

  std::string parse_qname() {
    std::string q = expect_ident().text;
    while (at(".")) {
      lex_.take();
      q += "." + expect_ident().text;
    }
    return q;
  }

  void parse_member(Class& c) {
    int line = lex_.peek().line;
    bool is_static = false, is_public = true, vis_given = false;
    while (true) {
      if (at("static")) { lex_.take(); is_static = true; }
      else if (at("public")) { lex_.take(); is_public = true; vis_given = true; }
      else if (at("private")) { lex_.take(); is_public = false; vis_given = true; }
      else break;
    }
    std::string type = parse_qname();
    std::string name = expect_ident().text;
    if (at("(")) {
      Method m;
      m.return_type = type;
      m.name = name;
      m.is_public = is_public;
      m.line = line;
      lex_.take();
      while (!at(")")) {
        std::string pt = parse_qname();
        std::string pn = expect_ident().text;
        m.params.emplace_back(pt, pn);
        if (!at(")")) expect(",");
      }
      expect(")");
      expect("{");
      m.body = parse_block();
      c.methods.push_back(std::move(m));
    } else {
      (void)vis_given;
      Field f;
      f.type = type;
      f.name = name;
      f.is_static = is_static;
      f.line = line;
      if (at("=")) {
        lex_.take();
        if (lex_.peek().kind != Token::Str)
          lex_.fail("field initializers must be string literals");
        f.init_string = lex_.take().text;
      }
      expect(";");
      c.fields.push_back(std::move(f));
    }
  }

  std::vector<Stmt> parse_block() {
    std::vector<Stmt> out;
    while (!at("}")) out.push_back(parse_stmt());
    expect("}");
    return out;
  }

  Stmt parse_stmt() {
    Stmt s;
    s.line = lex_.peek().line;
    if (at("if")) {
      s.kind = Stmt::If;
      lex_.take();
      expect("(");
      s.expr = parse_expr();
      expect(")");
      expect("{");
      s.then_body = parse_block();
      if (at("else")) {
        lex_.take();
        s.has_else = true;
        expect("{");
        s.else_body = parse_block();
      }
      return s;
    }
    if (at("return")) {
      s.kind = Stmt::Return;
      lex_.take();
      if (!at(";")) s.expr = parse_expr();
      else s.expr.kind = Expr::Chain;  // empty marker: segs stays empty
      expect(";");
      return s;
    }
    if (at("this")) {
      lex_.take();
      expect(".");
      s.kind = Stmt::FieldAssign;
      s.target_this = true;
      s.target = expect_ident().text;
      expect("=");
      s.expr = parse_expr();
      expect(";");
      return s;
    }
    // Could be: `type name = expr;`, `name = expr;`, `a.b.c = expr;` or an
    // expression statement (a call). Parse a chain first and disambiguate.
    Expr first = parse_expr();
    if (first.kind == Expr::Chain && !first.is_call && at("=")) {
      lex_.take();
      if (first.segs.size() == 1 && !first.this_prefix) {
        s.kind = Stmt::LocalAssign;
        s.target = first.segs[0];
      } else {
        s.kind = Stmt::FieldAssign;
        s.target_this = first.this_prefix;
        s.target_segs = first.segs;
        s.target = first.segs.back();
      }
      s.expr = parse_expr();
      expect(";");
      return s;
    }
    if (first.kind == Expr::Chain && !first.is_call && first.segs.size() == 1 &&
        lex_.peek().kind == Token::Ident) {
      // `type name = expr;` local declaration
      s.kind = Stmt::LocalAssign;
      s.decl_type = first.segs[0];
      s.target = lex_.take().text;
      expect("=");
      s.expr = parse_expr();
      expect(";");
      return s;
    }
    if (!first.is_call) lex_.fail("expected statement");
    s.kind = Stmt::ExprStmt;
    s.expr = std::move(first);
    expect(";");
    return s;
  }

  Expr parse_expr() { return parse_or(); }

  Expr parse_binop_level(Expr (Parser::*next)(), std::initializer_list<const char*> ops) {
    Expr lhs = (this->*next)();
    while (true) {
      bool matched = false;
      for (const char* op : ops)
        if (lex_.peek().kind == Token::Punct && lex_.peek().text == op) {
          Token t = lex_.take();
          Expr rhs = (this->*next)();
          Expr b;
          b.kind = Expr::Binop;
          b.op = t.text;
          b.line = lhs.line;
          b.text = lhs.text + " " + t.text + " " + rhs.text;
          b.kids = {std::move(lhs), std::move(rhs)};
          lhs = std::move(b);
          matched = true;
          break;
        }
      if (!matched) return lhs;
    }
  }

  Expr parse_or() { return parse_binop_level(&Parser::parse_and, {"||"}); }
  Expr parse_and() { return parse_binop_level(&Parser::parse_eq, {"&&"}); }
  Expr parse_eq() { return parse_binop_level(&Parser::parse_rel, {"==", "!="}); }
  Expr parse_rel() { return parse_binop_level(&Parser::parse_add, {"<", ">", "<=", ">="}); }
  Expr parse_add() { return parse_binop_level(&Parser::parse_mul, {"+", "-"}); }
  Expr parse_mul() { return parse_binop_level(&Parser::parse_unary, {"*", "/"}); }

  Expr parse_unary() {
    if (at("!")) {
      Token t = lex_.take();
      Expr e;
      e.kind = Expr::Unop;
      e.op = "!";
      e.line = t.line;
      e.kids.push_back(parse_unary());
      e.text = "!" + e.kids[0].text;
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = lex_.peek();
    Expr e;
    e.line = t.line;
    if (t.kind == Token::Int) {
      e.kind = Expr::IntLit;
      e.literal = lex_.take().text;
      e.text = e.literal;
      return e;
    }
    if (t.kind == Token::Str) {
      e.kind = Expr::StrLit;
      e.literal = lex_.take().text;
      e.text = "\"" + e.literal + "\"";
      return e;
    }
    if (at("true") || at("false")) {
      e.kind = Expr::BoolLit;
      e.literal = lex_.take().text;
      e.text = e.literal;
      return e;
    }
    if (at("(")) {
      lex_.take();
      e = parse_expr();
      expect(")");
      e.text = "(" + e.text + ")";
      return e;
    }
    if (at("this")) {
      lex_.take();
      expect(".");
      e.kind = Expr::Chain;
      e.this_prefix = true;
      e.segs.push_back(expect_ident().text);
      e.text = "this." + e.segs.back();
      return finish_chain(std::move(e));
    }
    if (t.kind == Token::Ident) {
      e.kind = Expr::Chain;
      e.segs.push_back(lex_.take().text);
      e.text = e.segs.back();
      return finish_chain(std::move(e));
    }
    lex_.fail("expected expression, got '" + t.text + "'");
  }

  Expr finish_chain(Expr e) {
    while (at(".")) {
      lex_.take();
      e.segs.push_back(expect_ident().text);
      e.text += "." + e.segs.back();
    }
    if (at("(")) {
      lex_.take();
      e.is_call = true;
      e.text += "(";
      while (!at(")")) {
        if (!e.args.empty()) {
          expect(",");
          e.text += ", ";
        }
        Expr a = parse_expr();
        e.text += a.text;
        e.args.push_back(std::move(a));
      }
      expect(")");
      e.text += ")";
    }
    return e;
  }
};

}  // namespace minilang

// ---- Lowering to SSA IR ----------------------------------------------------

namespace detail {

struct ClassInfo {
  const minilang::Class* ast = nullptr;
  std::string qname;
  std::optional<std::string> nested_in;
};

class Lowerer {
 public:
  Lowerer(StmtId& stmt_counter) : next_stmt_(stmt_counter) {}

  void collect(const std::vector<minilang::Class>& classes, const std::string& nest) {
    for (const auto& c : classes) {
      ClassInfo ci;
      ci.ast = &c;
      ci.qname = nest.empty() ? c.name : nest + "." + c.name;
      if (!nest.empty()) ci.nested_in = nest;
      class_table_[ci.qname] = ci;
      simple_names_[c.name] = ci.qname;
      collect(c.nested, ci.qname);
    }
  }

  CompilationUnit lower_unit(const std::string& path,
                             const std::vector<minilang::Class>& classes) {
    CompilationUnit u;
    u.path = path;
    file_ = path;
    line_map_ = &u.line_map;
    for (const auto& c : classes) lower_class(c, "", u.classes);
    return u;
  }

 private:
  StmtId& next_stmt_;
  std::string file_;
  std::map<StmtId, SourceLoc>* line_map_ = nullptr;
  std::map<std::string, ClassInfo> class_table_;
  std::map<std::string, std::string> simple_names_;

  // per-method lowering state
  struct Local {
    ValueId value;
    std::string type;
  };
  struct MState {
    const ClassInfo* cls = nullptr;
    MethodDecl* method = nullptr;
    std::map<std::string, Local> env;
    ValueId next_value = 0;
    BlockId next_block = 0;
    BasicBlock* cur = nullptr;
    bool terminated = false;
  };

  std::string resolve_class_name(const std::string& name,
                                 const ClassInfo& ctx) const {
    if (class_table_.count(name)) return name;
    // simple name: prefer siblings/nested of the current class scope
    std::string scope = ctx.qname;
    while (!scope.empty()) {
      std::string cand = scope + "." + name;
      if (class_table_.count(cand)) return cand;
      size_t dot = scope.rfind('.');
      scope = dot == std::string::npos ? "" : scope.substr(0, dot);
    }
    auto it = simple_names_.find(name);
    return it == simple_names_.end() ? "" : it->second;
  }

  const minilang::Field* find_field(const std::string& qname, const std::string& fname,
                                    std::string* decl_class) const {
    std::string cur = qname;
    std::set<std::string> seen;
    while (!cur.empty() && seen.insert(cur).second) {
      auto it = class_table_.find(cur);
      if (it == class_table_.end()) break;
      for (const auto& f : it->second.ast->fields)
        if (f.name == fname) {
          if (decl_class) *decl_class = cur;
          return &f;
        }
      cur = it->second.ast->extends
                ? resolve_class_name(*it->second.ast->extends, it->second)
                : "";
    }
    return nullptr;
  }

  const minilang::Method* find_method(const std::string& qname, const std::string& mname,
                                      size_t arity, std::string* decl_class) const {
    std::string cur = qname;
    std::set<std::string> seen;
    while (!cur.empty() && seen.insert(cur).second) {
      auto it = class_table_.find(cur);
      if (it == class_table_.end()) break;
      for (const auto& m : it->second.ast->methods)
        if (m.name == mname && m.params.size() == arity) {
          if (decl_class) *decl_class = cur;
          return &m;
        }
      cur = it->second.ast->extends
                ? resolve_class_name(*it->second.ast->extends, it->second)
                : "";
    }
    return nullptr;
  }

  MethodSig sig_of(const std::string& cls, const minilang::Method& m) const {
    MethodSig s;
    s.cls = cls;
    s.name = m.name;
    for (const auto& [pt, pn] : m.params) s.param_types.push_back(pt);
    s.return_type = m.return_type;
    return s;
  }

  void lower_class(const minilang::Class& c, const std::string& nest,
                   std::vector<ClassDecl>& out) {
    ClassDecl d;
    d.qualified_name = nest.empty() ? c.name : nest + "." + c.name;
    const ClassInfo& ci = class_table_.at(d.qualified_name);
    if (c.extends) {
      std::string super = resolve_class_name(*c.extends, ci);
      d.superclass = super.empty() ? *c.extends : super;
    }
    if (!nest.empty()) d.nested_in = nest;
    for (const auto& f : c.fields)
      d.fields.push_back({f.name, f.type, f.init_string, f.is_static});
    for (const auto& m : c.methods) d.methods.push_back(lower_method(ci, m));
    std::string qname = d.qualified_name;
    out.push_back(std::move(d));
    for (const auto& n : c.nested) lower_class(n, qname, out);
  }

  Statement& emit(MState& st, Statement s, int line) {
    s.id = next_stmt_++;
    (*line_map_)[s.id] = {file_, line};
    st.cur->stmts.push_back(std::move(s));
    return st.cur->stmts.back();
  }

  BasicBlock& new_block(MState& st) {
    st.method->blocks.push_back({st.next_block++, {}, {}});
    return st.method->blocks.back();
  }

  // blocks vector may reallocate; address blocks by id after calls
  BasicBlock& block_ref(MState& st, BlockId id) {
    for (auto& b : st.method->blocks)
      if (b.id == id) return b;
    throw std::logic_error("missing block");
  }

  MethodDecl lower_method(const ClassInfo& ci, const minilang::Method& m) {
    MethodDecl d;
    d.sig = sig_of(ci.qname, m);
    d.is_public = m.is_public;
    d.decl_line = m.line;

    MState st;
    st.cls = &ci;
    st.method = &d;
    BasicBlock& entry = new_block(st);
    st.cur = &entry;
    BlockId entry_id = entry.id;

    for (const auto& [pt, pn] : m.params) {
      ValueId v = st.next_value++;
      d.params.push_back(v);
      d.param_names.push_back(pn);
      Statement s;
      s.kind = StmtKind::Assign;
      s.op = "param";
      s.defs = {v};
      s.text = pn;
      emit(st, std::move(s), m.line);
      st.env[pn] = {v, pt};
    }
    (void)entry_id;
    lower_stmts(st, m.body);
    return d;
  }

  void lower_stmts(MState& st, const std::vector<minilang::Stmt>& body) {
    for (const auto& s : body) {
      if (st.terminated)
        throw SyntaxError(file_, s.line, 1, "unreachable statement after return");
      lower_stmt(st, s);
    }
  }

  struct Value {
    ValueId id = -1;
    std::string type;
  };

  void lower_stmt(MState& st, const minilang::Stmt& s) {
    using SK = minilang::Stmt;
    switch (s.kind) {
      case SK::LocalAssign: {
        Value v = lower_expr(st, s.expr);
        if (s.decl_type.empty() && !st.env.count(s.target)) {
          std::string decl;
          if (find_field(st.cls->qname, s.target, &decl)) {
            // bare `x = expr;` where x is a field: implicit this.x write
            Statement a;
            a.kind = StmtKind::FieldWrite;
            a.uses = {v.id};
            a.field = decl + "." + s.target;
            a.text = s.target + " = " + s.expr.text;
            emit(st, std::move(a), s.line);
            break;
          }
        }
        ValueId nv = st.next_value++;
        Statement a;
        a.kind = StmtKind::Assign;
        a.op = "copy";
        a.uses = {v.id};
        a.defs = {nv};
        a.text = s.target + " = " + s.expr.text;
        emit(st, std::move(a), s.line);
        std::string ty = !s.decl_type.empty() ? s.decl_type
                         : st.env.count(s.target) ? st.env[s.target].type
                                                  : v.type;
        st.env[s.target] = {nv, ty};
        break;
      }
      case SK::FieldAssign: {
        Value v = lower_expr(st, s.expr);
        Statement a;
        a.kind = StmtKind::FieldWrite;
        a.uses = {v.id};
        a.field = resolve_field_target(st, s);
        a.text = (s.target_this ? "this." + s.target : join(s.target_segs)) + " = " +
                 s.expr.text;
        emit(st, std::move(a), s.line);
        break;
      }
      case SK::ExprStmt:
        lower_expr(st, s.expr);
        break;
      case SK::Return: {
        Statement r;
        r.kind = StmtKind::Return;
        r.text = "return";
        if (!s.expr.segs.empty() || s.expr.kind != minilang::Expr::Chain) {
          Value v = lower_expr(st, s.expr);
          r.uses = {v.id};
          r.text += " " + s.expr.text;
        }
        emit(st, std::move(r), s.line);
        st.terminated = true;
        break;
      }
      case SK::If:
        lower_if(st, s);
        break;
    }
  }

  void lower_if(MState& st, const minilang::Stmt& s) {
    Value cond = lower_expr(st, s.expr);
    BlockId branch_block = st.cur->id;
    Statement br;
    br.kind = StmtKind::Branch;
    br.uses = {cond.id};
    br.cond = cond.id;
    br.text = s.expr.text;
    Statement& br_ref = emit(st, std::move(br), s.line);
    StmtId br_id = br_ref.id;

    auto saved_env = st.env;
    BlockId then_id = new_block(st).id;

    st.cur = &block_ref(st, then_id);
    st.terminated = false;
    lower_stmts(st, s.then_body);
    bool then_terminated = st.terminated;
    BlockId then_end = st.cur->id;
    auto then_env = st.env;

    BlockId else_id = -1, else_end = -1;
    bool else_terminated = false;
    auto else_env = saved_env;
    if (s.has_else) {
      else_id = new_block(st).id;
      st.cur = &block_ref(st, else_id);
      st.env = saved_env;
      st.terminated = false;
      lower_stmts(st, s.else_body);
      else_terminated = st.terminated;
      else_end = st.cur->id;
      else_env = st.env;
    }

    if (then_terminated && s.has_else && else_terminated) {
      // no fall-through; both arms return
      block_ref(st, branch_block).succs = {then_id, else_id};
      set_branch_targets(st, branch_block, br_id, then_id, else_id);
      st.terminated = true;
      st.env = saved_env;
      return;
    }

    BlockId join_id = new_block(st).id;
    BlockId false_target = s.has_else ? else_id : join_id;
    block_ref(st, branch_block).succs = {then_id, false_target};
    set_branch_targets(st, branch_block, br_id, then_id, false_target);
    if (!then_terminated) block_ref(st, then_end).succs.push_back(join_id);
    if (s.has_else && !else_terminated) block_ref(st, else_end).succs.push_back(join_id);

    st.cur = &block_ref(st, join_id);
    st.terminated = false;

    // phi insertion only when both paths can reach the join
    if (then_terminated) {
      st.env = else_env;  // saved_env when there is no else arm
      return;
    }
    if (s.has_else && else_terminated) {
      st.env = then_env;
      return;
    }
    std::map<std::string, Local> merged;
    const auto& b_env = else_env;  // saved_env when there is no else arm
    for (const auto& [name, la] : then_env) {
      auto itb = b_env.find(name);
      if (itb == b_env.end()) continue;  // scoped to one arm; drop at join
      if (la.value == itb->second.value) {
        merged[name] = la;
        continue;
      }
      ValueId nv = st.next_value++;
      Statement phi;
      phi.kind = StmtKind::Phi;
      phi.uses = {la.value, itb->second.value};
      phi.defs = {nv};
      phi.text = name;
      emit(st, std::move(phi), s.line);
      merged[name] = {nv, la.type};
    }
    st.env = std::move(merged);
  }

  void set_branch_targets(MState& st, BlockId bb, StmtId br_id, BlockId t, BlockId e) {
    for (auto& s : block_ref(st, bb).stmts)
      if (s.id == br_id) {
        s.then_block = t;
        s.else_block = e;
        return;
      }
  }

  static std::string join(const std::vector<std::string>& segs) {
    std::string s;
    for (size_t i = 0; i < segs.size(); ++i) s += (i ? "." : "") + segs[i];
    return s;
  }

  std::string resolve_field_target(MState& st, const minilang::Stmt& s) {
    if (s.target_this || s.target_segs.size() <= 1) {
      std::string decl;
      if (find_field(st.cls->qname, s.target, &decl)) return decl + "." + s.target;
      return st.cls->qname + "." + s.target;
    }
    // Class.FIELD or obj.field
    std::vector<std::string> prefix(s.target_segs.begin(), s.target_segs.end() - 1);
    std::string owner = resolve_receiver_type(st, prefix);
    if (owner.empty()) return "?." + s.target;
    std::string decl;
    if (find_field(owner, s.target, &decl)) return decl + "." + s.target;
    return owner + "." + s.target;
  }

  // Static type of a receiver chain (locals, fields, class names), or "".
  std::string resolve_receiver_type(MState& st, const std::vector<std::string>& segs) {
    if (segs.empty()) return st.cls->qname;
    std::string cur_type;
    size_t i = 0;
    // longest prefix naming a class wins
    for (size_t take = segs.size(); take >= 1; --take) {
      std::string cand = resolve_class_name(
          join(std::vector<std::string>(segs.begin(), segs.begin() + take)), *st.cls);
      if (!cand.empty()) {
        cur_type = cand;
        i = take;
        break;
      }
    }
    if (i == 0) {
      auto it = st.env.find(segs[0]);
      if (it != st.env.end()) {
        cur_type = resolve_class_name(it->second.type, *st.cls);
      } else {
        std::string decl;
        const auto* f = find_field(st.cls->qname, segs[0], &decl);
        if (f) cur_type = resolve_class_name(f->type, *st.cls);
      }
      i = 1;
    }
    for (; i < segs.size() && !cur_type.empty(); ++i) {
      std::string decl;
      const auto* f = find_field(cur_type, segs[i], &decl);
      cur_type = f ? resolve_class_name(f->type, *st.cls) : "";
    }
    return cur_type;
  }

  Value lower_expr(MState& st, const minilang::Expr& e) {
    using EK = minilang::Expr;
    switch (e.kind) {
      case EK::IntLit: {
        ValueId v = st.next_value++;
        Statement s;
        s.kind = StmtKind::Assign;
        s.op = "const";
        s.value = e.literal;
        s.defs = {v};
        s.text = e.text;
        emit(st, std::move(s), e.line);
        return {v, "int"};
      }
      case EK::BoolLit: {
        ValueId v = st.next_value++;
        Statement s;
        s.kind = StmtKind::Assign;
        s.op = "const";
        s.value = e.literal;
        s.defs = {v};
        s.text = e.text;
        emit(st, std::move(s), e.line);
        return {v, "bool"};
      }
      case EK::StrLit: {
        ValueId v = st.next_value++;
        Statement s;
        s.kind = StmtKind::ConstString;
        s.value = e.literal;
        s.defs = {v};
        s.text = e.text;
        emit(st, std::move(s), e.line);
        return {v, "string"};
      }
      case EK::Unop: {
        Value a = lower_expr(st, e.kids[0]);
        ValueId v = st.next_value++;
        Statement s;
        s.kind = StmtKind::Assign;
        s.op = e.op;
        s.uses = {a.id};
        s.defs = {v};
        s.text = e.text;
        emit(st, std::move(s), e.line);
        return {v, "bool"};
      }
      case EK::Binop: {
        Value a = lower_expr(st, e.kids[0]);
        Value b = lower_expr(st, e.kids[1]);
        ValueId v = st.next_value++;
        Statement s;
        s.kind = StmtKind::Assign;
        s.op = e.op;
        s.uses = {a.id, b.id};
        s.defs = {v};
        s.text = e.text;
        emit(st, std::move(s), e.line);
        static const std::set<std::string> boolish = {"==", "!=", "<",  ">",
                                                      "<=", ">=", "&&", "||"};
        return {v, boolish.count(e.op) ? "bool" : a.type};
      }
      case EK::Chain:
        return e.is_call ? lower_call(st, e) : lower_chain_read(st, e);
    }
    throw std::logic_error("unhandled expression kind");
  }

  Value lower_chain_read(MState& st, const minilang::Expr& e) {
    if (!e.this_prefix && e.segs.size() == 1) {
      auto it = st.env.find(e.segs[0]);
      if (it != st.env.end()) return {it->second.value, it->second.type};
      // implicit this.field
      std::string decl;
      const auto* f = find_field(st.cls->qname, e.segs[0], &decl);
      return emit_field_read(st, e, decl.empty() ? st.cls->qname : decl, e.segs[0],
                             f ? f->type : "");
    }
    if (e.this_prefix && e.segs.size() == 1) {
      std::string decl;
      const auto* f = find_field(st.cls->qname, e.segs[0], &decl);
      return emit_field_read(st, e, decl.empty() ? st.cls->qname : decl, e.segs[0],
                             f ? f->type : "");
    }
    // a.b.c : resolve owner of the last segment
    std::vector<std::string> prefix(e.segs.begin(), e.segs.end() - 1);
    std::string owner = e.this_prefix
                            ? resolve_receiver_type_this(st, prefix)
                            : resolve_receiver_type(st, prefix);
    std::string decl, ftype;
    if (!owner.empty()) {
      const auto* f = find_field(owner, e.segs.back(), &decl);
      if (f) ftype = f->type;
    }
    return emit_field_read(st, e, decl.empty() ? (owner.empty() ? "?" : owner) : decl,
                           e.segs.back(), ftype);
  }

  std::string resolve_receiver_type_this(MState& st, const std::vector<std::string>& segs) {
    // this.f.g...: start from field f of the current class
    std::string decl;
    const auto* f = find_field(st.cls->qname, segs[0], &decl);
    std::string cur = f ? resolve_class_name(f->type, *st.cls) : "";
    for (size_t i = 1; i < segs.size() && !cur.empty(); ++i) {
      const auto* g = find_field(cur, segs[i], &decl);
      cur = g ? resolve_class_name(g->type, *st.cls) : "";
    }
    return cur;
  }

  Value emit_field_read(MState& st, const minilang::Expr& e, const std::string& owner,
                        const std::string& fname, const std::string& ftype) {
    ValueId v = st.next_value++;
    Statement s;
    s.kind = StmtKind::FieldRead;
    s.field = owner + "." + fname;
    s.defs = {v};
    s.text = e.text;
    emit(st, std::move(s), e.line);
    std::string rt = resolve_class_name(ftype, *st.cls);
    return {v, rt.empty() ? ftype : rt};
  }

  Value lower_call(MState& st, const minilang::Expr& e) {
    std::vector<ValueId> argv;
    std::vector<std::string> argt;
    for (const auto& a : e.args) {
      Value v = lower_expr(st, a);
      argv.push_back(v.id);
      argt.push_back(a.text);
    }
    Statement s;
    s.kind = StmtKind::Call;
    s.args = argv;
    s.uses = argv;
    s.text = e.text;

    std::string mname = e.segs.back();
    if (!e.this_prefix && e.segs.size() == 2 && e.segs[0] == "LOG") {
      s.callee = "LOG." + mname;
      s.receiver = "LOG";
      emit(st, std::move(s), e.line);
      return {-1, "void"};
    }

    std::string owner;
    if (e.segs.size() == 1) {
      owner = st.cls->qname;
      s.receiver = "this";
    } else {
      std::vector<std::string> prefix(e.segs.begin(), e.segs.end() - 1);
      owner = e.this_prefix ? resolve_receiver_type_this(st, prefix)
                            : resolve_receiver_type(st, prefix);
      s.receiver = join(prefix);
      if (e.this_prefix) s.receiver = "this." + s.receiver;
    }
    std::string decl, ret_type;
    const minilang::Method* target =
        owner.empty() ? nullptr : find_method(owner, mname, argv.size(), &decl);
    if (target) {
      s.callee = sig_of(decl, *target).str();
      ret_type = target->return_type;
    } else {
      // unresolved: recorded as an external call
      s.callee = (s.receiver.empty() ? "" : s.receiver + ".") + mname + "/" +
                 std::to_string(argv.size());
      ret_type = "";
    }
    Value out{-1, ret_type};
    if (ret_type != "void") {
      ValueId v = st.next_value++;
      s.ret = v;
      s.defs = {v};
      out.id = v;
    }
    emit(st, std::move(s), e.line);
    return out;
  }
};

}  // namespace detail

inline constexpr const char* kMiniExtension = ".mini";

inline std::vector<CompilationUnit> parse_sources(
    const std::vector<std::pair<std::string, std::string>>& files /* (path, text) */) {
  std::vector<std::pair<std::string, std::vector<minilang::Class>>> asts;
  StmtId counter = 0;
  detail::Lowerer low(counter);
  for (const auto& [path, text] : files) {
    minilang::Parser p(minilang::Lexer(text, path));
    asts.emplace_back(path, p.parse_unit());
  }
  for (const auto& [path, classes] : asts) low.collect(classes, "");
  std::vector<CompilationUnit> units;
  for (const auto& [path, classes] : asts) {
    CompilationUnit u = low.lower_unit(path, classes);
    validate_unit(u);
    units.push_back(std::move(u));
  }
  return units;
}

inline std::vector<CompilationUnit> parse_source(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == kMiniExtension)
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    files.emplace_back(p, buf.str());
  }
  return parse_sources(files);
}

}  // namespace conflog

#endif  // CONFLOG_PARSER_HPP

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

#ifndef CONFLOG_CATALOG_HPP
#define CONFLOG_CATALOG_HPP

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace conflog {

enum class ValueType { String, Int, Float, Bool, Duration, Path, EnumOf, Untyped };

inline const char* to_string(ValueType t) {
  switch (t) {
    case ValueType::String: return "string";
    case ValueType::Int: return "int";
    case ValueType::Float: return "float";
    case ValueType::Bool: return "bool";
    case ValueType::Duration: return "duration";
    case ValueType::Path: return "path";
    case ValueType::EnumOf: return "enum-of";
    case ValueType::Untyped: return "untyped";
  }
  return "?";
}

inline ValueType value_type_from_string(const std::string& s) {
  if (s == "string") return ValueType::String;
  if (s == "int") return ValueType::Int;
  if (s == "float") return ValueType::Float;
  if (s == "bool" || s == "boolean") return ValueType::Bool;
  if (s == "duration") return ValueType::Duration;
  if (s == "path") return ValueType::Path;
  if (s.rfind("enum-of", 0) == 0) return ValueType::EnumOf;
  return ValueType::Untyped;
}

struct ConfigParameter {
  std::string key;  // dot-separated, e.g. "dfs.replication"
  ValueType value_type = ValueType::Untyped;
  std::vector<std::string> enum_values;  // for enum-of
  std::optional<std::string> default_value;
  std::optional<std::string> description;
  std::string source_doc;  // file path
  int source_index = 0;    // entry index within the doc
  bool operator==(const ConfigParameter&) const = default;
};

struct MalformedDoc : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DuplicateKey : std::runtime_error {
  DuplicateKey(const std::string& key, int first, int second)
      : std::runtime_error("duplicate parameter key '" + key + "' (entries " +
                           std::to_string(first) + " and " + std::to_string(second) + ")"),
        key(key), first_index(first), second_index(second) {}
  std::string key;
  int first_index;
  int second_index;
};

enum class DocFormat { KvdocXml, KvdocJson, KvdocTsv };

struct KeyMatch {
  std::string key;
  size_t begin = 0;  // byte offsets, [begin,end)
  size_t end = 0;
  bool operator==(const KeyMatch&) const = default;
};

class ParameterCatalog {
 public:
  ParameterCatalog() = default;

  void add(ConfigParameter p) {
    auto it = key_index_.find(p.key);
    if (it != key_index_.end())
      throw DuplicateKey(p.key, parameters_[it->second].source_index, p.source_index);
    key_index_[p.key] = parameters_.size();
    parameters_.push_back(std::move(p));
  }

  const std::vector<ConfigParameter>& parameters() const { return parameters_; }
  size_t size() const { return parameters_.size(); }
  bool contains(const std::string& key) const { return key_index_.count(key) > 0; }
  const ConfigParameter* find(const std::string& key) const {
    auto it = key_index_.find(key);
    return it == key_index_.end() ? nullptr : &parameters_[it->second];
  }
  int skipped_entries() const { return skipped_entries_; }
  void note_skipped() { ++skipped_entries_; }

  bool operator==(const ParameterCatalog& o) const { return parameters_ == o.parameters_; }

 private:
  std::vector<ConfigParameter> parameters_;
  std::map<std::string, size_t> key_index_;
  int skipped_entries_ = 0;
};

namespace detail {

inline std::string xml_unescape(std::string s) {
  static const std::pair<const char*, const char*> ents[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : ents) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, std::strlen(from), to);
      pos += std::strlen(to);
    }
  }
  return s;
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Minimal reader for the fixed <configuration><property>... shape.
// Returns (tag name, inner text) pairs per <property> element.
struct XmlPropertyReader {
  std::string text;
  size_t pos = 0;

  explicit XmlPropertyReader(std::string t) : text(std::move(t)) {}

  std::optional<std::map<std::string, std::string>> next_property() {
    size_t p = text.find("<property>", pos);
    if (p == std::string::npos) return std::nullopt;
    size_t e = text.find("</property>", p);
    if (e == std::string::npos) throw MalformedDoc("unterminated <property> element");
    std::string body = text.substr(p + 10, e - p - 10);
    pos = e + 11;
    std::map<std::string, std::string> fields;
    size_t bp = 0;
    while (true) {
      size_t lt = body.find('<', bp);
      if (lt == std::string::npos) break;
      size_t gt = body.find('>', lt);
      if (gt == std::string::npos) throw MalformedDoc("unterminated tag in <property>");
      std::string tag = body.substr(lt + 1, gt - lt - 1);
      if (tag.empty() || tag[0] == '/') throw MalformedDoc("malformed tag in <property>");
      std::string close = "</" + tag + ">";
      size_t ce = body.find(close, gt);
      if (ce == std::string::npos) throw MalformedDoc("unterminated <" + tag + ">");
      fields[tag] = xml_unescape(trim(body.substr(gt + 1, ce - gt - 1)));
      bp = ce + close.size();
    }
    return fields;
  }
};

inline bool has_whitespace(const std::string& s) {
  return s.find_first_of(" \t\r\n") != std::string::npos;
}

}  // namespace detail

inline ParameterCatalog load_catalog(const std::string& path, DocFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedDoc("cannot open configuration document: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  ParameterCatalog cat;
  int index = 0;
  auto add_entry = [&](std::string key, std::optional<std::string> def,
                       std::optional<std::string> desc, const std::string& type_hint) {
    key = detail::trim(key);
    if (key.empty() || detail::has_whitespace(key)) {
      cat.note_skipped();
      ++index;
      return;
    }
    ConfigParameter p;
    p.key = std::move(key);
    p.value_type = type_hint.empty() ? ValueType::Untyped : value_type_from_string(type_hint);
    if (p.value_type == ValueType::EnumOf) {
      // "enum-of(a,b,c)"
      size_t l = type_hint.find('('), r = type_hint.rfind(')');
      if (l != std::string::npos && r != std::string::npos && r > l) {
        std::stringstream ss(type_hint.substr(l + 1, r - l - 1));
        std::string item;
        while (std::getline(ss, item, ',')) p.enum_values.push_back(detail::trim(item));
      }
    }
    p.default_value = std::move(def);
    p.description = std::move(desc);
    p.source_doc = path;
    p.source_index = index++;
    cat.add(std::move(p));
  };

  switch (format) {
    case DocFormat::KvdocXml: {
      if (text.find("<configuration>") == std::string::npos)
        throw MalformedDoc(path + ": missing <configuration> root");
      detail::XmlPropertyReader reader(text);
      while (auto prop = reader.next_property()) {
        auto get = [&](const char* k) -> std::optional<std::string> {
          auto it = prop->find(k);
          return it == prop->end() ? std::nullopt : std::optional<std::string>(it->second);
        };
        add_entry(get("name").value_or(""), get("value"), get("description"),
                  get("type").value_or(""));
      }
      break;
    }
    case DocFormat::KvdocJson: {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw MalformedDoc(path + ": " + e.what());
      }
      if (!j.is_array()) throw MalformedDoc(path + ": top-level value must be an array");
      for (const auto& e : j) {
        if (!e.is_object()) throw MalformedDoc(path + ": entries must be objects");
        auto get = [&](const char* k) -> std::optional<std::string> {
          return e.contains(k) && e[k].is_string()
                     ? std::optional<std::string>(e[k].get<std::string>())
                     : std::nullopt;
        };
        add_entry(get("name").value_or(""), get("value"), get("description"),
                  get("type").value_or(""));
      }
      break;
    }
    case DocFormat::KvdocTsv: {
      std::stringstream ss(text);
      std::string line;
      while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> cols;
        size_t start = 0;
        while (true) {
          size_t tab = line.find('\t', start);
          cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
          if (tab == std::string::npos) break;
          start = tab + 1;
        }
        add_entry(cols[0],
                  cols.size() > 1 ? std::optional<std::string>(cols[1]) : std::nullopt,
                  cols.size() > 2 ? std::optional<std::string>(cols[2]) : std::nullopt, "");
      }
      break;
    }
  }
  return cat;
}

inline bool is_identifier_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '.' || c == '-';
}

// Finds every standalone occurrence of a catalog key in `text`. Occurrences
// must be bounded by non-identifier characters or string edges; on overlap
// the longest key wins and results never overlap.
inline std::vector<KeyMatch> match_parameters_in_text(const ParameterCatalog& catalog,
                                                      const std::string& text) {
  std::vector<KeyMatch> candidates;
  for (const auto& p : catalog.parameters()) {
    const std::string& k = p.key;
    if (k.empty()) continue;
    size_t pos = 0;
    while ((pos = text.find(k, pos)) != std::string::npos) {
      bool left_ok = pos == 0 || !is_identifier_char(text[pos - 1]);
      size_t end = pos + k.size();
      bool right_ok = end == text.size() || !is_identifier_char(text[end]);
      if (left_ok && right_ok) candidates.push_back({k, pos, end});
      ++pos;
    }
  }
  // Longest-first greedy selection; ties broken by position for determinism.
  std::sort(candidates.begin(), candidates.end(), [](const KeyMatch& a, const KeyMatch& b) {
    size_t la = a.end - a.begin, lb = b.end - b.begin;
    if (la != lb) return la > lb;
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.key < b.key;
  });
  std::vector<KeyMatch> chosen;
  for (const auto& c : candidates) {
    bool overlaps = false;
    for (const auto& ch : chosen)
      if (c.begin < ch.end && ch.begin < c.end) {
        overlaps = true;
        break;
      }
    if (!overlaps) chosen.push_back(c);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const KeyMatch& a, const KeyMatch& b) { return a.begin < b.begin; });
  return chosen;
}

inline nlohmann::json catalog_to_json(const ParameterCatalog& cat) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : cat.parameters()) {
    nlohmann::json e;
    e["name"] = p.key;
    if (p.value_type != ValueType::Untyped) {
      std::string t = to_string(p.value_type);
      if (p.value_type == ValueType::EnumOf) {
        t += "(";
        for (size_t i = 0; i < p.enum_values.size(); ++i)
          t += (i ? "," : "") + p.enum_values[i];
        t += ")";
      }
      e["type"] = t;
    }
    if (p.default_value) e["value"] = *p.default_value;
    if (p.description) e["description"] = *p.description;
    arr.push_back(e);
  }
  return arr;
}

}  // namespace conflog

#endif  // CONFLOG_CATALOG_HPP

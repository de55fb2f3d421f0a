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

#ifndef CONFLOG_METRICS_HPP
#define CONFLOG_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "conflog/catalog.hpp"
#include "conflog/levels.hpp"

namespace conflog {

struct GroundTruthPoint {
  std::string file;
  int line = 1;
  std::string block_id;
  LogLevel level = LogLevel::Info;
  std::set<std::string> variables;
  std::string text;
};

struct PredictedPoint {
  std::string file;
  int line = 1;
  std::string block_id;
  LogLevel level = LogLevel::Info;
  std::set<std::string> variables;
  std::string text;
};

// 1 iff within one line and in the same block of the same file.
inline int position_accuracy(const PredictedPoint& predicted, const GroundTruthPoint& truth) {
  if (predicted.file != truth.file) return 0;
  if (predicted.block_id != truth.block_id) return 0;
  return std::abs(predicted.line - truth.line) <= 1 ? 1 : 0;
}

struct LevelScore {
  int la = 0;
  double aod = 0.0;
};

// Ordinal distance over TRACE<DEBUG<INFO<WARN<ERROR, normalized by the
// largest distance reachable from the truth level.
inline LevelScore level_metrics(LogLevel truth, LogLevel injected) {
  int dist = std::abs(ordinal(truth) - ordinal(injected));
  int max_dist = std::max(ordinal(truth), 4 - ordinal(truth));
  LevelScore s;
  s.la = dist == 0 ? 1 : 0;
  s.aod = 1.0 - double(dist) / double(max_dist);
  return s;
}

struct VariableScore {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

namespace detail {

inline std::string squeeze_ws(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

inline std::set<std::string> normalize_vars(const std::set<std::string>& vars) {
  std::set<std::string> out;
  for (const auto& v : vars) out.insert(squeeze_ws(v));
  return out;
}

}  // namespace detail

// Precision over the injected set, recall over the truth set; each omitted
// when its denominator is empty, f1 omitted when p + r = 0.
inline VariableScore variable_metrics(const std::set<std::string>& var_t,
                                      const std::set<std::string>& var_i) {
  auto t = detail::normalize_vars(var_t);
  auto i = detail::normalize_vars(var_i);
  std::size_t both = 0;
  for (const auto& v : i)
    if (t.count(v)) ++both;
  VariableScore s;
  if (!i.empty()) s.precision = double(both) / double(i.size());
  if (!t.empty()) s.recall = double(both) / double(t.size());
  if (s.precision && s.recall && (*s.precision + *s.recall) > 0.0)
    s.f1 = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
  return s;
}

struct TextScore {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double rouge1 = 0.0;
  double rougeL = 0.0;
};

namespace detail {

inline std::vector<std::string> tokenize_log(std::string s) {
  // placeholder normalization: `{}` becomes a neutral token
  std::string norm;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i] == '{' && s[i + 1] == '}') {
      norm += " <var> ";
      ++i;
    } else {
      norm.push_back(char(std::tolower(static_cast<unsigned char>(s[i]))));
    }
  }
  std::vector<std::string> out;
  std::istringstream in(norm);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks,
                                                            int n) {
  std::map<std::vector<std::string>, int> out;
  for (int i = 0; i + n <= int(toks.size()); ++i)
    ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return out;
}

// Sentence-level BLEU-k with add-one smoothed modified precisions and the
// standard brevity penalty.
inline double bleu(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                   int k) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= k; ++n) {
    auto rc = ngram_counts(ref, n);
    auto hc = ngram_counts(hyp, n);
    int total = 0, match = 0;
    for (const auto& [g, c] : hc) {
      total += c;
      auto it = rc.find(g);
      if (it != rc.end()) match += std::min(c, it->second);
    }
    log_sum += std::log(double(match + 1) / double(total + 1));
  }
  double geo = std::exp(log_sum / k);
  double bp = hyp.size() >= ref.size() ? 1.0 : std::exp(1.0 - double(ref.size()) / hyp.size());
  return bp * geo;
}

inline int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                      : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

inline double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace detail

inline TextScore text_metrics(const std::string& truth_text, const std::string& injected_text) {
  auto t = detail::tokenize_log(truth_text);
  auto i = detail::tokenize_log(injected_text);
  TextScore s;
  if (t.empty() && i.empty()) {
    s.bleu1 = s.bleu4 = s.rouge1 = s.rougeL = 1.0;
    return s;
  }
  if (t.empty() || i.empty()) return s;
  s.bleu1 = detail::bleu(t, i, 1);
  s.bleu4 = detail::bleu(t, i, 4);

  auto tc = detail::ngram_counts(t, 1);
  auto ic = detail::ngram_counts(i, 1);
  int overlap = 0;
  for (const auto& [g, c] : ic) {
    auto it = tc.find(g);
    if (it != tc.end()) overlap += std::min(c, it->second);
  }
  s.rouge1 = detail::f1_of(double(overlap) / i.size(), double(overlap) / t.size());
  int lcs = detail::lcs_length(t, i);
  s.rougeL = detail::f1_of(double(lcs) / i.size(), double(lcs) / t.size());
  return s;
}

struct HitScore {
  double overall = 0.0;  // 0, 0.5 or 1
  int direct = 0;        // 1 success, -1 attempted and failed
};

// Rule-based direct inference: scan run-time log lines for injected keys.
// The indirect phase is a pluggable hook awarding 0.5 when it succeeds.
inline HitScore direct_hit(const std::vector<std::string>& run_log,
                           const ParameterCatalog& catalog,
                           const std::set<std::string>& injected_param_keys,
                           const std::function<bool(const std::vector<std::string>&)>&
                               indirect_stub = nullptr) {
  HitScore h;
  h.direct = -1;
  if (run_log.empty()) return h;
  for (const auto& line : run_log)
    for (const auto& m : match_parameters_in_text(catalog, line))
      if (injected_param_keys.count(m.key)) {
        h.direct = 1;
        h.overall = 1.0;
        return h;
      }
  if (indirect_stub && indirect_stub(run_log)) h.overall = 0.5;
  return h;
}

// Share of valid cases not diagnosable in the other version.
inline double specific_rate(const std::set<std::string>& valid_cases,
                            const std::set<std::string>& other_version_cases) {
  if (valid_cases.empty()) return 0.0;
  std::size_t specific = 0;
  for (const auto& c : valid_cases)
    if (!other_version_cases.count(c)) ++specific;
  return double(specific) / double(valid_cases.size());
}

struct PointReport {
  std::string block_id;
  int pa = 0;
  // remaining metrics only meaningful when pa = 1
  std::optional<LevelScore> level;
  std::optional<VariableScore> vars;
  std::optional<TextScore> text;
};

struct EvalReport {
  std::vector<PointReport> points;
  double coverage = 0.0;
  std::optional<double> avg_la, avg_aod, avg_precision, avg_recall, avg_f1;
  std::optional<double> avg_bleu1, avg_bleu4, avg_rouge1, avg_rougeL;

  std::string coverage_percent() const {
    return std::to_string(int(std::lround(coverage * 100.0))) + "%";
  }
};

// Pairs points by block_id; metrics beyond PA are computed only for matched
// positions, since a wrong position invalidates the comparison.
inline EvalReport evaluate_points(const std::vector<GroundTruthPoint>& truth,
                                  const std::vector<PredictedPoint>& predicted) {
  std::map<std::string, const PredictedPoint*> by_block;
  for (const auto& p : predicted) by_block[p.block_id] = &p;

  EvalReport rep;
  int hits = 0;
  std::vector<double> las, aods, ps, rs, f1s, b1s, b4s, r1s, rLs;
  for (const auto& t : truth) {
    PointReport pr;
    pr.block_id = t.block_id;
    auto it = by_block.find(t.block_id);
    if (it != by_block.end()) pr.pa = position_accuracy(*it->second, t);
    if (pr.pa == 1) {
      const PredictedPoint& p = *it->second;
      ++hits;
      pr.level = level_metrics(t.level, p.level);
      las.push_back(pr.level->la);
      aods.push_back(pr.level->aod);
      pr.vars = variable_metrics(t.variables, p.variables);
      if (pr.vars->precision) ps.push_back(*pr.vars->precision);
      if (pr.vars->recall) rs.push_back(*pr.vars->recall);
      if (pr.vars->f1) f1s.push_back(*pr.vars->f1);
      pr.text = text_metrics(t.text, p.text);
      b1s.push_back(pr.text->bleu1);
      b4s.push_back(pr.text->bleu4);
      r1s.push_back(pr.text->rouge1);
      rLs.push_back(pr.text->rougeL);
    }
    rep.points.push_back(std::move(pr));
  }
  rep.coverage = truth.empty() ? 0.0 : double(hits) / double(truth.size());
  auto mean = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  rep.avg_la = mean(las);
  rep.avg_aod = mean(aods);
  rep.avg_precision = mean(ps);
  rep.avg_recall = mean(rs);
  rep.avg_f1 = mean(f1s);
  rep.avg_bleu1 = mean(b1s);
  rep.avg_bleu4 = mean(b4s);
  rep.avg_rouge1 = mean(r1s);
  rep.avg_rougeL = mean(rLs);
  return rep;
}

inline void from_json_point(const nlohmann::json& j, GroundTruthPoint& p) {
  p.file = j.at("file").get<std::string>();
  p.line = j.at("line").get<int>();
  p.block_id = j.at("block_id").get<std::string>();
  p.level = parse_level(j.at("level").get<std::string>());
  for (const auto& v : j.value("variables", nlohmann::json::array()))
    p.variables.insert(v.get<std::string>());
  p.text = j.value("text", "");
}

inline void from_json_point(const nlohmann::json& j, PredictedPoint& p) {
  GroundTruthPoint t;
  from_json_point(j, t);
  p = {t.file, t.line, t.block_id, t.level, t.variables, t.text};
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["coverage"] = rep.coverage;
  j["coverage_percent"] = rep.coverage_percent();
  auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) j[name] = *v;
  };
  put("avg_la", rep.avg_la);
  put("avg_aod", rep.avg_aod);
  put("avg_precision", rep.avg_precision);
  put("avg_recall", rep.avg_recall);
  put("avg_f1", rep.avg_f1);
  put("avg_bleu1", rep.avg_bleu1);
  put("avg_bleu4", rep.avg_bleu4);
  put("avg_rouge1", rep.avg_rouge1);
  put("avg_rougeL", rep.avg_rougeL);
  j["points"] = nlohmann::json::array();
  for (const auto& p : rep.points) {
    nlohmann::json jp;
    jp["block_id"] = p.block_id;
    jp["pa"] = p.pa;
    if (p.level) {
      jp["la"] = p.level->la;
      jp["aod"] = p.level->aod;
    }
    if (p.vars) {
      if (p.vars->precision) jp["var_precision"] = *p.vars->precision;
      if (p.vars->recall) jp["var_recall"] = *p.vars->recall;
      if (p.vars->f1) jp["var_f1"] = *p.vars->f1;
    }
    if (p.text) {
      jp["bleu1"] = p.text->bleu1;
      jp["bleu4"] = p.text->bleu4;
      jp["rouge1"] = p.text->rouge1;
      jp["rougeL"] = p.text->rougeL;
    }
    j["points"].push_back(jp);
  }
  return j;
}

}  // namespace conflog

#endif  // CONFLOG_METRICS_HPP

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

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "conflog/cir.hpp"
#include "conflog/logsynth.hpp"
#include "conflog/metrics.hpp"
#include "conflog/parser.hpp"

namespace fs = std::filesystem;
using namespace conflog;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string src, ir, out, report, truth, predicted;
  std::vector<std::string> docs;
  std::string extra_engines;
  std::string backend = "template";
  std::string endpoint;
  std::string dump_pdg;
  int max_path_len = 30;
  bool no_control_dep = false;
  bool quiet = false;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class StageTimer {
 public:
  void record(const std::string& stage, double seconds) { timings_[stage] = seconds; }
  template <typename F>
  auto time(const std::string& stage, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    } else {
      auto out = f();
      record(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return out;
    }
  }
  const std::map<std::string, double>& timings() const { return timings_; }

 private:
  std::map<std::string, double> timings_;
};

nlohmann::json manifest(const std::string& command, const Options& opt, const StageTimer& timer) {
  nlohmann::json cfg = {{"command", command},
                        {"src", opt.src},
                        {"ir", opt.ir},
                        {"docs", opt.docs},
                        {"out", opt.out},
                        {"max_path_len", opt.max_path_len},
                        {"include_control", !opt.no_control_dep},
                        {"backend", opt.backend},
                        {"endpoint", opt.endpoint},
                        {"extra_engines", opt.extra_engines}};
  return {{"tool", "conflog"},
          {"version", kVersion},
          {"config", cfg},
          {"timings_seconds", timer.timings()}};
}

void write_report(const Options& opt, const nlohmann::json& j) {
  if (opt.report.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(opt.report);
    if (!out) throw InputError("cannot write report to " + opt.report);
    out << j.dump(2) << "\n";
  }
}

std::vector<CompilationUnit> load_units(const Options& opt, StageTimer& timer) {
  if (opt.src.empty() == opt.ir.empty())
    throw InputError("exactly one of --src or --ir is required");
  return timer.time("frontend", [&] {
    if (!opt.ir.empty()) return load_ir(opt.ir);
    if (!fs::exists(opt.src)) throw InputError("source path does not exist: " + opt.src);
    return parse_source(opt.src);
  });
}

DocFormat doc_format_of(const std::string& path) {
  auto ext = fs::path(path).extension().string();
  if (ext == ".xml") return DocFormat::KvdocXml;
  if (ext == ".json") return DocFormat::KvdocJson;
  if (ext == ".tsv") return DocFormat::KvdocTsv;
  throw InputError("unrecognized docs format (want .xml/.json/.tsv): " + path);
}

ParameterCatalog load_docs(const Options& opt, StageTimer& timer) {
  if (opt.docs.empty()) throw InputError("--docs is required");
  return timer.time("catalog", [&] {
    ParameterCatalog merged;
    for (const auto& path : opt.docs) {
      if (!fs::exists(path)) throw InputError("docs file does not exist: " + path);
      auto cat = load_catalog(path, doc_format_of(path));
      for (const auto& p : cat.parameters()) merged.add(p);
    }
    return merged;
  });
}

std::vector<std::string> extra_engine_list(const Options& opt) {
  std::vector<std::string> out;
  if (opt.extra_engines.empty()) return out;
  std::ifstream in(opt.extra_engines);
  if (!in) throw InputError("cannot read --extra-engines file " + opt.extra_engines);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

EngineSet run_labeling(const std::vector<CompilationUnit>& units, const ParameterCatalog& cat,
                       const Options& opt, StageTimer& timer) {
  auto set = label_engines(units, cat, extra_engine_list(opt));
  timer.record("engine_labeling", set.labeling_seconds);
  return set;
}

struct Analysis {
  EngineSet engines;
  Pdg pdg{{}, {}};
  std::vector<SourceStatement> sources;
  std::vector<TaintPath> paths;
  std::vector<SensitiveBlock> blocks;
};

Analysis run_analysis(const std::vector<CompilationUnit>& units, const ParameterCatalog& cat,
                      const Options& opt, StageTimer& timer) {
  Analysis a;
  a.engines = run_labeling(units, cat, opt, timer);
  a.pdg = timer.time("pdg", [&] { return build_pdg(units, !opt.no_control_dep); });
  timer.time("taint", [&] {
    a.sources = find_sources(units, a.pdg, a.engines, cat);
    a.paths = track_taints(units, a.pdg, a.sources, opt.max_path_len);
    a.blocks = extract_blocks(units, a.pdg, a.paths);
  });
  return a;
}

int cmd_engines(const Options& opt) {
  StageTimer timer;
  auto units = load_units(opt, timer);
  auto cat = load_docs(opt, timer);
  auto set = run_labeling(units, cat, opt, timer);

  if (!opt.quiet) {
    std::map<std::string, std::string> reason;
    for (const auto& [cls, r] : set.expansion_trace) reason.emplace(cls, to_string(r));
    std::cout << "class\tkind\tseeds\treason\n";
    for (const auto& e : set.engines) {
      std::string seeds;
      for (const auto& [f, k] : e.colored_constants) seeds += (seeds.empty() ? "" : ",") + k;
      std::cout << e.class_name << "\t" << to_string(e.kind) << "\t" << seeds << "\t"
                << (reason.count(e.class_name) ? reason.at(e.class_name) : "") << "\n";
    }
    std::cout << "labeled " << set.engines.size() << " engines in " << set.labeling_seconds
              << "s\n";
  }
  nlohmann::json j = engine_set_to_json(set);
  j["manifest"] = manifest("engines", opt, timer);
  write_report(opt, j);
  return 0;
}

int cmd_analyze(const Options& opt) {
  StageTimer timer;
  auto units = load_units(opt, timer);
  auto cat = load_docs(opt, timer);
  auto a = run_analysis(units, cat, opt, timer);

  if (!opt.dump_pdg.empty()) {
    std::ofstream out(opt.dump_pdg);
    if (!out) throw InputError("cannot write pdg dump to " + opt.dump_pdg);
    out << pdg_to_json(a.pdg).dump(2) << "\n";
  }
  if (!opt.quiet) {
    std::cout << "method\tfile\tline\tparameters\n";
    for (const auto& b : a.blocks) {
      std::string params;
      for (const auto& k : b.parameters) params += (params.empty() ? "" : ",") + k;
      std::cout << b.method.str() << "\t" << b.entry_line.file << "\t" << b.entry_line.line
                << "\t" << params << "\n";
    }
    std::cout << a.blocks.size() << " sensitive blocks\n";
  }
  nlohmann::json j;
  j["blocks"] = blocks_to_json(a.blocks);
  j["sources"] = nlohmann::json::array();
  for (const auto& s : a.sources)
    j["sources"].push_back({{"stmt", s.stmt},
                            {"engine", s.engine_class},
                            {"kind", to_string(s.engine_kind)},
                            {"getter", s.getter_sig},
                            {"valid", s.valid},
                            {"reason", s.reason},
                            {"bound_keys", s.bound_keys}});
  j["manifest"] = manifest("analyze", opt, timer);
  write_report(opt, j);
  return 0;
}

int cmd_enhance(const Options& opt) {
  StageTimer timer;
  if (opt.src.empty()) throw InputError("--src is required for enhance");
  if (opt.out.empty()) throw InputError("--out is required for enhance");
  auto units = load_units(opt, timer);
  auto cat = load_docs(opt, timer);
  auto a = run_analysis(units, cat, opt, timer);

  std::string endpoint = opt.endpoint;
  if (endpoint.empty())
    if (const char* env = std::getenv("CONFLOG_ENDPOINT")) endpoint = env;
  if (opt.backend == "external" && endpoint.empty())
    throw InputError("--backend external requires --endpoint or CONFLOG_ENDPOINT");

  std::map<std::string, std::string> texts;  // file path -> current text
  for (const auto& u : units) {
    std::ifstream in(u.path);
    if (!in) throw InputError("cannot re-read source file " + u.path);
    std::ostringstream buf;
    buf << in.rdbuf();
    texts[u.path] = buf.str();
  }

  int injected = 0, kept = 0, flagged = 0, fallbacks = 0;
  nlohmann::json drafts = nlohmann::json::array();
  // apply bottom-up per file so earlier insert lines stay valid
  std::vector<LogDraft> todo;
  timer.time("synthesis", [&] {
    for (const auto& block : a.blocks) {
      std::string rationale;
      Decision decision = inspect_existing(units, block, &rationale);
      if (decision == Decision::KeepExisting) {
        ++kept;
        nlohmann::json jd = {{"method", block.method.str()},
                             {"decision", to_string(decision)},
                             {"file", block.entry_line.file},
                             {"entry_line", block.entry_line.line}};
        drafts.push_back(jd);
        continue;
      }
      if (decision == Decision::InjectAndFlagRedundant) ++flagged;
      Scenario scenario = classify_scenario(units, block);
      LogDraft d = synthesize_template(units, block, scenario, decision);
      if (opt.backend == "external") {
        GeneratorRequest req;
        req.code_whole = texts.at(d.insert_file);
        req.code_specified = "";  // spans rendered below for the report only
        for (const auto& k : block.parameters) req.params.push_back(k);
        try {
          auto resp = call_external_generator(endpoint, req, d.insert_file);
          d.level = resp.level;
          d.message_template = resp.message_template;
          d.variables = resp.variables;
          d.insert_line = resp.inserted_line;
        } catch (const EndpointUnavailable&) {
          ++fallbacks;
        } catch (const ResponseRejected&) {
          ++fallbacks;
        }
      }
      todo.push_back(std::move(d));
    }
    std::stable_sort(todo.begin(), todo.end(), [](const LogDraft& x, const LogDraft& y) {
      if (x.insert_file != y.insert_file) return x.insert_file < y.insert_file;
      return x.insert_line > y.insert_line;
    });
    for (const auto& d : todo) {
      texts[d.insert_file] = rewrite_source(texts.at(d.insert_file), d);
      ++injected;
      drafts.push_back(draft_to_json(d));
    }
  });

  fs::create_directories(opt.out);
  for (const auto& [path, text] : texts) {
    fs::path dest = fs::path(opt.out) / fs::path(path).filename();
    std::ofstream out(dest);
    if (!out) throw InputError("cannot write " + dest.string());
    out << text;
  }

  if (!opt.quiet)
    std::cout << "injected " << injected << ", kept " << kept << ", flagged redundant "
              << flagged << "\n";
  nlohmann::json j = {{"injected", injected},
                      {"kept", kept},
                      {"flagged_redundant", flagged},
                      {"external_fallbacks", fallbacks},
                      {"drafts", drafts}};
  j["manifest"] = manifest("enhance", opt, timer);
  write_report(opt, j);
  return 0;
}

int cmd_evaluate(const Options& opt) {
  StageTimer timer;
  if (opt.truth.empty() || opt.predicted.empty())
    throw InputError("evaluate needs --truth and --predicted");
  auto read_json = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(path + ": " + e.what());
    }
  };
  std::vector<GroundTruthPoint> truth;
  std::vector<PredictedPoint> predicted;
  try {
    for (const auto& j : read_json(opt.truth)) {
      GroundTruthPoint p;
      from_json_point(j, p);
      truth.push_back(std::move(p));
    }
    for (const auto& j : read_json(opt.predicted)) {
      PredictedPoint p;
      from_json_point(j, p);
      predicted.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed evaluation record: ") + e.what());
  }

  auto rep = timer.time("evaluate", [&] { return evaluate_points(truth, predicted); });
  if (!opt.quiet) {
    std::cout << "points\tcoverage\tavg_la\tavg_aod\n";
    std::cout << rep.points.size() << "\t" << rep.coverage_percent() << "\t"
              << (rep.avg_la ? std::to_string(*rep.avg_la) : "-") << "\t"
              << (rep.avg_aod ? std::to_string(*rep.avg_aod) : "-") << "\n";
  }
  nlohmann::json j = report_to_json(rep);
  j["manifest"] = manifest("evaluate", opt, timer);
  write_report(opt, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configuration-aware logging enhancer"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool analysis) {
    sub->add_option("--report", opt.report, "write the structured report to this file");
    sub->add_flag("--quiet", opt.quiet, "suppress the human-readable table");
    if (analysis) {
      sub->add_option("--src", opt.src, "directory of source files");
      sub->add_option("--ir", opt.ir, "serialized IR document");
      sub->add_option("--docs", opt.docs, "parameter documentation files (.xml/.json/.tsv)");
      sub->add_option("--extra-engines", opt.extra_engines,
                      "optional file listing extra engine class names");
    }
  };

  auto* engines = app.add_subcommand("engines", "label configuration engine classes");
  add_common(engines, true);

  auto* analyze = app.add_subcommand("analyze", "find configuration-sensitive blocks");
  add_common(analyze, true);
  analyze->add_option("--max-path-len", opt.max_path_len, "taint hop bound")
      ->check(CLI::PositiveNumber);
  analyze->add_flag("--no-control-dep", opt.no_control_dep, "drop control dependence edges");
  analyze->add_option("--dump-pdg", opt.dump_pdg, "write the dependence graph to this file");

  auto* enhance = app.add_subcommand("enhance", "inject diagnostic logging statements");
  add_common(enhance, true);
  enhance->add_option("--max-path-len", opt.max_path_len, "taint hop bound")
      ->check(CLI::PositiveNumber);
  enhance->add_flag("--no-control-dep", opt.no_control_dep, "drop control dependence edges");
  enhance->add_option("--out", opt.out, "output directory for enhanced sources");
  enhance->add_option("--backend", opt.backend, "template|external")
      ->check(CLI::IsMember({"template", "external"}));
  enhance->add_option("--endpoint", opt.endpoint, "external generator endpoint");

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  add_common(evaluate, false);
  evaluate->add_option("--truth", opt.truth, "ground-truth log points");
  evaluate->add_option("--predicted", opt.predicted, "predicted log points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (engines->parsed()) return cmd_engines(opt);
    if (analyze->parsed()) return cmd_analyze(opt);
    if (enhance->parsed()) return cmd_enhance(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SyntaxError& e) {
    std::cerr << "error: frontend: " << e.what() << "\n";
    return 1;
  } catch (const MalformedDoc& e) {
    std::cerr << "error: catalog: " << e.what() << "\n";
    return 1;
  } catch (const DuplicateKey& e) {
    std::cerr << "error: catalog: " << e.what() << "\n";
    return 1;
  } catch (const SchemaViolation& e) {
    std::cerr << "error: ir: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

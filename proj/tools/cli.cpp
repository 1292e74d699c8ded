// Copyright 2026 The ptf Authors. All Rights Reserved.
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

#include "cli.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptf/bptf.hpp"
#include "ptf/cp.hpp"
#include "ptf/error.hpp"
#include "ptf/eval.hpp"
#include "ptf/events.hpp"
#include "ptf/explore.hpp"
#include "ptf/matrix_io.hpp"
#include "ptf/ntf.hpp"
#include "ptf/synth.hpp"
#include "ptf/tensor_io.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf::cli {
namespace {

namespace fs = std::filesystem;

struct Key {
  const char* name;
  const char* fallback;
  const char* help;
};

const std::vector<Key> kCommonKeys = {
    {"output_dir", ".", "directory for every output file"},
    {"seed", "0", "random seed"},
    {"threads", "1", "worker thread cap"},
};

const std::vector<Key> kIngestKeys = {
    {"events", "", "delimited event file with a header row"},
    {"start", "", "first date kept (YYYY-MM-DD); default: earliest event"},
    {"end", "", "last date kept, inclusive; default: latest event"},
    {"bin", "month", "time step width: day, week or month"},
    {"drop_self_actions", "true", "drop events whose sender is the receiver"},
};

const std::vector<Key> kFitKeys = {
    {"tensor", "", "tensor file"},
    {"labels", "", "labels file recorded beside the fitted factors"},
    {"model", "bptf", "bptf, ntf-kl or ntf-ls"},
    {"rank", "50", "number of components"},
    {"max_iterations", "500", "sweep limit"},
    {"tolerance", "1e-5", "relative objective change that stops the fit"},
    {"alpha", "0.1", "Gamma prior shape"},
    {"learn_beta", "true", "re-estimate the prior rates"},
    {"beta_rule", "inverse-mean", "inverse-mean or inverse-sum"},
    {"epsilon_floor", "1e-12", "lower bound on multiplicative updates"},
};

const std::vector<Key> kEvalKeys = {
    {"tensor", "", "comma-separated tensor files"},
    {"dataset", "", "comma-separated dataset names; default: file stems"},
    {"n_prime", "25", "comma-separated block sizes"},
    {"predict_complement", "both", "false, true or both"},
    {"test_fraction", "0.2", "fraction of time steps held out"},
    {"seeds", "0,1,2", "comma-separated split seeds"},
    {"rank", "50", "number of components"},
    {"models", "ntf-ls,ntf-kl,bptf-geo,bptf-ari", "models to compare"},
    {"max_iterations", "500", "sweep limit"},
    {"tolerance", "1e-5", "relative objective change that stops a fit"},
    {"alpha", "0.1", "Gamma prior shape"},
    {"learn_beta", "true", "re-estimate the prior rates"},
    {"beta_rule", "inverse-mean", "inverse-mean or inverse-sum"},
    {"epsilon_floor", "1e-12", "lower bound on multiplicative updates"},
};

const std::vector<Key> kExploreKeys = {
    {"input", "", "state or factor manifest"},
    {"labels", "", "labels file; default: the one named in the manifest"},
    {"top_n", "10", "labels listed per mode"},
    {"point_estimate", "geo", "geo or ari, for variational states"},
};

const std::vector<Key> kSynthKeys = {
    {"shape", "30,30,5,40", "comma-separated mode sizes"},
    {"rank", "5", "number of components"},
    {"alpha", "0.1", "Gamma prior shape"},
    {"beta", "", "comma-separated prior rates, one per mode; default 1"},
};

std::string Dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

class Settings {
 public:
  Settings(std::string command, std::vector<Key> keys)
      : command_(std::move(command)), keys_(std::move(keys)) {
    for (const Key& k : keys_) values_[k.name] = k.fallback;
  }

  const std::string& command() const { return command_; }
  const std::vector<Key>& keys() const { return keys_; }

  void Merge(const KeyValueDoc& doc, const std::string& origin) {
    for (const auto& [key, value] : doc.entries()) {
      if (!values_.count(key)) {
        throw ConfigError(origin + ": unknown key '" + key + "' for " +
                          command_);
      }
      values_[key] = value;
    }
  }
  void Set(const std::string& key, const std::string& value) {
    values_.at(key) = value;
  }

  const std::string& Str(const std::string& key) const {
    return values_.at(key);
  }
  const std::string& Required(const std::string& key) const {
    const std::string& v = Str(key);
    if (v.empty()) throw ConfigError("missing required setting '" + key + "'");
    return v;
  }
  double Real(const std::string& key) const {
    const std::string& v = Str(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') Bad(key);
    return d;
  }
  std::uint64_t Unsigned(const std::string& key) const {
    const std::string& v = Str(key);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
      Bad(key);
    }
    char* end = nullptr;
    errno = 0;
    const auto n = std::strtoull(v.c_str(), &end, 10);
    if (errno == ERANGE) Bad(key);
    return n;
  }
  bool Flag(const std::string& key) const {
    const std::string& v = Str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    Bad(key);
    return false;
  }
  std::vector<std::string> List(const std::string& key) const {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(Str(key));
    while (std::getline(in, item, ',')) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      if (item.empty()) Bad(key);
      out.push_back(item);
    }
    return out;
  }
  std::vector<std::uint64_t> UnsignedList(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const std::string& s : List(key)) {
      if (s.find_first_not_of("0123456789") != std::string::npos) Bad(key);
      out.push_back(std::strtoull(s.c_str(), nullptr, 10));
    }
    return out;
  }
  std::vector<double> RealList(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& s : List(key)) {
      char* end = nullptr;
      out.push_back(std::strtod(s.c_str(), &end));
      if (*end != '\0') Bad(key);
    }
    return out;
  }

  KeyValueDoc Resolved() const {
    KeyValueDoc doc;
    doc.Set("command", command_);
    for (const Key& k : keys_) doc.Set(k.name, values_.at(k.name));
    return doc;
  }

 private:
  [[noreturn]] void Bad(const std::string& key) const {
    throw ConfigError("invalid value '" + Str(key) + "' for '" + key + "'");
  }

  std::string command_;
  std::vector<Key> keys_;
  std::map<std::string, std::string> values_;
};

fs::path OutputDir(const Settings& s) {
  fs::path dir = s.Str("output_dir");
  fs::create_directories(dir);
  return dir;
}

void EchoConfig(const Settings& s) {
  s.Resolved().WriteFile((OutputDir(s) / (s.command() + ".config")).string());
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Labels path as recorded in a manifest written to `dir`.
std::string RelativeTo(const std::string& path, const fs::path& dir) {
  if (path.empty()) return path;
  return fs::relative(fs::absolute(path), fs::absolute(dir)).generic_string();
}

std::string JoinShape(const Shape& shape) {
  std::string s;
  for (std::size_t m = 0; m < shape.size(); ++m) {
    if (m) s += 'x';
    s += std::to_string(shape[m]);
  }
  return s;
}

void PrintTensorSummary(std::ostream& out, const SparseCountTensor& t) {
  out << "shape " << JoinShape(t.shape()) << "\n";
  out << "entries " << t.nnz() << "\n";
  out << "total " << t.total() << "\n";
  out << "density " << FormatDouble(Density(t)) << "\n";
  out << "vmr "
      << (t.nnz() >= 2 ? FormatDouble(VmrNonzero(t)) : std::string("undefined"))
      << "\n";
}

BetaRule ParseBetaRule(const Settings& s) {
  const std::string& v = s.Str("beta_rule");
  if (v == "inverse-mean") return BetaRule::kInverseMean;
  if (v == "inverse-sum") return BetaRule::kInverseSum;
  throw ConfigError("invalid value '" + v + "' for 'beta_rule'");
}

FitConfig BptfConfigFrom(const Settings& s) {
  FitConfig cfg;
  cfg.rank = s.Unsigned("rank");
  cfg.max_iterations = s.Unsigned("max_iterations");
  cfg.tolerance = s.Real("tolerance");
  cfg.seed = s.Unsigned("seed");
  cfg.learn_beta = s.Flag("learn_beta");
  cfg.beta_rule = ParseBetaRule(s);
  return cfg;
}

NtfConfig NtfConfigFrom(const Settings& s) {
  NtfConfig cfg;
  cfg.rank = s.Unsigned("rank");
  cfg.max_iterations = s.Unsigned("max_iterations");
  cfg.tolerance = s.Real("tolerance");
  cfg.seed = s.Unsigned("seed");
  cfg.epsilon_floor = s.Real("epsilon_floor");
  return cfg;
}

int CmdIngest(const Settings& s, std::ostream& out) {
  const std::vector<EventRecord> records = ReadEventFile(s.Required("events"));
  IngestOptions options;
  const auto width = ParseBinWidth(s.Str("bin"));
  if (!width) throw ConfigError("invalid value '" + s.Str("bin") + "' for 'bin'");
  options.bin_width = *width;
  options.drop_self_actions = s.Flag("drop_self_actions");

  std::optional<std::chrono::sys_days> first, last;
  for (const char* key : {"start", "end"}) {
    if (s.Str(key).empty()) continue;
    const auto day = ParseDate(s.Str(key));
    if (!day) {
      throw ConfigError("invalid value '" + s.Str(key) + "' for '" + key + "'");
    }
    (std::string(key) == "start" ? first : last) = day;
  }
  if (!first || !last) {
    std::optional<std::chrono::sys_days> lo, hi;
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto day = ParseDate(records[r].timestamp);
      if (!day) {
        throw IngestError(r, records[r].source_line,
                          "unparseable timestamp '" + records[r].timestamp +
                              "'");
      }
      if (!lo || *day < *lo) lo = day;
      if (!hi || *day > *hi) hi = day;
    }
    if (!lo) throw EmptyTensorError("the event file holds no records");
    if (!first) first = lo;
    if (!last) last = hi;
  }
  if (*last < *first) throw ConfigError("'end' precedes 'start'");
  options.range = {*first, *last};

  const SparseCountTensor t = IngestEvents(records, options);
  const fs::path dir = OutputDir(s);
  WriteTensorFile((dir / "tensor.txt").string(), t);
  WriteLabelsFile((dir / "labels.tsv").string(), t.labels());
  EchoConfig(s);
  PrintTensorSummary(out, t);
  return kOk;
}

int CmdFit(const Settings& s, std::ostream& out) {
  const std::string model = s.Str("model");
  if (model != "bptf" && model != "ntf-kl" && model != "ntf-ls") {
    throw ConfigError("unknown model '" + model +
                      "' (expected bptf, ntf-kl or ntf-ls)");
  }
  const SparseCountTensor t =
      ReadTensorFile(s.Required("tensor"), s.Str("labels"));
  const fs::path dir = OutputDir(s);
  const std::string labels = RelativeTo(s.Str("labels"), dir);

  if (model == "bptf") {
    const FitConfig cfg = BptfConfigFrom(s);
    const BptfFit fit =
        Fit(t, cfg, Hyperparameters::Default(t.order(), s.Real("alpha")));
    WriteState(dir.string(), "state", fit.state, fit.hyper, labels);
    WriteFactorSet(dir.string(), "factors_geo",
                   PointEstimateOf(fit.state, PointEstimate::kGeometric),
                   labels);
    std::ofstream trace = OpenOut(dir / "trace.tsv");
    WriteTrace(trace, fit.trace);
    const double elbo =
        fit.trace.elbo.empty() ? fit.trace.initial_elbo : fit.trace.elbo.back();
    out << "iterations " << fit.trace.iterations << "\n";
    out << "converged " << (fit.trace.converged ? "true" : "false") << "\n";
    out << "elbo " << FormatDouble(elbo) << "\n";
  } else {
    NtfConfig cfg = NtfConfigFrom(s);
    cfg.cost = model == "ntf-kl" ? NtfCost::kKl : NtfCost::kLs;
    const NtfFit fit = FitNtf(t, cfg);
    WriteFactorSet(dir.string(), "factors", fit.factors, labels);
    std::ofstream trace = OpenOut(dir / "trace.tsv");
    WriteObjectiveTrace(trace, fit.trace);
    const double objective = fit.trace.objective.empty()
                                 ? fit.trace.initial
                                 : fit.trace.objective.back();
    out << "iterations " << fit.trace.iterations << "\n";
    out << "converged " << (fit.trace.converged ? "true" : "false") << "\n";
    out << "objective " << FormatDouble(objective) << "\n";
  }
  EchoConfig(s);
  return kOk;
}

int CmdEval(const Settings& s, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> files = s.List("tensor");
  if (files.empty()) throw ConfigError("missing required setting 'tensor'");
  std::vector<std::string> names = s.List("dataset");
  if (names.empty()) {
    for (const std::string& f : files) names.push_back(fs::path(f).stem().string());
  }
  if (names.size() != files.size()) {
    throw ConfigError("'dataset' must name every tensor file");
  }
  const std::string& complement = s.Str("predict_complement");
  std::vector<bool> flips;
  if (complement == "false" || complement == "both") flips.push_back(false);
  if (complement == "true" || complement == "both") flips.push_back(true);
  if (flips.empty()) {
    throw ConfigError("invalid value '" + complement +
                      "' for 'predict_complement'");
  }

  ExperimentSpec base;
  base.test_fraction = s.Real("test_fraction");
  base.seeds = s.UnsignedList("seeds");
  base.rank = s.Unsigned("rank");
  base.alpha = s.Real("alpha");
  base.threads = s.Unsigned("threads");
  base.models.clear();
  for (const std::string& m : s.List("models")) {
    const auto kind = ParseModelKind(m);
    if (!kind) throw ConfigError("unknown model '" + m + "'");
    base.models.push_back(*kind);
  }
  base.bptf = BptfConfigFrom(s);
  base.ntf = NtfConfigFrom(s);
  const std::vector<std::uint64_t> n_primes = s.UnsignedList("n_prime");
  if (n_primes.empty()) throw ConfigError("missing required setting 'n_prime'");

  std::vector<SparseCountTensor> tensors;
  for (const std::string& f : files) tensors.push_back(ReadTensorFile(f));

  std::vector<EvalReport> reports;
  for (bool flip : flips) {
    for (std::uint64_t n_prime : n_primes) {
      for (std::size_t d = 0; d < files.size(); ++d) {
        ExperimentSpec spec = base;
        spec.dataset = names[d];
        spec.n_prime = n_prime;
        spec.predict_complement = flip;
        reports.push_back(RunExperiment(spec, tensors[d]));
      }
    }
  }

  const fs::path dir = OutputDir(s);
  std::ofstream tsv = OpenOut(dir / "report.tsv");
  WriteReportTsv(tsv, reports);
  std::ofstream table = OpenOut(dir / "report_table.tsv");
  WriteReportTable(table, reports);
  std::ofstream json = OpenOut(dir / "report.json");
  WriteReportJson(json, reports);
  EchoConfig(s);

  WriteReportTable(out, reports);
  bool any_success = false;
  for (const EvalReport& r : reports) {
    for (const ModelResult& m : r.models) {
      if (m.mean) any_success = true;
      for (const std::string& e : m.errors) {
        err << r.scenario << " " << ToString(m.model) << ": " << e << "\n";
      }
    }
  }
  if (!any_success) {
    err << "error: every model failed\n";
    return kNumericalFailure;
  }
  return kOk;
}

int CmdExplore(const Settings& s, std::ostream& out) {
  const std::string& input = s.Required("input");
  const KeyValueDoc manifest = KeyValueDoc::ParseFile(input);
  const std::string& kind = manifest.Require("kind");

  FactorSet f;
  std::string labels_path = s.Str("labels");
  std::string recorded;
  if (kind == "bptf_state") {
    const std::string& pe = s.Str("point_estimate");
    if (pe != "geo" && pe != "ari") {
      throw ConfigError("invalid value '" + pe + "' for 'point_estimate'");
    }
    const LoadedState loaded = ReadState(input);
    f = PointEstimateOf(loaded.state, pe == "geo" ? PointEstimate::kGeometric
                                                  : PointEstimate::kArithmetic);
    recorded = loaded.labels_file;
  } else if (kind == "factors") {
    LoadedFactors loaded = ReadFactorSet(input);
    f = std::move(loaded.factors);
    recorded = loaded.labels_file;
  } else {
    throw DataError(input + ": unsupported manifest kind '" + kind + "'");
  }
  if (labels_path.empty()) labels_path = recorded;
  if (labels_path.empty()) {
    throw ConfigError("a labels file is required (set 'labels')");
  }
  std::ifstream in(labels_path);
  if (!in) throw DataError("cannot open labels file " + labels_path);
  const ModeLabels labels = ReadLabels(in, f.shape());

  const fs::path dir = OutputDir(s);
  const std::size_t time_mode = f.order() - 1;
  const std::vector<std::size_t> ranking = WriteComponentReports(
      dir.string(), f, labels, s.Unsigned("top_n"), time_mode);
  EchoConfig(s);

  out << "rank\tcomponent\tgini\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    std::vector<double> col(f.factor(time_mode).rows());
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = f.factor(time_mode)(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(ranking[r]));
    }
    const auto g = col.size() >= 2 ? Gini(col) : std::nullopt;
    out << r + 1 << '\t' << ranking[r] << '\t'
        << (g ? FormatDouble(*g) : std::string("nan")) << '\n';
  }
  return kOk;
}

int CmdSynth(const Settings& s, std::ostream& out) {
  SynthConfig cfg;
  cfg.shape.clear();
  for (std::uint64_t n : s.UnsignedList("shape")) {
    cfg.shape.push_back(static_cast<Index>(n));
  }
  cfg.rank = s.Unsigned("rank");
  cfg.alpha = s.Real("alpha");
  cfg.beta = s.RealList("beta");
  cfg.seed = s.Unsigned("seed");
  const SynthSample sample = SampleGenerative(cfg);

  const fs::path dir = OutputDir(s);
  WriteTensorFile((dir / "tensor.txt").string(), sample.tensor);
  WriteLabelsFile((dir / "labels.tsv").string(), sample.tensor.labels());
  WriteFactorSet(dir.string(), "truth", sample.truth, "labels.tsv");
  EchoConfig(s);
  PrintTensorSummary(out, sample.tensor);
  out << "expected_total " << FormatDouble(ExpectedTotal(cfg)) << "\n";
  return kOk;
}

int ExitCodeOf(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kConfig:
      return kUsage;
    case ErrorKind::kData:
      return kDataFailure;
    case ErrorKind::kNumerical:
      return kNumericalFailure;
  }
  return kDataFailure;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Poisson tensor factorization for dyadic event counts", "ptf");
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    const std::vector<Key>* keys;
  };
  const Command commands[] = {
      {"ingest", "bin an event file into a count tensor", &kIngestKeys},
      {"fit", "fit a factorization model to a tensor", &kFitKeys},
      {"eval", "score held-out block predictions", &kEvalKeys},
      {"explore", "rank and summarize fitted components", &kExploreKeys},
      {"synth", "sample a tensor from the generative model", &kSynthKeys},
  };

  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::string> config_path;
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    subs[c.name] = sub;
    sub->add_option("--config", config_path[c.name],
                    "flat key=value settings file");
    for (const auto* keys : {&kCommonKeys, c.keys}) {
      for (const Key& k : *keys) {
        std::string help = k.help;
        if (*k.fallback) help += std::string(" [") + k.fallback + "]";
        sub->add_option("--" + Dashed(k.name), flags[c.name][k.name], help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (const Command& c : commands) {
      CLI::App* sub = subs[c.name];
      if (!sub->parsed()) continue;
      std::vector<Key> keys = kCommonKeys;
      keys.insert(keys.end(), c.keys->begin(), c.keys->end());
      Settings settings(c.name, keys);
      if (!config_path[c.name].empty()) {
        KeyValueDoc doc;
        try {
          doc = KeyValueDoc::ParseFile(config_path[c.name]);
        } catch (const DataError& e) {
          throw ConfigError(std::string("config file: ") + e.what());
        }
        settings.Merge(doc, config_path[c.name]);
      }
      for (const Key& k : keys) {
        if (sub->count("--" + Dashed(k.name)) > 0) {
          settings.Set(k.name, flags[c.name][k.name]);
        }
      }
      const std::string name = c.name;
      if (name == "ingest") return CmdIngest(settings, out);
      if (name == "fit") return CmdFit(settings, out);
      if (name == "eval") return CmdEval(settings, out, err);
      if (name == "explore") return CmdExplore(settings, out);
      return CmdSynth(settings, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeOf(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataFailure;
  }
  return kUsage;
}

}  // namespace ptf::cli

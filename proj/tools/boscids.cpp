// boscids: ingest, train, detect, eval, gen.
//
// Exit status: 0 ok/clean, 1 operational error, 2 anomaly (detect),
// 3 training did not converge (model still written), 4 empty trace (detect).

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boscids/catalog.hpp"
#include "boscids/config.hpp"
#include "boscids/detector.hpp"
#include "boscids/evaluator.hpp"
#include "boscids/ingest.hpp"
#include "boscids/synth.hpp"
#include "boscids/trainer.hpp"

namespace {

using namespace boscids;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kAnomaly = 2;
constexpr int kNotConverged = 3;
constexpr int kEmptyTrace = 4;

// Thrown for usage problems the parser can't see (mismatched list lengths,
// model/flag disagreement).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigFlags {
  std::optional<std::size_t> window;
  std::optional<std::size_t> epoch_size;
  std::optional<double> train_threshold;
  std::optional<double> detect_fraction;
  std::string config_file;
};

std::string two_places(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void add_config_flags(CLI::App& cmd, ConfigFlags& f) {
  const Config d;
  cmd.add_option("--window", f.window, "sliding window length w")
      ->default_str(std::to_string(d.window));
  cmd.add_option("--epoch-size", f.epoch_size, "calls per epoch S")
      ->default_str(std::to_string(d.epoch_size));
  cmd.add_option("--train-threshold", f.train_threshold,
                 "cosine similarity T_t required on two consecutive epochs")
      ->default_str(format_decimal(d.train_threshold));
  cmd.add_option("--detect-fraction", f.detect_fraction,
                 "mismatch threshold as a fraction of epoch length (T_d = fraction * S)")
      ->default_str(two_places(d.detect_fraction));
  cmd.add_option("--config", f.config_file,
                 "key=value config file (default: $BOSCIDS_CONFIG); flags override it");
}

// defaults, then the config file, then explicit flags
void apply_file_and_flags(Config& c, const ConfigFlags& f) {
  std::string path = f.config_file;
  if (path.empty()) {
    if (const char* env = std::getenv("BOSCIDS_CONFIG"); env && *env) path = env;
  }
  if (!path.empty()) apply_config_file(c, path);
  if (f.window) c.window = *f.window;
  if (f.epoch_size) c.epoch_size = *f.epoch_size;
  if (f.train_threshold) c.train_threshold = *f.train_threshold;
  if (f.detect_fraction) c.detect_fraction = *f.detect_fraction;
}

Config resolve_config(const ConfigFlags& f) {
  Config c;
  apply_file_and_flags(c, f);
  c.validate();
  return c;
}

// Detection runs under the model's config. The epoch size and detect fraction
// may be overridden; the window is baked into every stored bag.
void override_for_detection(TrainedModel& model, const ConfigFlags& f) {
  Config c = model.config;
  apply_file_and_flags(c, f);
  if (c.window != model.config.window) {
    throw ConfigError("window: model was trained with w=" + std::to_string(model.config.window) +
                      ", got " + std::to_string(c.window));
  }
  c.train_threshold = model.config.train_threshold;
  c.validate();
  model.config = c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("write failure on " + path);
}

// Writes to `path`, or to stdout when path is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_out(path);
  fn(out);
  finish(out, path);
}

RawTrace load_trace(const std::string& path, bool raw) {
  if (!raw) return read_trace_file(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  return ingest(in, path);
}

// ---- ingest

struct IngestArgs {
  std::string input;
  std::string trace_out;
  std::string counts_out;
};

int run_ingest(const IngestArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw IoError("cannot open strace log: " + a.input);
  RawTrace trace = ingest(in, a.input);
  auto out = open_out(a.trace_out);
  write_trace(out, trace);
  finish(out, a.trace_out);
  auto cout = open_out(a.counts_out);
  write_counts(cout, count_table(trace));
  finish(cout, a.counts_out);
  std::cerr << trace.source_meta << '\n';
  return kOk;
}

// ---- train

struct TrainArgs {
  std::string input;
  bool raw = false;
  std::string counts;
  std::string model;
  std::string log;
  ConfigFlags config;
};

int run_train(const TrainArgs& a) {
  const Config config = resolve_config(a.config);
  RawTrace trace = load_trace(a.input, a.raw);
  const CountTable counts = a.counts.empty() ? count_table(trace) : read_counts_file(a.counts);
  TrainedModel model = train(trace, counts, config);
  save_model_file(model, a.model);
  emit(a.log, [&](std::ostream& out) {
    char buf[64];
    for (const auto& r : model.history) {
      std::snprintf(buf, sizeof buf, "%zu %.9f\n", r.epoch, r.cos_theta);
      out << buf;
    }
  });
  std::cerr << "epochs_trained=" << model.epochs_trained << " db=" << model.db.size()
            << " ns=" << model.index.ns() << (model.converged ? " converged" : " NOT converged")
            << '\n';
  return model.converged ? kOk : kNotConverged;
}

// ---- detect / eval

struct DetectArgs {
  std::vector<std::string> inputs;
  bool raw = false;
  std::string model;
  std::string report;
  std::vector<std::string> labels;
  std::string granularity = "epoch";
  int jobs = 1;
  ConfigFlags config;
};

struct Scanned {
  std::vector<DetectionReport> reports;
  std::vector<std::size_t> lengths;
};

Scanned scan_all(const DetectArgs& a, const TrainedModel& model) {
  const std::size_t n = a.inputs.size();
  std::vector<RawTrace> traces(n);
  for (std::size_t i = 0; i < n; ++i) traces[i] = load_trace(a.inputs[i], a.raw);

  Scanned s;
  s.reports.resize(n);
  s.lengths.resize(n);
  // --jobs is the thread budget: spent across traces when there are several,
  // otherwise inside the per-epoch scan.
  omp_set_num_threads(a.jobs);
  if (n > 1) {
    const int threads = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(a.jobs)));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t i = 0; i < n; ++i) s.reports[i] = detect(model, traces[i]);
  } else if (n == 1) {
    s.reports[0] = detect(model, traces[0]);
  }
  for (std::size_t i = 0; i < n; ++i) s.lengths[i] = traces[i].size();
  return s;
}

int run_detect(const DetectArgs& a) {
  TrainedModel model = load_model_file(a.model);
  override_for_detection(model, a.config);
  const Scanned s = scan_all(a, model);

  bool anomalous = false;
  bool empty = false;
  emit(a.report, [&](std::ostream& out) {
    for (std::size_t i = 0; i < s.reports.size(); ++i) {
      if (s.reports.size() > 1) out << "# trace " << a.inputs[i] << '\n';
      write_report(out, s.reports[i]);
      anomalous = anomalous || s.reports[i].trace_anomalous;
      empty = empty || s.lengths[i] == 0;
    }
  });
  for (std::size_t i = 0; i < s.lengths.size(); ++i) {
    if (s.lengths[i] == 0) std::cerr << "boscids: warning: empty trace: " << a.inputs[i] << '\n';
  }
  if (empty) return kEmptyTrace;
  return anomalous ? kAnomaly : kOk;
}

int run_eval(const DetectArgs& a) {
  if (a.labels.size() != a.inputs.size()) {
    throw UsageError("labels: got " + std::to_string(a.labels.size()) + " label files for " +
                     std::to_string(a.inputs.size()) + " traces");
  }
  const auto granularity = parse_granularity(a.granularity);
  TrainedModel model = load_model_file(a.model);
  override_for_detection(model, a.config);
  const Scanned s = scan_all(a, model);

  std::vector<ReportForTrace> reports;
  LabeledCorpus corpus;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    reports.push_back({a.inputs[i], s.reports[i]});
    corpus.push_back({a.inputs[i], read_labels_file(a.labels[i])});
  }
  const Metrics m = compute_metrics(reports, corpus, *granularity);
  emit(a.report, [&](std::ostream& out) {
    out << metrics_row(m) << '\n' << "# " << metrics_summary(m) << '\n';
  });
  return kOk;
}

// ---- gen

struct GenArgs {
  std::uint64_t seed = 1;
  std::uint64_t structure_seed = 1;
  std::size_t alphabet = SourceShape{}.alphabet_size;
  std::size_t calls = 100000;
  std::vector<std::size_t> inject;
  std::string mode = "burst_repeat";
  double intensity = 0.5;
  std::string trace_out;
  std::string labels_out;
  ConfigFlags config;
};

int run_gen(const GenArgs& a) {
  const Config config = resolve_config(a.config);
  SourceShape shape;
  shape.alphabet_size = a.alphabet;
  shape.structure_seed = a.structure_seed;
  const SourceSpec spec = make_source(shape, a.seed);
  InjectionSpec inj;
  inj.target_epochs = a.inject;
  inj.mode = *parse_injection_mode(a.mode);
  inj.intensity = a.intensity;
  const LabeledTraceData data = gen_anomalous(spec, a.calls, inj, config);

  auto out = open_out(a.trace_out);
  write_trace(out, data.trace);
  finish(out, a.trace_out);
  if (!a.labels_out.empty()) {
    auto lout = open_out(a.labels_out);
    write_labels(lout, data.labels);
    finish(lout, a.labels_out);
  }
  return kOk;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BoSC sliding-window syscall anomaly detector"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "boscids 1.0");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse an strace log into trace and count files");
  ingest_cmd->add_option("input", ingest_args.input, "strace output file")->required();
  ingest_cmd->add_option("-o,--trace", ingest_args.trace_out, "trace file to write (one name per line)")
      ->required();
  ingest_cmd->add_option("-c,--counts", ingest_args.counts_out, "count file to write (name<TAB>count)")
      ->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "learn a normal-behavior model from a trace");
  train_cmd->add_option("input", train_args.input, "trace file")->required();
  train_cmd->add_flag("--raw", train_args.raw, "input is an strace log rather than a trace file");
  train_cmd->add_option("--counts", train_args.counts, "count file (default: counted from the input)");
  train_cmd->add_option("-m,--model", train_args.model, "model file to write")->required();
  train_cmd->add_option("--log", train_args.log, "convergence log `k cos` (default: stdout)");
  add_config_flags(*train_cmd, train_args.config);

  DetectArgs detect_args;
  auto* detect_cmd = app.add_subcommand("detect", "scan traces against a model");
  detect_cmd->add_option("inputs", detect_args.inputs, "trace files")->required();
  detect_cmd->add_flag("--raw", detect_args.raw, "inputs are strace logs rather than trace files");
  detect_cmd->add_option("-m,--model", detect_args.model, "model file")->required();
  detect_cmd->add_option("-o,--report", detect_args.report, "report file (default: stdout)");
  detect_cmd->add_option("-j,--jobs", detect_args.jobs, "threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_config_flags(*detect_cmd, detect_args.config);

  DetectArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "detection metrics against epoch labels");
  eval_cmd->add_option("inputs", eval_args.inputs, "trace files")->required();
  eval_cmd->add_flag("--raw", eval_args.raw, "inputs are strace logs rather than trace files");
  eval_cmd->add_option("-m,--model", eval_args.model, "model file")->required();
  eval_cmd->add_option("-l,--labels", eval_args.labels, "label file per trace, same order")
      ->required();
  eval_cmd->add_option("-g,--granularity", eval_args.granularity, "epoch or window")
      ->capture_default_str()
      ->check(CLI::IsMember({"epoch", "window"}));
  eval_cmd->add_option("-o,--report", eval_args.report, "metrics output (default: stdout)");
  eval_cmd->add_option("-j,--jobs", eval_args.jobs, "threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_config_flags(*eval_cmd, eval_args.config);

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic labeled trace");
  gen_cmd->add_option("-o,--trace", gen_args.trace_out, "trace file to write")->required();
  gen_cmd->add_option("-l,--labels", gen_args.labels_out, "label file to write");
  gen_cmd->add_option("--seed", gen_args.seed, "walk seed")->capture_default_str();
  gen_cmd->add_option("--structure-seed", gen_args.structure_seed, "transition matrix seed")
      ->capture_default_str();
  gen_cmd->add_option("--alphabet", gen_args.alphabet, "distinct syscall names in the source")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, syscall_name_pool().size()));
  gen_cmd->add_option("--calls", gen_args.calls, "trace length")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--inject", gen_args.inject, "epoch indices to inject (comma separated)")
      ->delimiter(',');
  gen_cmd->add_option("--mode", gen_args.mode, "injection mode")
      ->capture_default_str()
      ->check(CLI::IsMember({"novel_names", "shuffled_transitions", "burst_repeat"}));
  gen_cmd->add_option("--intensity", gen_args.intensity, "fraction of an injected epoch replaced")
      ->capture_default_str();
  add_config_flags(*gen_cmd, gen_args.config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "boscids: error: " << first_line(e.what()) << '\n';
    return kError;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest_args);
    if (*train_cmd) return run_train(train_args);
    if (*detect_cmd) return run_detect(detect_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*gen_cmd) return run_gen(gen_args);
  } catch (const std::exception& e) {
    std::cerr << "boscids: error: " << first_line(e.what()) << '\n';
    return kError;
  }
  return kError;
}

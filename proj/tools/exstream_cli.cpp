// exstream: synthesize datasets, train offline baselines, run rehearsal sweeps
// and build omega reports.

#include <iostream>

#include "CLI11.hpp"
#include "exstream/commands.hpp"
#include "exstream/errors.hpp"

namespace {

struct Flags {
  std::string features;
  std::string manifest;
  std::string config;
  std::string baseline;
  std::string results;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  std::size_t epochs = 1;
  std::size_t jobs = 1;
  std::string out;
  bool no_normalize = false;
  bool dump_buffers = false;
};

exstream::CommandOptions to_options(const Flags& f, const CLI::App& cmd) {
  exstream::CommandOptions o;
  const auto set = [&](const char* name) {
    const auto* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (set("--features")) o.features = f.features;
  if (set("--manifest")) o.manifest = f.manifest;
  if (set("--config")) o.config = f.config;
  if (set("--baseline")) o.baseline = f.baseline;
  if (set("--results")) o.results = f.results;
  if (set("--seed")) o.seed = f.seed;
  if (set("--eval-every")) o.eval_every = f.eval_every;
  if (set("--epochs")) o.epochs = f.epochs;
  if (set("--no-normalize")) o.normalize = false;
  o.jobs = f.jobs;
  o.dump_buffers = f.dump_buffers;
  o.out = f.out;
  return o;
}

void add_dataset_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--features", f.features, "Binary feature file (FEAT v1)");
  cmd->add_option("--manifest", f.manifest, "CSV manifest");
  cmd->add_flag("--no-normalize", f.no_normalize, "Keep feature vectors as stored");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-efficient rehearsal for streaming classification"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian dataset");
  synth->add_option("--config", f.config, "Synth spec JSON");
  synth->add_option("--seed", f.seed, "Override the spec seed");
  synth->add_option("--out", f.out, "Output directory")->required();

  auto* baseline = app.add_subcommand("baseline", "Train the offline baseline");
  add_dataset_flags(baseline, f);
  baseline->add_option("--config", f.config, "Experiment config JSON");
  baseline->add_option("--seed", f.seed, "Learner seed");
  baseline->add_option("--epochs", f.epochs, "Training epochs");
  baseline->add_option("--out", f.out, "Baseline record (JSON)")->required();

  auto* run = app.add_subcommand("run", "Execute a streaming sweep");
  add_dataset_flags(run, f);
  run->add_option("--config", f.config, "Experiment config JSON")->required();
  run->add_option("--baseline", f.baseline, "Baseline record from `baseline`");
  run->add_option("--seed", f.seed, "Run a single seed");
  run->add_option("--eval-every", f.eval_every, "Samples between test events");
  run->add_option("--jobs", f.jobs, "Parallel runs");
  run->add_flag("--dump-buffers", f.dump_buffers, "Log each run's final buffer contents");
  run->add_option("--out", f.out, "Results log (JSONL)")->required();

  auto* report = app.add_subcommand("report", "Build omega / mu_total tables");
  report->add_option("--results", f.results, "Results log (JSONL)")->required();
  report->add_option("--baseline", f.baseline, "Baseline record")->required();
  report->add_option("--out", f.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(exstream::ExitCode::kUsage);
  }

  try {
    if (synth->parsed()) {
      exstream::cmd_synth(to_options(f, *synth));
    } else if (baseline->parsed()) {
      const auto b = exstream::cmd_baseline(to_options(f, *baseline));
      std::cout << "offline accuracy " << b.accuracy << " on " << b.dataset << "\n";
    } else if (run->parsed()) {
      const auto s = exstream::cmd_run(to_options(f, *run));
      std::cout << s.executed << " runs executed, " << s.skipped << " already complete\n";
    } else if (report->parsed()) {
      const auto r = exstream::cmd_report(to_options(f, *report));
      std::cout << r.omegas.size() << " omega rows, " << r.mus.size() << " mu_total rows\n";
    }
  } catch (const exstream::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(exstream::ExitCode::kData);
  }
  return 0;
}

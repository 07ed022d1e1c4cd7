#include "exstream/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "exstream/errors.hpp"
#include "exstream/feature_io.hpp"
#include "exstream/manifest.hpp"
#include "exstream/metrics.hpp"
#include "exstream/results_log.hpp"
#include "exstream/synth.hpp"

namespace exstream {

ExperimentConfig resolve_config(const CommandOptions& options) {
  ExperimentConfig cfg =
      options.config ? load_experiment_config(*options.config) : parse_experiment_config(nlohmann::json::object());
  if (options.features) cfg.dataset.features = *options.features;
  if (options.manifest) cfg.dataset.manifest = *options.manifest;
  if (options.normalize) cfg.dataset.normalize = *options.normalize;
  if (options.seed) {
    cfg.seeds = {*options.seed};
    cfg.mlp.seed = *options.seed;
  }
  if (options.eval_every) {
    if (*options.eval_every < 1) throw UsageError("--eval-every must be >= 1");
    cfg.eval_every = *options.eval_every;
  }
  if (options.epochs) {
    if (*options.epochs < 1) throw UsageError("--epochs must be >= 1");
    cfg.offline_epochs = *options.epochs;
  }
  return cfg;
}

Dataset load_dataset(const DatasetRef& ref) {
  if (ref.features.empty() || ref.manifest.empty()) {
    throw UsageError("dataset needs --features and --manifest (or dataset.features/manifest in config)");
  }
  const auto matrix = load_feature_matrix(ref.features);
  return load_manifest(ref.manifest, matrix, {ref.normalize, ref.name});
}

void cmd_synth(const CommandOptions& options) {
  SynthSpec spec = options.config ? load_synth_spec(*options.config) : SynthSpec{};
  if (options.seed) spec.seed = *options.seed;
  if (options.out.empty()) throw UsageError("synth needs --out DIR");
  std::error_code ec;
  std::filesystem::create_directories(options.out, ec);
  if (ec) throw DataError("cannot create " + options.out.string() + ": " + ec.message());
  const auto dataset = synth_gaussian(spec);
  write_dataset(dataset, options.out / "features.bin", options.out / "manifest.csv");
}

OfflineBaseline cmd_baseline(const CommandOptions& options) {
  if (options.out.empty()) throw UsageError("baseline needs --out PATH");
  const auto cfg = resolve_config(options);
  const auto dataset = load_dataset(cfg.dataset);
  auto baseline = train_offline_baseline(dataset, cfg.mlp, cfg.offline_epochs);
  write_baseline(options.out, baseline);
  return baseline;
}

RunSummary cmd_run(const CommandOptions& options) {
  if (options.out.empty()) throw UsageError("run needs --out PATH");
  if (!options.baseline || !std::filesystem::exists(*options.baseline)) {
    throw UsageError("run needs an offline baseline record; create one with `exstream baseline` "
                     "and pass it via --baseline");
  }
  if (options.jobs < 1) throw UsageError("--jobs must be >= 1");
  const auto cfg = resolve_config(options);
  const auto dataset = load_dataset(cfg.dataset);
  const auto baseline = read_baseline(*options.baseline);
  if (baseline.dataset != dataset.name) {
    throw DataError("baseline is for dataset '" + baseline.dataset + "', sweep uses '" +
                    dataset.name + "'");
  }

  const auto all_runs = expand_sweep(cfg, dataset.name, dataset.num_classes);
  const auto done_ids = compact_results(options.out);
  const std::set<std::string> done(done_ids.begin(), done_ids.end());
  std::vector<const SweepRun*> pending;
  for (const auto& r : all_runs) {
    if (!done.count(r.run_id)) pending.push_back(&r);
  }

  RunSummary summary;
  summary.skipped = all_runs.size() - pending.size();
  if (pending.empty()) return summary;

  std::ofstream out(options.out, std::ios::app);
  if (!out) throw DataError("cannot open " + options.out.string() + " for appending");

  // Workers fill slots; this thread writes them in sweep order.
  std::vector<std::optional<std::vector<std::string>>> slots(pending.size());
  std::vector<std::exception_ptr> errors(pending.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  const auto worker = [&] {
    for (std::size_t i = next++; i < pending.size() && !abort; i = next++) {
      std::optional<std::vector<std::string>> lines;
      std::exception_ptr err;
      try {
        const auto& run = *pending[i];
        RunConfig rc = run.config;
        rc.capture_buffer = options.dump_buffers;
        const auto result = rc.strategy ? run_streaming(dataset, rc) : run_no_buffer(dataset, rc);
        lines = format_run_records(run, dataset.name, result);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        slots[i] = lines ? std::move(lines) : std::vector<std::string>{};
        errors[i] = err;
      }
      ready.notify_all();
    }
  };

  const std::size_t threads = std::min(options.jobs, pending.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);

  std::exception_ptr first_error;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    std::vector<std::string> lines;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      if (errors[i]) {
        first_error = errors[i];
        abort = true;
        break;
      }
      lines = std::move(*slots[i]);
    }
    for (const auto& l : lines) out << l << '\n';
    out.flush();
    ++summary.executed;
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return summary;
}

namespace {

int ordering_rank(const std::string& name) {
  static const std::vector<std::string> order = {"iid", "class_iid", "instance", "class_instance"};
  const auto it = std::find(order.begin(), order.end(), name);
  return static_cast<int>(it - order.begin());
}

int method_rank(const std::string& name) {
  static const std::vector<std::string> order = {"reservoir", "queue",     "online_kmeans",
                                                 "clustream", "hpstream",  "exstream",
                                                 "no_buffer", "full"};
  const auto it = std::find(order.begin(), order.end(), name);
  return static_cast<int>(it - order.begin());
}

struct GroupKey {
  std::string dataset;
  std::string ordering;
  std::string method;

  auto rank() const {
    return std::make_tuple(dataset, ordering_rank(ordering), ordering, method_rank(method), method);
  }
  bool operator<(const GroupKey& o) const { return rank() < o.rank(); }
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double sq = 0.0;
  for (double x : v) sq += (x - m) * (x - m);
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

Report build_report(const std::vector<LoggedRun>& runs, const OfflineBaseline& baseline) {
  // group -> buffer size -> seed -> omega
  std::map<GroupKey, std::map<std::size_t, std::map<std::uint64_t, double>>> table;
  for (const auto& run : runs) {
    if (!run.complete) continue;
    if (run.key.dataset != baseline.dataset) {
      throw DataError("report: run '" + run.key.run_id + "' is for dataset '" + run.key.dataset +
                      "' but the baseline is for '" + baseline.dataset + "'");
    }
    const auto offline = offline_curve(baseline, run.curve, run.eval_scope);
    const auto omega = omega_b(run.curve, offline, run.key.buffer_size);
    table[{run.key.dataset, run.key.ordering, run.key.method}][run.key.buffer_size][run.key.seed] =
        omega.omega;
  }

  Report report;
  for (const auto& [group, by_size] : table) {
    std::vector<OmegaResult> means;
    std::map<std::uint64_t, std::vector<double>> per_seed;
    for (const auto& [b, by_seed] : by_size) {
      std::vector<double> values;
      for (const auto& [seed, omega] : by_seed) {
        values.push_back(omega);
        per_seed[seed].push_back(omega);
      }
      report.omegas.push_back({group.dataset, group.ordering, group.method, b, mean_of(values),
                               sample_std(values), values.size()});
      means.push_back({b, mean_of(values), 0});
    }
    std::vector<double> seed_mus;
    for (const auto& [seed, values] : per_seed) {
      if (values.size() == by_size.size()) seed_mus.push_back(mean_of(values));
    }
    report.mus.push_back({group.dataset, group.ordering, group.method, mu_total(means).mu,
                          sample_std(seed_mus), seed_mus.size()});
  }
  return report;
}

Report cmd_report(const CommandOptions& options) {
  if (!options.results) throw UsageError("report needs --results PATH");
  if (!options.baseline) throw UsageError("report needs --baseline PATH");
  if (options.out.empty()) throw UsageError("report needs --out DIR");
  const auto baseline = read_baseline(*options.baseline);
  const auto report = build_report(read_results(*options.results), baseline);

  std::error_code ec;
  std::filesystem::create_directories(options.out, ec);
  if (ec) throw DataError("cannot create " + options.out.string() + ": " + ec.message());

  std::ofstream table(options.out / "omega_table.csv", std::ios::trunc);
  std::ofstream series(options.out / "omega_series.csv", std::ios::trunc);
  if (!table || !series) throw DataError("cannot write report files in " + options.out.string());
  table << "dataset,ordering,method,buffer_size,omega,omega_std,num_seeds\n";
  series << "method,ordering,dataset,buffer_size,omega_mean,omega_std\n";

  std::size_t r = 0;
  for (const auto& mu : report.mus) {
    for (; r < report.omegas.size() && report.omegas[r].dataset == mu.dataset &&
           report.omegas[r].ordering == mu.ordering && report.omegas[r].method == mu.method;
         ++r) {
      const auto& o = report.omegas[r];
      table << o.dataset << ',' << o.ordering << ',' << o.method << ',' << o.buffer_size << ','
            << fmt3(o.omega) << ',' << fmt3(o.omega_std) << ',' << o.num_seeds << '\n';
    }
    table << mu.dataset << ',' << mu.ordering << ',' << mu.method << ",mu_total," << fmt3(mu.mu)
          << ',' << fmt3(mu.mu_std) << ',' << mu.num_seeds << '\n';
  }

  // Series are grouped by method first for plotting.
  auto rows = report.omegas;
  std::stable_sort(rows.begin(), rows.end(), [](const OmegaRow& a, const OmegaRow& b) {
    return std::make_tuple(method_rank(a.method), a.method, ordering_rank(a.ordering), a.dataset,
                           a.buffer_size) < std::make_tuple(method_rank(b.method), b.method,
                                                            ordering_rank(b.ordering), b.dataset,
                                                            b.buffer_size);
  });
  for (const auto& o : rows) {
    series << o.method << ',' << o.ordering << ',' << o.dataset << ',' << o.buffer_size << ','
           << fmt3(o.omega) << ',' << fmt3(o.omega_std) << '\n';
  }
  if (!table || !series) throw DataError("write failed in " + options.out.string());
  return report;
}

}  // namespace exstream

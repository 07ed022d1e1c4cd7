#include "exstream/results_log.hpp"

#include <fstream>
#include <map>
#include <set>

#include "exstream/errors.hpp"

namespace exstream {

using nlohmann::json;

namespace {

json key_fields(const SweepRun& run, const std::string& dataset) {
  return {{"run_id", run.run_id},        {"dataset", dataset},
          {"method", run.method},        {"buffer_size", run.buffer_size},
          {"ordering", to_string(run.ordering)}, {"seed", run.seed}};
}

}  // namespace

std::vector<std::string> format_run_records(const SweepRun& run, const std::string& dataset,
                                            const RunResult& result) {
  std::vector<std::string> lines;
  lines.reserve(result.curve.size() + 1);
  for (const auto& e : result.curve.events) {
    json rec = key_fields(run, dataset);
    rec["record"] = "event";
    rec["t"] = e.t;
    rec["accuracy"] = e.alpha;
    rec["seen_classes"] = e.seen_classes;
    rec["eval_scope"] = to_string(run.config.eval_scope);
    lines.push_back(rec.dump());
  }
  if (!result.final_buffer.empty()) {
    json rec = key_fields(run, dataset);
    rec["record"] = "buffer";
    json protos = json::array();
    for (const auto& p : result.final_buffer) {
      protos.push_back({{"class_label", p.class_label}, {"features", p.features}});
    }
    rec["prototypes"] = std::move(protos);
    lines.push_back(rec.dump());
  }
  json summary = key_fields(run, dataset);
  summary["record"] = "summary";
  summary["events"] = result.curve.size();
  summary["wall_clock_s"] = result.wall_seconds;
  summary["memory_cost"] = result.memory_cost;
  summary["eval_scope"] = to_string(run.config.eval_scope);
  lines.push_back(summary.dump());
  return lines;
}

std::vector<LoggedRun> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results " + path.string());
  std::vector<LoggedRun> runs;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const json rec = json::parse(line);
      const auto id = rec.at("run_id").get<std::string>();
      auto [it, inserted] = index.emplace(id, runs.size());
      if (inserted) {
        LoggedRun r;
        r.key = {id,
                 rec.at("dataset").get<std::string>(),
                 rec.at("method").get<std::string>(),
                 rec.at("buffer_size").get<std::size_t>(),
                 rec.at("ordering").get<std::string>(),
                 rec.at("seed").get<std::uint64_t>()};
        r.eval_scope = parse_eval_scope(rec.value("eval_scope", std::string("all")));
        runs.push_back(std::move(r));
      }
      auto& run = runs[it->second];
      const auto kind = rec.value("record", std::string("event"));
      if (kind == "buffer") continue;
      if (kind == "summary") {
        run.complete = true;
        run.wall_clock_s = rec.value("wall_clock_s", 0.0);
        run.memory_cost = rec.value("memory_cost", 0.0);
      } else {
        AccuracyEvent e;
        e.t = rec.at("t").get<std::uint64_t>();
        e.alpha = rec.at("accuracy").get<double>();
        e.seen_classes = rec.value("seen_classes", std::vector<int>{});
        run.curve.events.push_back(std::move(e));
      }
    } catch (const json::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    } catch (const ConfigError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return runs;
}

std::vector<std::string> compact_results(const std::filesystem::path& path) {
  std::vector<std::string> done;
  if (!std::filesystem::exists(path)) return done;
  std::set<std::string> complete;
  for (const auto& r : read_results(path)) {
    if (r.complete) complete.insert(r.key.run_id);
  }

  std::vector<std::string> kept;
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (complete.count(json::parse(line).at("run_id").get<std::string>())) kept.push_back(line);
    }
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    for (const auto& l : kept) out << l << '\n';
  }
  std::filesystem::rename(tmp, path);
  done.assign(complete.begin(), complete.end());
  return done;
}

json to_json(const OfflineBaseline& baseline) {
  json doc = {{"dataset", baseline.dataset},
              {"seed", baseline.seed},
              {"epochs", baseline.epochs},
              {"accuracy", baseline.accuracy},
              {"per_class_correct", baseline.evaluation.correct},
              {"per_class_total", baseline.evaluation.total}};
  if (!baseline.external_curve.empty()) {
    json curve = json::array();
    for (const auto& [t, a] : baseline.external_curve) curve.push_back({{"t", t}, {"accuracy", a}});
    doc["offline_curve"] = std::move(curve);
  }
  return doc;
}

OfflineBaseline baseline_from_json(const json& doc) {
  OfflineBaseline b;
  try {
    b.dataset = doc.at("dataset").get<std::string>();
    b.seed = doc.at("seed").get<std::uint64_t>();
    b.epochs = doc.at("epochs").get<std::size_t>();
    b.accuracy = doc.at("accuracy").get<double>();
    b.evaluation.correct = doc.at("per_class_correct").get<std::vector<std::size_t>>();
    b.evaluation.total = doc.at("per_class_total").get<std::vector<std::size_t>>();
    if (doc.contains("offline_curve")) {
      for (const auto& e : doc.at("offline_curve")) {
        b.external_curve[e.at("t").get<std::uint64_t>()] = e.at("accuracy").get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed baseline record: ") + e.what());
  }
  if (b.evaluation.correct.size() != b.evaluation.total.size()) {
    throw DataError("baseline record: per-class arrays differ in length");
  }
  return b;
}

void write_baseline(const std::filesystem::path& path, const OfflineBaseline& baseline) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << to_json(baseline).dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

OfflineBaseline read_baseline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open baseline " + path.string());
  try {
    return baseline_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace exstream

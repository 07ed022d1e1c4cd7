#include "exstream/experiment_config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <string_view>

#include "exstream/errors.hpp"
#include "exstream/random.hpp"

namespace exstream {

using nlohmann::json;

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

// Typed accessor that names the offending key on mismatch.
class Reader {
 public:
  Reader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": unexpected type");
    }
  }

  double positive(const char* key, double fallback) const {
    const double v = get<double>(key, fallback);
    if (!(v > 0.0)) throw ConfigError(where_ + "." + key + ": must be > 0");
    return v;
  }

  Reader child(const char* key) const { return Reader(doc_.at(key), where_ + "." + key); }

  // Rejects keys outside `allowed` so that typos do not silently fall back to defaults.
  const Reader& only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : doc_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError(where_ + ": unknown key '" + key + "'");
      }
    }
    return *this;
  }

 private:
  const json& doc_;
  std::string where_;
};

MLPConfig parse_mlp(const Reader& r) {
  r.only({"preset", "layer_sizes", "activation", "dropout_keep", "weight_decay", "learning_rate",
          "batch_size", "seed"});
  MLPConfig mlp;
  const auto preset = r.get<std::string>("preset", "");
  if (preset == "icub1") {
    mlp = MLPConfig::icub1();
  } else if (preset == "core50") {
    mlp = MLPConfig::core50();
  } else if (preset == "cub200") {
    mlp = MLPConfig::cub200();
  } else if (!preset.empty()) {
    throw ConfigError("mlp.preset: unknown preset '" + preset + "'");
  }
  mlp.layer_sizes = r.get("layer_sizes", mlp.layer_sizes);
  if (r.has("activation")) mlp.activation = parse_activation(r.get<std::string>("activation", ""));
  mlp.dropout_keep = r.get("dropout_keep", mlp.dropout_keep);
  mlp.weight_decay = r.get("weight_decay", mlp.weight_decay);
  mlp.learning_rate = r.get("learning_rate", mlp.learning_rate);
  mlp.batch_size = r.get("batch_size", mlp.batch_size);
  mlp.seed = r.get("seed", mlp.seed);
  validate(mlp);
  return mlp;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                      ": JSON syntax error: " + e.what());
  }
}

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base_dir) {
  const Reader r(doc, "config");
  r.only({"dataset", "methods", "buffer_sizes", "orderings", "seeds", "eval_every", "eval_scope",
          "offline_epochs", "mlp", "clustream", "hpstream"});
  ExperimentConfig cfg;

  if (r.has("dataset")) {
    const auto d = r.child("dataset");
    d.only({"name", "features", "manifest", "normalize"});
    cfg.dataset.name = d.get<std::string>("name", "");
    cfg.dataset.features = resolve(base_dir, d.get<std::string>("features", ""));
    cfg.dataset.manifest = resolve(base_dir, d.get<std::string>("manifest", ""));
    cfg.dataset.normalize = d.get("normalize", true);
  }

  cfg.methods = r.get<std::vector<std::string>>(
      "methods", {"reservoir", "queue", "online_kmeans", "clustream", "hpstream", "exstream",
                  "no_buffer", "full"});
  if (cfg.methods.empty()) throw ConfigError("config.methods: must not be empty");
  for (const auto& m : cfg.methods) {
    if (m != "no_buffer") parse_strategy(m);
  }

  cfg.buffer_sizes = r.get<std::vector<std::size_t>>("buffer_sizes", {});
  if (r.has("buffer_sizes") && cfg.buffer_sizes.empty()) {
    throw ConfigError("config.buffer_sizes: must not be empty");
  }
  for (auto b : cfg.buffer_sizes) {
    if (b < 1) throw ConfigError("config.buffer_sizes: sizes must be >= 1");
  }

  const auto orderings = r.get<std::vector<std::string>>(
      "orderings", {"iid", "class_iid", "instance", "class_instance"});
  if (orderings.empty()) throw ConfigError("config.orderings: must not be empty");
  for (const auto& o : orderings) cfg.orderings.push_back(parse_ordering_kind(o));

  cfg.seeds = r.get<std::vector<std::uint64_t>>("seeds", {0});
  if (cfg.seeds.empty()) throw ConfigError("config.seeds: must not be empty");

  cfg.eval_every = r.get<std::size_t>("eval_every", 1);
  if (cfg.eval_every < 1) throw ConfigError("config.eval_every: must be >= 1");
  cfg.eval_scope = parse_eval_scope(r.get<std::string>("eval_scope", "seen"));
  cfg.offline_epochs = r.get<std::size_t>("offline_epochs", 50);
  if (cfg.offline_epochs < 1) throw ConfigError("config.offline_epochs: must be >= 1");

  if (r.has("mlp")) cfg.mlp = parse_mlp(r.child("mlp"));

  if (r.has("clustream")) {
    const auto c = r.child("clustream");
    c.only({"horizon", "boundary_factor", "init_multiplier"});
    auto& p = cfg.buffer_params.clustream;
    p.horizon = c.positive("horizon", p.horizon);
    p.boundary_factor = c.positive("boundary_factor", p.boundary_factor);
    p.init_multiplier = c.get("init_multiplier", p.init_multiplier);
    if (p.init_multiplier < 1) throw ConfigError("config.clustream.init_multiplier: must be >= 1");
  }
  if (r.has("hpstream")) {
    const auto h = r.child("hpstream");
    h.only({"decay_rate", "spread_radius_factor", "speed", "projected_dims"});
    auto& p = cfg.buffer_params.hpstream;
    p.decay_rate = h.get("decay_rate", p.decay_rate);
    if (!(p.decay_rate >= 0.0)) throw ConfigError("config.hpstream.decay_rate: must be >= 0");
    p.spread_radius_factor = h.positive("spread_radius_factor", p.spread_radius_factor);
    p.speed = h.positive("speed", p.speed);
    p.projected_dims = h.get("projected_dims", p.projected_dims);
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(load_json_file(path), path.parent_path());
}

SynthSpec parse_synth_spec(const json& doc) {
  const Reader r(doc, "synth");
  r.only({"num_classes", "dim", "samples_per_class_train", "samples_per_class_test",
          "instances_per_class", "class_mean_separation", "noise_std", "instance_spread",
          "shared_mean_norm", "seed"});
  SynthSpec s;
  s.num_classes = r.get("num_classes", s.num_classes);
  s.dim = r.get("dim", s.dim);
  s.samples_per_class_train = r.get("samples_per_class_train", s.samples_per_class_train);
  s.samples_per_class_test = r.get("samples_per_class_test", s.samples_per_class_test);
  s.instances_per_class = r.get("instances_per_class", s.instances_per_class);
  s.class_mean_separation = r.get("class_mean_separation", s.class_mean_separation);
  s.noise_std = r.get("noise_std", s.noise_std);
  s.instance_spread = r.get("instance_spread", s.instance_spread);
  s.shared_mean_norm = r.get("shared_mean_norm", s.shared_mean_norm);
  s.seed = r.get("seed", s.seed);
  validate_synth_spec(s);
  return s;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return parse_synth_spec(load_json_file(path));
}

std::vector<std::size_t> default_buffer_sizes(int num_classes) {
  const int max_power = num_classes >= 100 ? 4 : 8;
  std::vector<std::size_t> sizes;
  for (int p = 1; p <= max_power; ++p) sizes.push_back(std::size_t{1} << p);
  return sizes;
}

std::vector<SweepRun> expand_sweep(const ExperimentConfig& config, const std::string& dataset_name,
                                   int num_classes) {
  const auto sizes =
      config.buffer_sizes.empty() ? default_buffer_sizes(num_classes) : config.buffer_sizes;
  if (std::set<std::size_t>(sizes.begin(), sizes.end()).size() != sizes.size()) {
    throw ConfigError("config.buffer_sizes: duplicate sizes");
  }

  std::vector<SweepRun> runs;
  for (const auto& method : config.methods) {
    const bool unbounded = method == "no_buffer" || method == "full";
    const std::vector<std::size_t> method_sizes = unbounded ? std::vector<std::size_t>{0} : sizes;
    for (auto ordering : config.orderings) {
      for (auto b : method_sizes) {
        for (auto seed : config.seeds) {
          SweepRun run;
          run.method = method;
          run.buffer_size = b;
          run.ordering = ordering;
          run.seed = seed;
          run.run_id = dataset_name + "/" + method + "/b" + std::to_string(b) + "/" +
                       to_string(ordering) + "/s" + std::to_string(seed);

          RunConfig& rc = run.config;
          rc.strategy = method == "no_buffer" ? std::nullopt
                                              : std::optional<Strategy>(parse_strategy(method));
          rc.buffer_size = b;
          rc.ordering = {ordering, derive_seed(seed, 100)};
          rc.mlp = config.mlp;
          rc.mlp.seed = derive_seed(derive_seed(config.mlp.seed, seed), 101);
          rc.buffer_params = config.buffer_params;
          rc.buffer_seed = derive_seed(seed, 102);
          rc.eval_every = config.eval_every;
          rc.eval_scope = config.eval_scope;
          runs.push_back(std::move(run));
        }
      }
    }
  }
  return runs;
}

}  // namespace exstream

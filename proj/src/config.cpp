#include "ddcl/config.hpp"

#include "ddcl/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace ddcl {

using nlohmann::json;

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Debris: return "debris";
    case ExperimentKind::Ablation: return "ablation";
    case ExperimentKind::Vq: return "vq";
    case ExperimentKind::Hierarchy: return "hierarchy";
    case ExperimentKind::Gradcheck: return "gradcheck";
  }
  return "unknown";
}

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  debris.data_seed = s;
  debris.trainer.seed = s;
  ablation.data_seed = s;
  ablation.trainer.seed = s;
  vq.base.seed = s;
  vq.base.soft.seed = s;
  hierarchy.data_seed = s;
  hierarchy.trainer.seed = s;
  gradcheck.seed = s;
}

void ExperimentConfig::set_threads(int n) {
  require(n >= 1, "threads must be >= 1");
  threads = n;
  ablation.threads = n;
}

void ExperimentConfig::validate() const {
  require(threads >= 1, "threads must be >= 1");
  switch (kind) {
    case ExperimentKind::Debris: debris.validate(); break;
    case ExperimentKind::Ablation: ablation.validate(); break;
    case ExperimentKind::Vq:
      require(!vq.K_values.empty(), "vq: K list is empty");
      for (int K : vq.K_values) {
        VqConfig c = vq.base;
        c.K = K;
        c.validate();
      }
      break;
    case ExperimentKind::Hierarchy: hierarchy.validate(); break;
    case ExperimentKind::Gradcheck:
      require(gradcheck.instances >= 1, "gradcheck: instances must be >= 1");
      break;
  }
}

namespace {

// One field list per struct serves both directions.
struct Reader {
  const json& j;
  std::string where;
  std::set<std::string> seen;

  template <class T>
  void operator()(const char* key, T& value) {
    seen.insert(key);
    if (!j.contains(key)) return;
    try {
      read(j.at(key), value, where + "." + key);
    } catch (const json::exception& e) {
      throw Error("config: " + where + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j.items())
      if (!seen.count(k)) throw Error("config: unknown key " + where + "." + k);
  }

  static void read(const json& v, double& out, const std::string& path) {
    if (!v.is_number()) throw Error("config: " + path + " must be a number");
    out = v.get<double>();
  }
  static void read(const json& v, int& out, const std::string& path) {
    if (!v.is_number_integer()) throw Error("config: " + path + " must be an integer");
    out = v.get<int>();
  }
  static void read(const json& v, bool& out, const std::string& path) {
    if (!v.is_boolean()) throw Error("config: " + path + " must be true or false");
    out = v.get<bool>();
  }
  static void read(const json& v, std::vector<double>& out, const std::string& path) {
    if (!v.is_array()) throw Error("config: " + path + " must be an array");
    out.clear();
    for (const auto& x : v) {
      double d = 0.0;
      read(x, d, path);
      out.push_back(d);
    }
  }
  static void read(const json& v, std::vector<int>& out, const std::string& path) {
    out.clear();
    if (v.is_number_integer()) {
      out.push_back(v.get<int>());
      return;
    }
    if (!v.is_array()) throw Error("config: " + path + " must be an integer or array");
    for (const auto& x : v) {
      int d = 0;
      read(x, d, path);
      out.push_back(d);
    }
  }
  template <class T>
  static void read(const json& v, T& out, const std::string& path);
};

struct Writer {
  json& j;

  template <class T>
  void operator()(const char* key, const T& value) {
    j[key] = write(value);
  }
  static json write(double v) { return v; }
  static json write(int v) { return v; }
  static json write(bool v) { return v; }
  static json write(const std::vector<double>& v) { return v; }
  static json write(const std::vector<int>& v) { return v; }
  template <class T>
  static json write(const T& v);
};

template <class F>
void for_fields(AnnealSchedule& s, F&& f) {
  f("T0", s.T0);
  f("Tmin", s.Tmin);
  f("tau", s.tau);
}

template <class F>
void for_fields(TrainerConfig& t, F&& f) {
  f("eta_P", t.eta_P);
  f("eta_theta", t.eta_theta);
  f("lambda", t.lambda);
  f("lambda_q", t.lambda_q);
  f("clip", t.clip);
  f("epochs", t.epochs);
  f("sg_on_Q", t.sg_on_Q);
  f("batch_size", t.batch_size);
  f("min_pair_dist_guard", t.min_pair_dist_guard);
  f("utilization_threshold", t.utilization_threshold);
  f("schedule", t.schedule);
}

template <class F>
void for_fields(DebrisExperiment& d, F&& f) {
  f("per_class", d.data.per_class);
  f("sigma_min", d.data.sigma_min);
  f("sigma_max", d.data.sigma_max);
  f("pca_dim", d.pca_dim);
  f("restarts", d.restarts);
}

template <class F>
void for_fields(AblationExperiment& a, F&& f) {
  f("K", a.K);
  f("per_class", a.per_class);
  f("dim", a.dim);
  f("m", a.m);
  f("spread", a.spread);
  f("input_scale", a.input_scale);
  f("restarts", a.restarts);
  f("epsilons", a.epsilons);
}

template <class F>
void for_fields(VqExperiment& v, F&& f) {
  f("K", v.K_values);
  f("dim", v.base.dim);
  f("groups", v.base.groups);
  f("center_scale", v.base.center_scale);
  f("spread", v.base.spread);
  f("tokens_per_epoch", v.base.tokens_per_epoch);
  f("batch_size", v.base.batch_size);
  f("epochs", v.base.epochs);
  f("init_range", v.base.init_range);
  f("beta", v.base.beta);
  f("eta_hard", v.base.eta_hard);
  f("threshold", v.base.threshold);
}

template <class F>
void for_fields(TopicCorpusParams& c, F&& f) {
  f("topics", c.topics);
  f("docs_per_topic", c.docs_per_topic);
  f("tokens_per_doc", c.tokens_per_doc);
  f("dim", c.dim);
  f("subtopics", c.subtopics);
  f("topic_scale", c.topic_scale);
  f("subtopic_scale", c.subtopic_scale);
  f("token_noise", c.token_noise);
}

struct Setting {
  double epsilon = 0.0;
  double lambda = 0.0;
};

template <class F>
void for_fields(Setting& s, F&& f) {
  f("epsilon", s.epsilon);
  f("lambda", s.lambda);
}

template <class F>
void for_fields(HierarchyExperiment& h, F&& f) {
  f("K1", h.levels.K1);
  f("m1", h.levels.m1);
  f("K2", h.levels.K2);
  f("m2", h.levels.m2);
  f("full_backprop", h.levels.full_backprop);
  f("init_restarts", h.levels.init_restarts);
  f("init_sample", h.levels.init_sample);
  f("corpus", h.corpus);
  f("settings", h.settings);
}

template <class F>
void for_fields(GradCheckOptions& g, F&& f) {
  f("instances", g.instances);
  f("corrupt", g.corrupt);
}

template <class T>
void Reader::read(const json& v, T& out, const std::string& path) {
  if constexpr (std::is_same_v<T, std::vector<std::pair<double, double>>>) {
    if (!v.is_array()) throw Error("config: " + path + " must be an array");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_object()) throw Error("config: " + path + " entries must be objects");
      Setting s;
      Reader r{x, path + "[]", {}};
      for_fields(s, r);
      r.finish();
      out.emplace_back(s.epsilon, s.lambda);
    }
  } else {
    if (!v.is_object()) throw Error("config: " + path + " must be an object");
    Reader r{v, path, {}};
    for_fields(out, r);
    r.finish();
  }
}

template <class T>
json Writer::write(const T& v) {
  json out = json::object();
  if constexpr (std::is_same_v<T, std::vector<std::pair<double, double>>>) {
    out = json::array();
    for (const auto& [e, l] : v) out.push_back({{"epsilon", e}, {"lambda", l}});
  } else {
    Writer w{out};
    for_fields(const_cast<T&>(v), w);
  }
  return out;
}

std::optional<ExperimentKind> kind_from_name(const std::string& s) {
  for (auto k : {ExperimentKind::Debris, ExperimentKind::Ablation, ExperimentKind::Vq,
                 ExperimentKind::Hierarchy, ExperimentKind::Gradcheck})
    if (experiment_name(k) == s) return k;
  return std::nullopt;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: top level must be an object");
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw Error("config: missing string key 'experiment'");
  const auto kind = kind_from_name(j["experiment"].get<std::string>());
  if (!kind) throw Error("config: unknown experiment '" + j["experiment"].get<std::string>() + "'");

  ExperimentConfig cfg;
  cfg.kind = *kind;
  const std::string section = experiment_name(cfg.kind);
  std::uint64_t seed = cfg.seed;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") continue;
    if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        throw Error("config: seed must be a non-negative integer");
      seed = value.get<std::uint64_t>();
    } else if (key == "output_dir") {
      if (!value.is_string()) throw Error("config: output_dir must be a string");
      cfg.output_dir = value.get<std::string>();
    } else if (key == "threads") {
      int t = 0;
      Reader::read(value, t, "threads");
      cfg.set_threads(t);
    } else if (key == "trainer") {
      if (cfg.kind == ExperimentKind::Gradcheck) throw Error("config: gradcheck takes no trainer");
      TrainerConfig* t = cfg.kind == ExperimentKind::Debris     ? &cfg.debris.trainer
                         : cfg.kind == ExperimentKind::Ablation ? &cfg.ablation.trainer
                         : cfg.kind == ExperimentKind::Vq       ? &cfg.vq.base.soft
                                                                : &cfg.hierarchy.trainer;
      Reader::read(value, *t, "trainer");
    } else if (key == section) {
      switch (cfg.kind) {
        case ExperimentKind::Debris: Reader::read(value, cfg.debris, key); break;
        case ExperimentKind::Ablation: Reader::read(value, cfg.ablation, key); break;
        case ExperimentKind::Vq: Reader::read(value, cfg.vq, key); break;
        case ExperimentKind::Hierarchy: Reader::read(value, cfg.hierarchy, key); break;
        case ExperimentKind::Gradcheck: Reader::read(value, cfg.gradcheck, key); break;
      }
    } else {
      throw Error("config: unknown key '" + key + "' for experiment " + section);
    }
  }
  cfg.set_seed(seed);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = experiment_name(cfg.kind);
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  if (cfg.output_dir) j["output_dir"] = *cfg.output_dir;
  switch (cfg.kind) {
    case ExperimentKind::Debris:
      j["trainer"] = Writer::write(cfg.debris.trainer);
      j["debris"] = Writer::write(cfg.debris);
      break;
    case ExperimentKind::Ablation:
      j["trainer"] = Writer::write(cfg.ablation.trainer);
      j["ablation"] = Writer::write(cfg.ablation);
      break;
    case ExperimentKind::Vq:
      j["trainer"] = Writer::write(cfg.vq.base.soft);
      j["vq"] = Writer::write(cfg.vq);
      break;
    case ExperimentKind::Hierarchy:
      j["trainer"] = Writer::write(cfg.hierarchy.trainer);
      j["hierarchy"] = Writer::write(cfg.hierarchy);
      break;
    case ExperimentKind::Gradcheck: j["gradcheck"] = Writer::write(cfg.gradcheck); break;
  }
  return j.dump(2);
}

}  // namespace ddcl

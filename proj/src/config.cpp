#include "cacl/config.hpp"

#include <fstream>
#include <set>

namespace cacl {

namespace {

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.contains(k)) throw ValidationError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(where + "." + key + ": " + e.what());
  }
}

SynthCamera camera_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"id", "shift", "shift_norm", "noise"});
  SynthCamera c;
  read(j, "id", c.id, where);
  read(j, "shift", c.shift, where);
  read(j, "shift_norm", c.shift_norm, where);
  read(j, "noise", c.noise, where);
  return c;
}

Json camera_to_json(const SynthCamera& c) {
  Json j{{"id", c.id}, {"shift_norm", c.shift_norm}, {"noise", c.noise}};
  if (!c.shift.empty()) j["shift"] = c.shift;
  return j;
}

std::string metric_name(DistanceMetric m) { return m == DistanceMetric::Euclidean ? "euclidean" : "euclidean_l2norm"; }

}  // namespace

SynthSpec synth_from_json(const Json& j) {
  const std::string w = "synth";
  check_keys(j, w,
             {"dim", "num_identities", "target_identities", "test_identities", "samples_per_identity_per_camera",
              "source_cameras", "target_cameras", "domain_offset", "domain_offset_norm", "identity_spread",
              "share_identities", "camera_bias", "bias_multipliers", "seed"});
  SynthSpec s = SynthSpec::defaults();
  read(j, "dim", s.dim, w);
  read(j, "num_identities", s.num_identities, w);
  read(j, "target_identities", s.target_identities, w);
  read(j, "test_identities", s.test_identities, w);
  read(j, "samples_per_identity_per_camera", s.samples_per_identity_per_camera, w);
  read(j, "domain_offset", s.domain_offset, w);
  read(j, "domain_offset_norm", s.domain_offset_norm, w);
  read(j, "identity_spread", s.identity_spread, w);
  read(j, "share_identities", s.share_identities, w);
  read(j, "camera_bias", s.camera_bias, w);
  read(j, "bias_multipliers", s.bias_multipliers, w);
  read(j, "seed", s.seed, w);
  for (const char* key : {"source_cameras", "target_cameras"}) {
    if (!j.contains(key)) continue;
    if (!j.at(key).is_array()) throw ValidationError(w + "." + key + ": expected an array");
    std::vector<SynthCamera> cams;
    for (std::size_t i = 0; i < j.at(key).size(); ++i) {
      cams.push_back(camera_from_json(j.at(key)[i], w + "." + key + "[" + std::to_string(i) + "]"));
    }
    (std::string(key) == "source_cameras" ? s.source_cameras : s.target_cameras) = std::move(cams);
  }
  s.validate();
  return s;
}

Json synth_to_json(const SynthSpec& s) {
  Json src = Json::array(), tgt = Json::array();
  for (const auto& c : s.source_cameras) src.push_back(camera_to_json(c));
  for (const auto& c : s.target_cameras) tgt.push_back(camera_to_json(c));
  return Json{{"dim", s.dim},
              {"num_identities", s.num_identities},
              {"target_identities", s.target_identities},
              {"test_identities", s.test_identities},
              {"samples_per_identity_per_camera", s.samples_per_identity_per_camera},
              {"source_cameras", src},
              {"target_cameras", tgt},
              {"domain_offset", s.domain_offset},
              {"domain_offset_norm", s.domain_offset_norm},
              {"identity_spread", s.identity_spread},
              {"share_identities", s.share_identities},
              {"camera_bias", s.camera_bias},
              {"bias_multipliers", s.bias_multipliers},
              {"seed", s.seed}};
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  synth.seed = s;
}

void RunConfig::validate() const {
  require(seed.has_value(), "config: seed is mandatory (set \"seed\" or pass --seed)");
  synth.validate();
  train.validate();
}

RunConfig config_from_json(const Json& j) {
  check_keys(j, "config",
             {"seed", "synth", "scenario", "kernel", "dbscan", "stage", "model", "schedule_mode", "camera_weights",
              "data", "out_dir"});
  RunConfig c;
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    read(j, "seed", s, "config");
    c.set_seed(s);
  }
  if (j.contains("synth")) {
    const auto seed_before = c.synth.seed;
    c.synth = synth_from_json(j.at("synth"));
    if (!j.at("synth").contains("seed")) c.synth.seed = seed_before;
  }
  if (j.contains("scenario")) {
    const auto s = j.at("scenario").get<std::string>();
    if (s == "camera_bias") {
      c.scenario = Scenario::CameraBias;
    } else if (s == "plain") {
      c.scenario = Scenario::Plain;
    } else {
      throw ValidationError("config.scenario: expected camera_bias or plain, got '" + s + "'");
    }
  }
  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    check_keys(k, "kernel", {"bandwidth", "bandwidth_mode", "max_samples_per_set", "seed"});
    read(k, "bandwidth", c.train.kernel.bandwidth, "kernel");
    read(k, "max_samples_per_set", c.train.kernel.max_samples_per_set, "kernel");
    read(k, "seed", c.train.kernel.seed, "kernel");
    if (k.contains("bandwidth_mode")) {
      const auto m = k.at("bandwidth_mode").get<std::string>();
      if (m == "fixed") {
        c.train.kernel.bandwidth_mode = BandwidthMode::Fixed;
      } else if (m == "median_heuristic") {
        c.train.kernel.bandwidth_mode = BandwidthMode::MedianHeuristic;
      } else {
        throw ValidationError("kernel.bandwidth_mode: expected fixed or median_heuristic");
      }
    }
  }
  if (j.contains("dbscan")) {
    const auto& d = j.at("dbscan");
    check_keys(d, "dbscan", {"eps", "min_pts", "metric", "eps_from_percentile", "eps_percentile"});
    read(d, "eps", c.train.dbscan.eps, "dbscan");
    read(d, "min_pts", c.train.dbscan.min_pts, "dbscan");
    read(d, "eps_from_percentile", c.train.dbscan.eps_from_percentile, "dbscan");
    read(d, "eps_percentile", c.train.dbscan.eps_percentile, "dbscan");
    if (d.contains("metric")) {
      const auto m = d.at("metric").get<std::string>();
      if (m == "euclidean_l2norm") {
        c.train.dbscan.metric = DistanceMetric::EuclideanL2Norm;
      } else if (m == "euclidean") {
        c.train.dbscan.metric = DistanceMetric::Euclidean;
      } else {
        throw ValidationError("dbscan.metric: expected euclidean_l2norm or euclidean");
      }
    }
  }
  if (j.contains("stage")) {
    const auto& s = j.at("stage");
    check_keys(s, "stage",
               {"epochs_per_stage", "final_stage_epochs", "recluster_every_epochs", "batch_source", "batch_target",
                "P", "K", "source_P", "source_K"});
    auto& st = c.train.stage;
    read(s, "epochs_per_stage", st.epochs_per_stage, "stage");
    read(s, "final_stage_epochs", st.final_stage_epochs, "stage");
    read(s, "recluster_every_epochs", st.recluster_every_epochs, "stage");
    read(s, "batch_source", st.batch_source, "stage");
    read(s, "batch_target", st.batch_target, "stage");
    read(s, "P", st.P, "stage");
    read(s, "K", st.K, "stage");
    read(s, "source_P", st.source_P, "stage");
    read(s, "source_K", st.source_K, "stage");
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "model",
               {"hidden", "embed_dim", "lr", "beta1", "beta2", "margin", "memory_capacity", "pretrain_epochs"});
    auto& mc = c.train.model;
    read(m, "hidden", mc.hidden, "model");
    read(m, "embed_dim", mc.embed_dim, "model");
    read(m, "lr", mc.lr, "model");
    read(m, "beta1", mc.beta1, "model");
    read(m, "beta2", mc.beta2, "model");
    read(m, "margin", mc.margin, "model");
    read(m, "memory_capacity", mc.memory_capacity, "model");
    read(m, "pretrain_epochs", mc.pretrain_epochs, "model");
  }
  if (j.contains("schedule_mode")) {
    const auto m = j.at("schedule_mode").get<std::string>();
    if (m == "mmd") {
      c.train.schedule_mode = ScheduleMode::Mmd;
    } else if (m == "random") {
      c.train.schedule_mode = ScheduleMode::Random;
    } else {
      throw ValidationError("config.schedule_mode: expected mmd or random, got '" + m + "'");
    }
  }
  read(j, "camera_weights", c.train.camera_weights, "config");
  if (j.contains("data")) {
    const auto& d = j.at("data");
    check_keys(d, "data", {"source", "target", "test", "checkpoint", "format"});
    read(d, "source", c.data.source, "data");
    read(d, "target", c.data.target, "data");
    read(d, "test", c.data.test, "data");
    read(d, "checkpoint", c.data.checkpoint, "data");
    if (d.contains("format")) c.data.format = format_from_string(d.at("format").get<std::string>());
  }
  read(j, "out_dir", c.out_dir, "config");
  c.train.validate();
  return c;
}

Json config_to_json(const RunConfig& c) {
  const auto& t = c.train;
  Json j;
  if (c.seed) j["seed"] = *c.seed;
  j["synth"] = synth_to_json(c.synth);
  j["scenario"] = c.scenario == Scenario::CameraBias ? "camera_bias" : "plain";
  j["kernel"] = {{"bandwidth", t.kernel.bandwidth},
                 {"bandwidth_mode", t.kernel.bandwidth_mode == BandwidthMode::Fixed ? "fixed" : "median_heuristic"},
                 {"max_samples_per_set", t.kernel.max_samples_per_set},
                 {"seed", t.kernel.seed}};
  j["dbscan"] = {{"eps", t.dbscan.eps},
                 {"min_pts", t.dbscan.min_pts},
                 {"metric", metric_name(t.dbscan.metric)},
                 {"eps_from_percentile", t.dbscan.eps_from_percentile},
                 {"eps_percentile", t.dbscan.eps_percentile}};
  j["stage"] = {{"epochs_per_stage", t.stage.epochs_per_stage},
                {"final_stage_epochs", t.stage.final_stage_epochs},
                {"recluster_every_epochs", t.stage.recluster_every_epochs},
                {"batch_source", t.stage.batch_source},
                {"batch_target", t.stage.batch_target},
                {"P", t.stage.P},
                {"K", t.stage.K},
                {"source_P", t.stage.source_P},
                {"source_K", t.stage.source_K}};
  j["model"] = {{"hidden", t.model.hidden},   {"embed_dim", t.model.embed_dim},
                {"lr", t.model.lr},           {"beta1", t.model.beta1},
                {"beta2", t.model.beta2},     {"margin", t.model.margin},
                {"memory_capacity", t.model.memory_capacity}, {"pretrain_epochs", t.model.pretrain_epochs}};
  j["schedule_mode"] = t.schedule_mode == ScheduleMode::Mmd ? "mmd" : "random";
  j["camera_weights"] = t.camera_weights;
  j["data"] = {{"source", c.data.source},
               {"target", c.data.target},
               {"test", c.data.test},
               {"checkpoint", c.data.checkpoint},
               {"format", c.data.format == FileFormat::Csv ? "csv" : "bin"}};
  if (!c.out_dir.empty()) j["out_dir"] = c.out_dir;
  return j;
}

Json read_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    return config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cacl

#include "cacl/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cacl/config.hpp"
#include "cacl/kernels.hpp"

namespace cacl::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct DataOptions {
  std::string source, target, test, checkpoint, format;
  std::string spec;
  std::string scenario;
  bool dry_run = false;
  bool raw = false;
};

void add_common(CLI::App* sub, CommonOptions& c, bool config_required = true) {
  auto* opt = sub->add_option("--config", c.config, "run configuration (JSON)");
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "override the configured seed");
  sub->add_option("--out", c.out, "output directory")->required();
}

RunConfig resolve_config(const CommonOptions& c) {
  RunConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  cfg.out_dir = c.out;
  cfg.validate();
  return cfg;
}

std::string pick(const std::string& flag, const std::string& from_config, const char* what) {
  const std::string p = flag.empty() ? from_config : flag;
  if (p.empty()) throw ValidationError(std::string("no ") + what + " path given (flag or config data." + what + ")");
  if (!fs::exists(p)) throw ValidationError(std::string(what) + " file not found: " + p);
  return p;
}

Dataset load(const std::string& path) { return load_dataset(path, format_from_path(path)); }

std::string ext(FileFormat f) { return f == FileFormat::Csv ? ".csv" : ".bin"; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

struct SynthPaths {
  std::string source, target, test;
};

SynthDomains make_domains(const SynthSpec& spec, Scenario scenario) {
  return scenario == Scenario::CameraBias ? camera_bias_scenario(spec) : generate_domains(spec);
}

SynthPaths write_synth(const SynthSpec& spec, Scenario scenario, const std::string& dir, FileFormat format) {
  ensure_dir(dir);
  const auto domains = make_domains(spec, scenario);
  SynthPaths p{(fs::path(dir) / ("source" + ext(format))).string(), (fs::path(dir) / ("target" + ext(format))).string(),
               (fs::path(dir) / ("test" + ext(format))).string()};
  save_dataset(domains.source, p.source, format);
  save_dataset(domains.target, p.target, format);
  if (!domains.test.empty()) save_dataset(domains.test, p.test, format);
  return p;
}

void print_plan(const RunConfig& cfg, const CurriculumSchedule& schedule, const std::vector<std::uint32_t>& order,
                const Dataset& target) {
  std::cout << schedule_to_json(schedule, order).dump(2) << '\n';
  const auto subsets = partition_by_camera(target);
  std::size_t active = 0;
  for (std::size_t c = 0; c < order.size(); ++c) {
    for (const auto& s : subsets) {
      if (s.camera == order[c]) active += s.indices.size();
    }
    const bool last = c + 1 == order.size();
    const std::size_t epochs = last ? cfg.train.stage.final_stage_epochs : cfg.train.stage.epochs_per_stage;
    const std::size_t epoch_len = (active + cfg.train.stage.batch_target - 1) / cfg.train.stage.batch_target;
    std::cout << "stage " << c + 1 << ": camera " << order[c] << ", active " << active << ", epochs " << epochs
              << ", steps " << epochs * epoch_len << ", weights " << (c == 0 || !cfg.train.camera_weights ? "omitted" : "on")
              << '\n';
  }
}

struct TrainOutputs {
  std::string checkpoint;
};

TrainOutputs do_train(const RunConfig& cfg, const Dataset& source, const Dataset& target, const Dataset* test,
                      bool dry_run) {
  const fs::path out(cfg.out_dir);
  if (dry_run) {
    TrainState state = init_state(source, cfg.train);
    pretrain_source(state, source, cfg.train);
    const auto schedule = schedule_from_encoder(state.encoder, source, target, cfg.train.kernel);
    const auto order = stage_order(schedule, cfg.train);
    print_plan(cfg, schedule, order, target);
    return {};
  }
  ensure_dir(cfg.out_dir);
  const auto result = run_curriculum(source, target, cfg.train, test);
  write_json(out / "schedule.json", schedule_to_json(result.report.schedule, result.report.stage_order));
  {
    std::ofstream rounds(out / "rounds.jsonl");
    if (!rounds) throw IoError("cannot write " + (out / "rounds.jsonl").string());
    for (const auto& r : result.report.rounds) rounds << round_to_json(r).dump() << '\n';
  }
  write_json(out / "train_report.json", Json{{"pretrain_accuracy", result.report.pretrain_accuracy},
                                             {"stage_order", result.report.stage_order},
                                             {"stage_evals", stage_evals_to_json(result.report.stage_evals)},
                                             {"warnings", result.report.warnings}});
  const auto ckpt = (out / "checkpoint.ckpt").string();
  save_checkpoint(result.state.checkpoint(), ckpt);
  for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';
  return {ckpt};
}

void do_eval(const std::string& checkpoint, const Dataset& test, const std::string& out_dir) {
  ensure_dir(out_dir);
  const auto ckpt = load_checkpoint(checkpoint);
  write_json(fs::path(out_dir) / "metrics.json", metrics_to_json(evaluate_encoder(ckpt.encoder, test)));
}

int dispatch(CLI::App& app, const CommonOptions& common, const DataOptions& opt) {
  kernels::apply_thread_env();
  const auto* used = app.get_subcommands().front();
  const std::string name = used->get_name();

  if (name == "gen-synth") {
    RunConfig cfg;
    if (!common.config.empty()) cfg = load_config(common.config);
    if (!opt.spec.empty()) {
      const auto seed_before = cfg.synth.seed;
      const Json j = read_json(opt.spec);
      cfg.synth = synth_from_json(j);
      if (!j.contains("seed")) cfg.synth.seed = seed_before;
    }
    if (common.seed) cfg.set_seed(*common.seed);
    if (!opt.scenario.empty()) {
      if (opt.scenario == "camera_bias") {
        cfg.scenario = Scenario::CameraBias;
      } else if (opt.scenario == "plain") {
        cfg.scenario = Scenario::Plain;
      } else {
        throw ValidationError("--scenario: expected camera_bias or plain");
      }
    }
    if (common.config.empty() && opt.spec.empty()) throw ValidationError("gen-synth needs --spec or --config");
    const FileFormat fmt = opt.format.empty() ? cfg.data.format : format_from_string(opt.format);
    cfg.synth.validate();
    write_synth(cfg.synth, cfg.scenario, common.out, fmt);
    return kExitOk;
  }

  const RunConfig cfg = resolve_config(common);

  if (name == "schedule") {
    const Dataset source = load(pick(opt.source, cfg.data.source, "source"));
    const Dataset target = load(pick(opt.target, cfg.data.target, "target"));
    CurriculumSchedule schedule;
    if (opt.raw) {
      std::vector<CameraFeatures> subsets;
      for (const auto& s : partition_by_camera(target)) subsets.push_back({s.camera, target.features(s.indices)});
      schedule = build_curriculum(source.features(), subsets, cfg.train.kernel);
    } else if (!opt.checkpoint.empty() || !cfg.data.checkpoint.empty()) {
      const auto ckpt = load_checkpoint(pick(opt.checkpoint, cfg.data.checkpoint, "checkpoint"));
      schedule = schedule_from_encoder(ckpt.encoder, source, target, cfg.train.kernel);
    } else {
      TrainState state = init_state(source, cfg.train);
      pretrain_source(state, source, cfg.train);
      schedule = schedule_from_encoder(state.encoder, source, target, cfg.train.kernel);
    }
    ensure_dir(cfg.out_dir);
    write_json(fs::path(cfg.out_dir) / "schedule.json", schedule_to_json(schedule));
    return kExitOk;
  }

  if (name == "cluster") {
    const Dataset target = load(pick(opt.target, cfg.data.target, "target"));
    Matrix feats = target.features();
    if (!opt.checkpoint.empty() || !cfg.data.checkpoint.empty()) {
      feats = embed(load_checkpoint(pick(opt.checkpoint, cfg.data.checkpoint, "checkpoint")).encoder, feats);
    }
    const auto assignment = dbscan(feats, cfg.train.dbscan);
    const auto cams = target.camera_labels();
    ensure_dir(cfg.out_dir);
    write_json(fs::path(cfg.out_dir) / "cluster.json", cluster_to_json(assignment, cams));
    return kExitOk;
  }

  if (name == "train") {
    const Dataset source = load(pick(opt.source, cfg.data.source, "source"));
    const Dataset target = load(pick(opt.target, cfg.data.target, "target"));
    std::optional<Dataset> test;
    const std::string test_path = opt.test.empty() ? cfg.data.test : opt.test;
    if (!test_path.empty()) test = load(pick(test_path, "", "test"));
    do_train(cfg, source, target, test ? &*test : nullptr, opt.dry_run);
    return kExitOk;
  }

  if (name == "eval") {
    const Dataset test = load(pick(opt.test, cfg.data.test, "test"));
    do_eval(pick(opt.checkpoint, cfg.data.checkpoint, "checkpoint"), test, cfg.out_dir);
    return kExitOk;
  }

  if (name == "run-all") {
    if (opt.dry_run) {
      const auto domains = make_domains(cfg.synth, cfg.scenario);
      do_train(cfg, domains.source, domains.target, &domains.test, true);
      return kExitOk;
    }
    const FileFormat fmt = opt.format.empty() ? cfg.data.format : format_from_string(opt.format);
    const auto paths = write_synth(cfg.synth, cfg.scenario, (fs::path(cfg.out_dir) / "data").string(), fmt);
    const Dataset source = load(paths.source);
    const Dataset target = load(paths.target);
    const Dataset test = load(paths.test);
    const auto outputs = do_train(cfg, source, target, &test, false);
    do_eval(outputs.checkpoint, test, cfg.out_dir);
    return kExitOk;
  }
  throw ValidationError("unknown subcommand " + name);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Camera-driven curriculum learning for unsupervised domain-adaptive re-identification", "cacl"};
  app.require_subcommand(1);
  CommonOptions common;
  DataOptions opt;

  auto* gen = app.add_subcommand("gen-synth", "generate synthetic source/target/test domains");
  add_common(gen, common, false);
  gen->add_option("--spec", opt.spec, "synthetic spec (JSON)");
  gen->add_option("--scenario", opt.scenario, "camera_bias or plain");
  gen->add_option("--format", opt.format, "csv or bin");

  auto* sched = app.add_subcommand("schedule", "compute the MMD curriculum schedule");
  add_common(sched, common);
  sched->add_option("--source", opt.source, "source dataset");
  sched->add_option("--target", opt.target, "target dataset");
  sched->add_option("--checkpoint", opt.checkpoint, "embed with this encoder instead of pretraining");
  sched->add_flag("--raw", opt.raw, "schedule on raw input features");

  auto* clus = app.add_subcommand("cluster", "DBSCAN pseudo labels and camera diagnostics");
  add_common(clus, common);
  clus->add_option("--target", opt.target, "target dataset");
  clus->add_option("--checkpoint", opt.checkpoint, "embed with this encoder before clustering");

  auto* train = app.add_subcommand("train", "pretrain, schedule and run the curriculum");
  add_common(train, common);
  train->add_option("--source", opt.source, "source dataset");
  train->add_option("--target", opt.target, "target dataset");
  train->add_option("--test", opt.test, "labelled target test set for per-stage evaluation");
  train->add_flag("--dry-run", opt.dry_run, "print the schedule and stage plan without training");

  auto* ev = app.add_subcommand("eval", "cross-camera retrieval metrics of a checkpoint");
  add_common(ev, common);
  ev->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
  ev->add_option("--test", opt.test, "labelled test dataset");

  auto* all = app.add_subcommand("run-all", "gen-synth, schedule, train and eval in one go");
  add_common(all, common);
  all->add_option("--format", opt.format, "dataset format for generated data (csv or bin)");
  all->add_flag("--dry-run", opt.dry_run, "print the schedule and stage plan without training");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitValidation;
  }

  try {
    return dispatch(app, common, opt);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace cacl::cli

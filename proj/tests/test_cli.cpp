#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cacl/config.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "cacl_cli_test";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" CACL_CLI_PATH "\" " + args + " > \"" + (kWork / "stdout.txt").string() +
                          "\" 2> \"" + (kWork / "stderr.txt").string() + "\"";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Tiny problem so every subcommand finishes in well under a second.
std::string write_config(const std::string& name, const std::string& extra = "") {
  const auto p = kWork / name;
  std::ofstream(p) << R"({
  "seed": 3,
  "synth": {"dim": 8, "num_identities": 6, "target_identities": 6, "test_identities": 4,
            "samples_per_identity_per_camera": 5},
  "model": {"hidden": 16, "embed_dim": 8, "pretrain_epochs": 2},
  "stage": {"epochs_per_stage": 1, "final_stage_epochs": 2, "recluster_every_epochs": 1,
            "batch_target": 16, "P": 4, "K": 4, "batch_source": 16, "source_P": 4, "source_K": 4}
  )" + extra + "}";
  return p.string();
}

struct Fixture {
  Fixture() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "usage errors exit 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("run-all --bogus") == 1);
  CHECK(slurp(kWork / "stderr.txt").find("Usage") != std::string::npos);
  CHECK(run("--help") == 0);
}

TEST_CASE_FIXTURE(Fixture, "validation errors exit 1") {
  const auto out = (kWork / "o").string();
  CHECK(run("run-all --config " + (kWork / "missing.json").string() + " --out " + out) == 1);
  const auto noseed = kWork / "noseed.json";
  std::ofstream(noseed) << "{}";
  CHECK(run("run-all --config " + noseed.string() + " --out " + out) == 1);
  CHECK(run("run-all --config " + write_config("bad.json", R"(, "colour": 1)") + " --out " + out) == 1);
  CHECK(run("run-all --config " + write_config("c.json") + " --out " + out, "CACL_THREADS=many") == 1);
  CHECK(run("eval --config " + write_config("c.json") + " --out " + out + " --test nope.bin --checkpoint x.ckpt") == 1);
}

TEST_CASE_FIXTURE(Fixture, "malformed inputs exit 1, runtime failures exit 2") {
  const auto garbage = kWork / "garbage.ckpt";
  std::ofstream(garbage) << "not a checkpoint";
  const auto cfg = write_config("c.json");
  REQUIRE(run("gen-synth --config " + cfg + " --out " + (kWork / "data").string()) == 0);
  CHECK(run("eval --config " + cfg + " --out " + (kWork / "o").string() + " --test " +
            (kWork / "data" / "test.bin").string() + " --checkpoint " + garbage.string()) == 1);
  // Output directory below a regular file cannot be created.
  CHECK(run("run-all --config " + cfg + " --out " + (garbage / "sub").string()) == 2);
}

TEST_CASE_FIXTURE(Fixture, "subcommands chain") {
  const auto cfg = write_config("c.json");
  const auto data = kWork / "data";
  REQUIRE(run("gen-synth --config " + cfg + " --out " + data.string() + " --format csv") == 0);
  CHECK(fs::exists(data / "source.csv"));
  CHECK(fs::exists(data / "target.csv"));
  CHECK(fs::exists(data / "test.csv"));
  const std::string io =
      " --source " + (data / "source.csv").string() + " --target " + (data / "target.csv").string();

  REQUIRE(run("schedule --config " + cfg + " --out " + (kWork / "s").string() + io + " --raw") == 0);
  const auto sched = cacl::read_json(kWork / "s" / "schedule.json");
  CHECK(sched.at("entries").size() == 3);

  REQUIRE(run("train --config " + cfg + " --out " + (kWork / "dry").string() + io + " --dry-run") == 0);
  CHECK(slurp(kWork / "stdout.txt").find("stage 3") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "dry"));

  REQUIRE(run("train --config " + cfg + " --out " + (kWork / "t").string() + io) == 0);
  for (const char* f : {"schedule.json", "rounds.jsonl", "checkpoint.ckpt", "train_report.json"}) {
    CHECK(fs::exists(kWork / "t" / f));
  }
  const auto ckpt = (kWork / "t" / "checkpoint.ckpt").string();

  REQUIRE(run("cluster --config " + cfg + " --out " + (kWork / "c").string() + " --target " +
              (data / "target.csv").string() + " --checkpoint " + ckpt) == 0);
  const auto cl = cacl::read_json(kWork / "c" / "cluster.json");
  CHECK(cl.at("labels").size() == 90);

  REQUIRE(run("eval --config " + cfg + " --out " + (kWork / "e").string() + " --test " +
              (data / "test.csv").string() + " --checkpoint " + ckpt) == 0);
  const auto m = cacl::read_json(kWork / "e" / "metrics.json");
  CHECK(m.at("mAP").get<double>() > 0.0);
  CHECK(m.at("cmc").contains("1"));
}

TEST_CASE_FIXTURE(Fixture, "run-all with a seed override") {
  const auto cfg = write_config("c.json");
  REQUIRE(run("run-all --config " + cfg + " --seed 11 --out " + (kWork / "a").string(), "CACL_THREADS=1") == 0);
  for (const char* f : {"schedule.json", "rounds.jsonl", "checkpoint.ckpt", "metrics.json"}) {
    CHECK(fs::exists(kWork / "a" / f));
  }
  REQUIRE(run("run-all --config " + cfg + " --seed 12 --out " + (kWork / "b").string()) == 0);
  CHECK(slurp(kWork / "a" / "rounds.jsonl") != slurp(kWork / "b" / "rounds.jsonl"));
}

TEST_CASE_FIXTURE(Fixture, "run-all dry run writes nothing") {
  const auto cfg = write_config("c.json");
  REQUIRE(run("run-all --config " + cfg + " --out " + (kWork / "d").string() + " --dry-run") == 0);
  CHECK(slurp(kWork / "stdout.txt").find("stage 1") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "d"));
}

TEST_CASE_FIXTURE(Fixture, "run-all output does not depend on the thread count") {
  const auto cfg = write_config("c.json");
  REQUIRE(run("run-all --config " + cfg + " --out " + (kWork / "t1").string(), "CACL_THREADS=1") == 0);
  REQUIRE(run("run-all --config " + cfg + " --out " + (kWork / "t3").string(), "CACL_THREADS=3") == 0);
  for (const char* f : {"schedule.json", "rounds.jsonl", "train_report.json", "metrics.json", "checkpoint.ckpt"}) {
    CHECK(slurp(kWork / "t1" / f) == slurp(kWork / "t3" / f));
  }
}

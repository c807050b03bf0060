#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cacl/config.hpp"
#include "cacl/error.hpp"

using namespace cacl;
namespace fs = std::filesystem;

TEST_CASE("defaults and overrides") {
  const auto c = config_from_json(Json::parse(R"({
    "seed": 4,
    "scenario": "plain",
    "kernel": {"bandwidth_mode": "fixed", "bandwidth": 2.5},
    "dbscan": {"eps": 0.2, "min_pts": 3, "metric": "euclidean"},
    "stage": {"epochs_per_stage": 2},
    "model": {"embed_dim": 16, "pretrain_epochs": 5},
    "schedule_mode": "random",
    "camera_weights": false,
    "synth": {"dim": 6}
  })"));
  CHECK(c.seed == 4u);
  CHECK(c.train.seed == 4u);
  CHECK(c.synth.seed == 4u);
  CHECK(c.scenario == Scenario::Plain);
  CHECK(c.train.kernel.bandwidth_mode == BandwidthMode::Fixed);
  CHECK(c.train.kernel.bandwidth == 2.5);
  CHECK(c.train.dbscan.metric == DistanceMetric::Euclidean);
  CHECK(c.train.stage.epochs_per_stage == 2);
  CHECK(c.train.stage.final_stage_epochs == 30);
  CHECK(c.train.model.embed_dim == 16);
  CHECK(c.train.schedule_mode == ScheduleMode::Random);
  CHECK_FALSE(c.train.camera_weights);
  CHECK(c.synth.dim == 6);
  CHECK(c.synth.target_cameras.size() == 3);
}

TEST_CASE("json round trip") {
  auto c = config_from_json(Json::parse(R"({"seed": 9, "dbscan": {"eps_from_percentile": true}})"));
  const auto j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"seed": 1, "sede": 2})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"dbscan": {"epsilon": 1}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"schedule_mode": "sorted"})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"seed": "one"})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"synth": {"target_cameras": [{"id": 1, "colour": 2}]}})")),
                  ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"([1, 2])")), ValidationError);
}

TEST_CASE("seed is mandatory once resolved") {
  RunConfig c = config_from_json(Json::object());
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.set_seed(3);
  CHECK_NOTHROW(c.validate());
  CHECK(c.train.seed == 3);
  CHECK(c.synth.seed == 3);
}

TEST_CASE("load_config reports the path") {
  const auto missing = fs::temp_directory_path() / "cacl_no_such_config.json";
  try {
    load_config(missing);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
  }
  const auto bad = fs::temp_directory_path() / "cacl_bad_config.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(load_config(bad), ValidationError);
  fs::remove(bad);
}

TEST_CASE("report json has sorted keys and exact doubles") {
  RetrievalMetrics m;
  m.mAP = 0.1 + 0.2;
  m.cmc = {{1, 0.5}, {10, 1.0}, {5, 0.75}};
  m.num_valid_queries = 4;
  const auto j = metrics_to_json(m);
  CHECK(j.at("mAP").get<double>() == m.mAP);
  CHECK(j.dump() == Json::parse(j.dump()).dump());
  CHECK(j.dump().find("\"cmc\"") < j.dump().find("\"mAP\""));
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cacl/synth.hpp"
#include "cacl/trainer.hpp"

namespace cacl {

using Json = nlohmann::json;

enum class Scenario { Plain, CameraBias };

struct DataPaths {
  std::string source;
  std::string target;
  std::string test;
  std::string checkpoint;
  FileFormat format = FileFormat::Bin;
};

// Everything one CLI invocation needs. Unknown keys are rejected.
struct RunConfig {
  SynthSpec synth = SynthSpec::defaults();
  Scenario scenario = Scenario::CameraBias;
  TrainConfig train;
  DataPaths data;
  std::optional<std::uint64_t> seed;  // mandatory once resolved
  std::string out_dir;

  // Applies a seed override to the run and the synthetic generator.
  void set_seed(std::uint64_t s);
  void validate() const;
};

RunConfig config_from_json(const Json& j);
Json config_to_json(const RunConfig& cfg);
// Throws ValidationError naming the path when it is missing or malformed.
RunConfig load_config(const std::filesystem::path& path);

SynthSpec synth_from_json(const Json& j);
Json synth_to_json(const SynthSpec& s);

// Report serialization. Doubles are written with round-trip precision and
// object keys in sorted order, so identical inputs give identical bytes.
Json schedule_to_json(const CurriculumSchedule& schedule);
Json schedule_to_json(const CurriculumSchedule& schedule, const std::vector<std::uint32_t>& stage_order);
Json cluster_to_json(const ClusterAssignment& assignment, std::span<const std::uint32_t> cameras);
Json round_to_json(const RoundRecord& r);
Json metrics_to_json(const RetrievalMetrics& m);
Json stage_evals_to_json(const std::vector<StageEval>& evals);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace cacl

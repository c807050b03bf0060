#include "cacl/config.hpp"

namespace cacl {

Json schedule_to_json(const CurriculumSchedule& schedule) {
  Json entries = Json::array();
  for (const auto& e : schedule.entries) entries.push_back({{"camera", e.camera}, {"mmd_sq", e.mmd_sq}});
  return Json{{"sigma", schedule.sigma}, {"entries", entries}};
}

Json schedule_to_json(const CurriculumSchedule& schedule, const std::vector<std::uint32_t>& stage_order) {
  Json j = schedule_to_json(schedule);
  j["stage_order"] = stage_order;
  return j;
}

namespace {

Json histogram_to_json(const std::map<std::size_t, std::size_t>& hist) {
  Json j = Json::object();
  for (const auto& [k, v] : hist) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

Json cluster_to_json(const ClusterAssignment& a, std::span<const std::uint32_t> cameras) {
  return Json{{"labels", a.labels},
              {"num_clusters", a.num_clusters},
              {"noise", a.noise_count()},
              {"eps", a.eps_used},
              {"single_camera_fraction", single_camera_cluster_fraction(a, cameras)},
              {"unique_camera_histogram", histogram_to_json(unique_camera_histogram(a, cameras))}};
}

Json round_to_json(const RoundRecord& r) {
  Json weights = Json::array();
  for (const auto& c : r.weight_table) {
    Json counts = Json::object();
    for (const auto& [cam, n] : c.camera_counts) counts[std::to_string(cam)] = n;
    weights.push_back({{"camera_counts", counts}, {"entropy", c.entropy}, {"weight", c.weight}});
  }
  return Json{{"stage", r.stage},
              {"round", r.round},
              {"step", r.step},
              {"active_size", r.active_size},
              {"active_cameras", r.active_cameras},
              {"num_clusters", r.num_clusters},
              {"noise", r.noise},
              {"eps", r.eps},
              {"single_camera_fraction", r.single_camera_fraction},
              {"unique_camera_histogram", histogram_to_json(r.camera_histogram)},
              {"weighted", r.weighted},
              {"target_skipped", r.target_skipped},
              {"mean_weight", r.mean_weight},
              {"zero_weight_clusters", r.zero_weight_clusters},
              {"weight_table", weights},
              {"losses",
               {{"total", r.losses.total},
                {"source_ce", r.losses.source_ce},
                {"target_ce", r.losses.target_ce},
                {"target_triplet", r.losses.target_triplet},
                {"steps", r.losses.steps}}}};
}

Json metrics_to_json(const RetrievalMetrics& m) {
  Json cmc = Json::object();
  for (const auto& [k, v] : m.cmc) cmc[std::to_string(k)] = v;
  return Json{{"mAP", m.mAP}, {"cmc", cmc}, {"num_valid_queries", m.num_valid_queries}};
}

Json stage_evals_to_json(const std::vector<StageEval>& evals) {
  Json j = Json::array();
  for (const auto& e : evals) j.push_back({{"stage", e.stage}, {"camera", e.camera}, {"metrics", metrics_to_json(e.metrics)}});
  return j;
}

}  // namespace cacl

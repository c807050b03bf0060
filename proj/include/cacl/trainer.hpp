#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cacl/camera_diversity.hpp"
#include "cacl/clustering.hpp"
#include "cacl/datamodel.hpp"
#include "cacl/eval.hpp"
#include "cacl/mmd.hpp"
#include "cacl/model.hpp"
#include "cacl/rng.hpp"

namespace cacl {

struct StageConfig {
  std::size_t epochs_per_stage = 4;
  std::size_t final_stage_epochs = 30;
  std::size_t recluster_every_epochs = 3;
  std::size_t batch_source = 64;
  std::size_t batch_target = 64;
  std::size_t P = 16;  // pseudo-ids per target batch
  std::size_t K = 4;   // instances per pseudo-id
  std::size_t source_P = 16;
  std::size_t source_K = 4;

  void validate() const;
};

struct ModelConfig {
  std::size_t hidden = 64;  // 0 = single affine layer
  std::size_t embed_dim = 32;
  double lr = 3.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double margin = 0.3;
  std::size_t memory_capacity = 512;
  std::size_t pretrain_epochs = 30;

  void validate() const;
};

enum class ScheduleMode { Mmd, Random };

struct TrainConfig {
  StageConfig stage;
  ModelConfig model;
  KernelConfig kernel;
  DbscanConfig dbscan;
  ScheduleMode schedule_mode = ScheduleMode::Mmd;
  // false trains every stage with all cluster weights fixed at 1.
  bool camera_weights = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossTotals {
  double total = 0.0;
  double source_ce = 0.0;
  double target_ce = 0.0;
  double target_triplet = 0.0;
  std::size_t steps = 0;

  void add(const LossTotals& step);
  LossTotals mean() const;
};

// One re-clustering round.
struct RoundRecord {
  std::size_t stage = 0;   // 1-based curriculum stage
  std::size_t round = 0;   // 0-based round within the stage
  std::size_t step = 0;    // global optimizer step at which the round began
  std::size_t active_size = 0;
  std::size_t active_cameras = 0;
  std::size_t num_clusters = 0;
  std::size_t noise = 0;
  double eps = 0.0;
  double single_camera_fraction = 0.0;
  std::map<std::size_t, std::size_t> camera_histogram;
  bool weighted = false;        // cluster weights applied (false on the first stage)
  bool target_skipped = false;  // clustering found no clusters
  double mean_weight = 0.0;     // mean of the weights actually used
  std::size_t zero_weight_clusters = 0;
  std::vector<ClusterWeight> weight_table;
  LossTotals losses;            // per-step means over the round
};

struct StageEval {
  std::size_t stage = 0;
  std::uint32_t camera = 0;  // camera added at this stage
  RetrievalMetrics metrics;
};

struct TrainReport {
  CurriculumSchedule schedule;
  std::vector<std::uint32_t> stage_order;
  std::vector<RoundRecord> rounds;
  std::vector<StageEval> stage_evals;
  std::vector<std::string> warnings;
  double pretrain_accuracy = 0.0;
};

// Append-only record stream. The trainer appends; any thread may drain.
class ReportChannel {
 public:
  void append(RoundRecord r);
  std::vector<RoundRecord> drain();

 private:
  std::mutex mu_;
  std::vector<RoundRecord> pending_;
};

struct TrainState {
  EncoderParams encoder;
  AdamState encoder_opt;
  Dense source_head;
  AdamState source_opt;
  std::vector<std::int64_t> source_classes;  // source identity of each head output
  std::optional<Dense> target_head;
  AdamState target_opt;
  std::size_t stage = 0;            // stages completed
  std::size_t global_step = 0;
  std::vector<std::size_t> active;  // target indices, ascending
  PseudoLabelTable labels;
  ClusterWeightTable weight_table;
  std::vector<double> weights;      // weights in force (all 1 when omitted)
  CrossBatchMemory memory;
  Rng rng;

  Checkpoint checkpoint() const;
};

// Fresh encoder and source head drawn from a generator seeded by cfg.seed.
TrainState init_state(const Dataset& source, const TrainConfig& cfg);

// Unweighted cross-entropy + batch-hard triplet on source identities for
// cfg.model.pretrain_epochs epochs. A single source identity trains CE only.
void pretrain_source(TrainState& state, const Dataset& source, const TrainConfig& cfg, TrainReport* report = nullptr);

// Fraction of source samples the source head classifies correctly.
double source_accuracy(const TrainState& state, const Dataset& source);

// L2-normalized encoder embeddings, the space used for clustering,
// scheduling and retrieval.
Matrix embed(const EncoderParams& encoder, const Matrix& features);

struct Batch {
  std::vector<std::size_t> source;         // source dataset indices
  std::vector<std::size_t> source_labels;  // source head classes
  std::vector<std::size_t> target;         // target dataset indices
  std::vector<std::size_t> target_labels;  // pseudo labels
};

// P x K groups: groups with fewer than K members are drawn with replacement;
// with fewer than P groups, groups repeat. `source_labels` holds the source
// class of every source sample.
Batch sample_batch(std::span<const std::size_t> source_labels, std::size_t source_classes,
                   const PseudoLabelTable& pseudo_labels, const StageConfig& cfg, Rng& rng);

// MMD schedule on current embeddings of the source and each target camera.
CurriculumSchedule schedule_from_encoder(const EncoderParams& encoder, const Dataset& source, const Dataset& target,
                                         const KernelConfig& cfg);

struct StageContext {
  const Dataset& source;
  const Dataset& target;
  const TrainConfig& cfg;
  TrainReport* report = nullptr;
  ReportChannel* channel = nullptr;
};

// One curriculum stage over state.active. Re-clusters at step 0 and every
// recluster_every_epochs epochs; the first stage trains with all weights 1.
void run_stage(TrainState& state, const StageContext& ctx, std::size_t epochs, bool is_first_stage);

// Random mode shuffles with its own generator (seed ^ kStageOrderSalt) so the
// training stream is the same in both modes and only the order differs.
inline constexpr std::uint64_t kStageOrderSalt = 0x9e3779b97f4a7c15ULL;
std::vector<std::uint32_t> stage_order(const CurriculumSchedule& schedule, const TrainConfig& cfg);

struct CurriculumResult {
  TrainState state;
  TrainReport report;
};

// Pretrain, schedule, then one stage per target camera in schedule order.
// When `eval_set` is given its raw features are embedded and evaluated after
// every stage.
CurriculumResult run_curriculum(const Dataset& source, const Dataset& target, const TrainConfig& cfg,
                                const Dataset* eval_set = nullptr, ReportChannel* channel = nullptr);

// Cross-camera retrieval metrics of the encoder on a labelled dataset, using
// split_query_gallery.
RetrievalMetrics evaluate_encoder(const EncoderParams& encoder, const Dataset& data);

}  // namespace cacl

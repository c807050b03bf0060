#include "cacl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace cacl {

void StageConfig::validate() const {
  require(epochs_per_stage >= 1 && final_stage_epochs >= 1, "stage epochs must be >= 1");
  require(recluster_every_epochs >= 1, "recluster_every_epochs must be >= 1");
  require(P >= 1 && K >= 1 && P * K == batch_target, "P * K must equal batch_target");
  require(source_P >= 1 && source_K >= 1 && source_P * source_K == batch_source,
          "source_P * source_K must equal batch_source");
}

void ModelConfig::validate() const {
  require(embed_dim >= 1, "embed_dim must be >= 1");
  require(lr > 0.0, "lr must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "adam betas must be in [0, 1)");
  require(margin >= 0.0, "triplet margin must be >= 0");
}

void TrainConfig::validate() const {
  stage.validate();
  model.validate();
  kernel.validate();
  dbscan.validate();
}

void LossTotals::add(const LossTotals& s) {
  total += s.total;
  source_ce += s.source_ce;
  target_ce += s.target_ce;
  target_triplet += s.target_triplet;
  steps += s.steps;
}

LossTotals LossTotals::mean() const {
  if (steps == 0) return *this;
  const double n = static_cast<double>(steps);
  return {total / n, source_ce / n, target_ce / n, target_triplet / n, steps};
}

void ReportChannel::append(RoundRecord r) {
  std::lock_guard lock(mu_);
  pending_.push_back(std::move(r));
}

std::vector<RoundRecord> ReportChannel::drain() {
  std::lock_guard lock(mu_);
  std::vector<RoundRecord> out;
  out.swap(pending_);
  return out;
}

Checkpoint TrainState::checkpoint() const {
  Checkpoint c;
  c.encoder = encoder;
  c.encoder_opt = encoder_opt;
  c.source_head = source_head;
  c.source_opt = source_opt;
  c.target_head = target_head;
  c.target_opt = target_opt;
  c.stage = static_cast<std::uint32_t>(stage);
  return c;
}

namespace {

std::vector<std::size_t> source_class_labels(const Dataset& source, const std::vector<std::int64_t>& classes) {
  std::vector<std::size_t> out;
  out.reserve(source.size());
  for (const auto& r : source.records()) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), *r.identity);
    out.push_back(static_cast<std::size_t>(it - classes.begin()));
  }
  return out;
}

// Groups of dataset indices per class, classes ascending.
std::vector<std::vector<std::size_t>> group_by_label(std::span<const std::size_t> samples,
                                                     std::span<const std::size_t> labels, std::size_t classes) {
  std::vector<std::vector<std::size_t>> groups(classes);
  for (std::size_t i = 0; i < samples.size(); ++i) groups[labels[i]].push_back(samples[i]);
  return groups;
}

// P x K draw over non-empty groups.
void draw_pk(const std::vector<std::vector<std::size_t>>& groups, std::size_t P, std::size_t K, Rng& rng,
             std::vector<std::size_t>& out_idx, std::vector<std::size_t>& out_lbl) {
  std::vector<std::size_t> nonempty;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (!groups[g].empty()) nonempty.push_back(g);
  }
  require(!nonempty.empty(), "sample_batch: no samples to draw from");
  std::vector<std::size_t> chosen;
  while (chosen.size() < P) {
    const std::size_t need = P - chosen.size();
    for (std::size_t pick : rng.sample_without_replacement(nonempty.size(), std::min(need, nonempty.size()))) {
      chosen.push_back(nonempty[pick]);
    }
  }
  for (std::size_t g : chosen) {
    const auto& members = groups[g];
    if (members.size() >= K) {
      for (std::size_t pick : rng.sample_without_replacement(members.size(), K)) {
        out_idx.push_back(members[pick]);
        out_lbl.push_back(g);
      }
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        out_idx.push_back(members[rng.index(members.size())]);
        out_lbl.push_back(g);
      }
    }
  }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw RuntimeError(std::string("non-finite ") + what);
}

Matrix concat_rows(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols() || a.rows() == 0 || b.rows() == 0, "concat_rows: dimension mismatch");
  const std::size_t cols = a.rows() > 0 ? a.cols() : b.cols();
  Matrix out(a.rows() + b.rows(), cols);
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t end) {
  Matrix out(end - begin, m.cols());
  std::copy(m.data().begin() + static_cast<std::ptrdiff_t>(begin * m.cols()),
            m.data().begin() + static_cast<std::ptrdiff_t>(end * m.cols()), out.data().begin());
  return out;
}

struct StepInputs {
  const Matrix* source_x = nullptr;
  std::span<const std::size_t> source_labels;
  const Matrix* target_x = nullptr;  // null: source term only
  std::span<const std::size_t> target_labels;
  std::span<const double> weights;
  bool source_triplet = false;  // pretraining adds a batch-hard triplet on source ids
};

// One optimizer step of L = CE_source [+ triplet_source] [+ CD-CE + CD-triplet].
LossTotals train_step(TrainState& state, const StepInputs& in, const ModelConfig& mc) {
  const std::size_t bs = in.source_x->rows();
  const Matrix x = in.target_x != nullptr ? concat_rows(*in.source_x, *in.target_x) : *in.source_x;
  EncoderCache enc_cache;
  const Matrix emb = encoder_forward(state.encoder, x, &enc_cache);
  Matrix grad_emb(emb.rows(), emb.cols());
  LossTotals step;
  step.steps = 1;

  const Matrix emb_s = slice_rows(emb, 0, bs);
  const Matrix logits_s = dense_forward(state.source_head, emb_s);
  const std::vector<double> ones_s(state.source_head.out_dim(), 1.0);
  const auto ce_s = cd_cross_entropy(logits_s, in.source_labels, ones_s);
  step.source_ce = ce_s.value;
  Matrix grad_es;
  const Dense g_src_head = dense_backward(state.source_head, emb_s, ce_s.grad, &grad_es);
  if (in.source_triplet) {
    NormalizeCache nc;
    const Matrix ns = normalize_forward(emb_s, &nc);
    const auto tri = cd_triplet(ns, in.source_labels, ones_s, mc.margin, &state.memory);
    step.target_triplet = tri.value;  // reported in the triplet slot during pretraining
    const Matrix g = normalize_backward(nc, tri.grad);
    for (std::size_t i = 0; i < g.size(); ++i) grad_es.data()[i] += g.data()[i];
    state.memory.push(ns, in.source_labels);
  }
  std::copy(grad_es.data().begin(), grad_es.data().end(), grad_emb.data().begin());

  std::optional<Dense> g_tgt_head;
  if (in.target_x != nullptr) {
    const Matrix emb_t = slice_rows(emb, bs, emb.rows());
    const Matrix logits_t = dense_forward(*state.target_head, emb_t);
    const auto ce_t = cd_cross_entropy(logits_t, in.target_labels, in.weights);
    Matrix grad_et;
    g_tgt_head = dense_backward(*state.target_head, emb_t, ce_t.grad, &grad_et);
    NormalizeCache nc;
    const Matrix nt = normalize_forward(emb_t, &nc);
    const auto tri = cd_triplet(nt, in.target_labels, in.weights, mc.margin, &state.memory);
    const Matrix g = normalize_backward(nc, tri.grad);
    for (std::size_t i = 0; i < g.size(); ++i) grad_et.data()[i] += g.data()[i];
    std::copy(grad_et.data().begin(), grad_et.data().end(),
              grad_emb.data().begin() + static_cast<std::ptrdiff_t>(bs * emb.cols()));
    step.target_ce = ce_t.value;
    step.target_triplet = tri.value;
    state.memory.push(nt, in.target_labels);
  }
  step.total = step.source_ce + step.target_ce + step.target_triplet;
  check_finite(step.total, "training loss");

  const EncoderGrads g_enc = encoder_backward(state.encoder, enc_cache, grad_emb);
  adam_update(state.encoder_opt, state.encoder, g_enc);
  adam_update(state.source_opt, state.source_head, g_src_head);
  if (g_tgt_head) adam_update(state.target_opt, *state.target_head, *g_tgt_head);
  ++state.global_step;
  return step;
}

}  // namespace

TrainState init_state(const Dataset& source, const TrainConfig& cfg) {
  cfg.validate();
  require(!source.empty(), "empty source dataset");
  TrainState s;
  s.rng = Rng(cfg.seed);
  std::set<std::int64_t> ids;
  for (const auto& r : source.records()) {
    require(r.identity.has_value(), "source record without identity");
    ids.insert(*r.identity);
  }
  s.source_classes.assign(ids.begin(), ids.end());
  s.encoder = make_encoder(source.dim(), cfg.model.hidden, cfg.model.embed_dim, s.rng);
  s.source_head = make_dense(cfg.model.embed_dim, s.source_classes.size(), s.rng);
  s.encoder_opt = make_adam(cfg.model.lr, cfg.model.beta1, cfg.model.beta2);
  s.source_opt = make_adam(cfg.model.lr, cfg.model.beta1, cfg.model.beta2);
  s.memory = CrossBatchMemory(cfg.model.memory_capacity);
  return s;
}

Matrix embed(const EncoderParams& encoder, const Matrix& features) {
  return normalize_forward(encoder_forward(encoder, features));
}

void pretrain_source(TrainState& state, const Dataset& source, const TrainConfig& cfg, TrainReport* report) {
  const auto labels = source_class_labels(source, state.source_classes);
  std::vector<std::size_t> all(source.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  PseudoLabelTable table{all, labels, state.source_classes.size()};
  const bool triplet = state.source_classes.size() >= 2;
  if (!triplet && report != nullptr) report->warnings.push_back("single source identity: pretraining with CE only");

  StageConfig sc = cfg.stage;
  const std::size_t steps = cfg.model.pretrain_epochs * ceil_div(source.size(), sc.batch_source);
  const Matrix feats = source.features();
  state.memory.clear();
  for (std::size_t it = 0; it < steps; ++it) {
    std::vector<std::size_t> idx, lbl;
    draw_pk(group_by_label(table.samples, table.labels, table.num_classes), sc.source_P, sc.source_K, state.rng, idx,
            lbl);
    const Matrix x = feats.gather_rows(idx);
    StepInputs in;
    in.source_x = &x;
    in.source_labels = lbl;
    in.source_triplet = triplet;
    train_step(state, in, cfg.model);
  }
  state.memory.clear();
}

double source_accuracy(const TrainState& state, const Dataset& source) {
  if (source.empty()) return 0.0;
  const auto labels = source_class_labels(source, state.source_classes);
  const Matrix logits = dense_forward(state.source_head, encoder_forward(state.encoder, source.features()));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto r = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

Batch sample_batch(std::span<const std::size_t> source_labels, std::size_t source_classes,
                   const PseudoLabelTable& pseudo_labels, const StageConfig& cfg, Rng& rng) {
  require(!pseudo_labels.empty(), "sample_batch: empty active set");
  std::vector<std::size_t> all(source_labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Batch b;
  draw_pk(group_by_label(all, source_labels, source_classes), cfg.source_P, cfg.source_K, rng, b.source,
          b.source_labels);
  draw_pk(group_by_label(pseudo_labels.samples, pseudo_labels.labels, pseudo_labels.num_classes), cfg.P, cfg.K, rng,
          b.target, b.target_labels);
  return b;
}

CurriculumSchedule schedule_from_encoder(const EncoderParams& encoder, const Dataset& source, const Dataset& target,
                                         const KernelConfig& cfg) {
  const Matrix src = embed(encoder, source.features());
  std::vector<CameraFeatures> subsets;
  for (const auto& s : partition_by_camera(target)) {
    subsets.push_back({s.camera, embed(encoder, target.features(s.indices))});
  }
  return build_curriculum(src, subsets, cfg);
}

namespace {

void recluster(TrainState& state, const StageContext& ctx, bool is_first_stage, RoundRecord& rec) {
  const Matrix emb = embed(state.encoder, ctx.target.features(state.active));
  const auto assignment = dbscan(emb, ctx.cfg.dbscan);
  std::vector<std::uint32_t> cams;
  cams.reserve(state.active.size());
  for (std::size_t i : state.active) cams.push_back(ctx.target[i].camera);

  rec.active_size = state.active.size();
  rec.active_cameras = std::set<std::uint32_t>(cams.begin(), cams.end()).size();
  rec.num_clusters = assignment.num_clusters;
  rec.noise = assignment.noise_count();
  rec.eps = assignment.eps_used;
  rec.camera_histogram = unique_camera_histogram(assignment, cams);
  rec.single_camera_fraction = single_camera_cluster_fraction(assignment, cams);

  state.memory.clear();
  try {
    state.labels = generate_pseudo_labels(assignment, state.active);
  } catch (const NoClustersError&) {
    state.labels = PseudoLabelTable{};
    state.weight_table = ClusterWeightTable{};
    state.weights.clear();
    state.target_head.reset();
    rec.target_skipped = true;
    if (ctx.report != nullptr) {
      ctx.report->warnings.push_back("stage " + std::to_string(rec.stage) + " round " + std::to_string(rec.round) +
                                     ": no clusters, training source term only");
    }
    return;
  }
  const auto target_cams = ctx.target.camera_labels();
  state.weight_table = build_weight_table(state.labels, target_cams);
  rec.weighted = ctx.cfg.camera_weights && !is_first_stage;
  state.weights = rec.weighted ? state.weight_table.weights() : std::vector<double>(state.labels.num_classes, 1.0);
  double sum = 0.0;
  for (double w : state.weights) sum += w;
  rec.mean_weight = sum / static_cast<double>(state.weights.size());
  for (const auto& c : state.weight_table.clusters) {
    if (c.weight == 0.0) ++rec.zero_weight_clusters;
  }
  rec.weight_table = state.weight_table.clusters;

  state.target_head = reinit_classifier(ctx.cfg.model.embed_dim, state.labels.num_classes, state.rng.next_u64());
  state.target_opt = make_adam(ctx.cfg.model.lr, ctx.cfg.model.beta1, ctx.cfg.model.beta2);
}

void emit(const StageContext& ctx, RoundRecord rec) {
  if (ctx.channel != nullptr) ctx.channel->append(rec);
  if (ctx.report != nullptr) ctx.report->rounds.push_back(std::move(rec));
}

}  // namespace

void run_stage(TrainState& state, const StageContext& ctx, std::size_t epochs, bool is_first_stage) {
  require(!state.active.empty(), "run_stage: empty active set");
  const auto& sc = ctx.cfg.stage;
  const std::size_t epoch_len = ceil_div(state.active.size(), sc.batch_target);
  const std::size_t total_steps = epochs * epoch_len;
  const std::size_t interval = sc.recluster_every_epochs * epoch_len;
  const std::size_t stage_no = state.stage + 1;

  const Matrix src_feats = ctx.source.features();
  const Matrix tgt_feats = ctx.target.features();
  const auto src_labels = source_class_labels(ctx.source, state.source_classes);

  std::optional<RoundRecord> rec;
  std::size_t round = 0;
  for (std::size_t i = 0; i < total_steps; ++i) {
    if (i % interval == 0) {
      if (rec) {
        rec->losses = rec->losses.mean();
        emit(ctx, std::move(*rec));
      }
      rec.emplace();
      rec->stage = stage_no;
      rec->round = round++;
      rec->step = state.global_step;
      recluster(state, ctx, is_first_stage, *rec);
    }
    StepInputs in;
    Matrix xs, xt;
    if (state.labels.empty()) {
      std::vector<std::size_t> idx, lbl;
      std::vector<std::size_t> all(src_labels.size());
      for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
      draw_pk(group_by_label(all, src_labels, state.source_classes.size()), sc.source_P, sc.source_K, state.rng, idx,
              lbl);
      xs = src_feats.gather_rows(idx);
      in.source_x = &xs;
      in.source_labels = lbl;
      rec->losses.add(train_step(state, in, ctx.cfg.model));
      continue;
    }
    const Batch b = sample_batch(src_labels, state.source_classes.size(), state.labels, sc, state.rng);
    xs = src_feats.gather_rows(b.source);
    xt = tgt_feats.gather_rows(b.target);
    in.source_x = &xs;
    in.source_labels = b.source_labels;
    in.target_x = &xt;
    in.target_labels = b.target_labels;
    in.weights = state.weights;
    rec->losses.add(train_step(state, in, ctx.cfg.model));
  }
  if (rec) {
    rec->losses = rec->losses.mean();
    emit(ctx, std::move(*rec));
  }
  state.stage = stage_no;
}

RetrievalMetrics evaluate_encoder(const EncoderParams& encoder, const Dataset& data) {
  const auto ids = data.identity_labels();
  const auto cams = data.camera_labels();
  const auto split = split_query_gallery(ids, cams);
  const Matrix emb = embed(encoder, data.features());
  auto pick = [&](const std::vector<std::size_t>& idx) {
    RetrievalSet s;
    s.embeddings = emb.gather_rows(idx);
    for (std::size_t i : idx) {
      s.ids.push_back(ids[i]);
      s.cameras.push_back(cams[i]);
    }
    return s;
  };
  return evaluate(pick(split.query), pick(split.gallery));
}

std::vector<std::uint32_t> stage_order(const CurriculumSchedule& schedule, const TrainConfig& cfg) {
  auto order = schedule.camera_order();
  if (cfg.schedule_mode == ScheduleMode::Random) {
    Rng order_rng(cfg.seed ^ kStageOrderSalt);
    order_rng.shuffle(order);
  }
  return order;
}

CurriculumResult run_curriculum(const Dataset& source, const Dataset& target, const TrainConfig& cfg,
                                const Dataset* eval_set, ReportChannel* channel) {
  require(!target.empty(), "empty target dataset");
  require(source.dim() == target.dim(), "source and target feature dimensions differ");
  CurriculumResult out{init_state(source, cfg), {}};
  TrainState& state = out.state;
  TrainReport& report = out.report;

  pretrain_source(state, source, cfg, &report);
  report.pretrain_accuracy = source_accuracy(state, source);

  report.schedule = schedule_from_encoder(state.encoder, source, target, cfg.kernel);
  report.stage_order = stage_order(report.schedule, cfg);

  const auto subsets = partition_by_camera(target);
  const StageContext ctx{source, target, cfg, &report, channel};
  const std::size_t stages = report.stage_order.size();
  for (std::size_t c = 0; c < stages; ++c) {
    const auto cam = report.stage_order[c];
    const auto it = std::find_if(subsets.begin(), subsets.end(), [&](const CameraSubset& s) { return s.camera == cam; });
    std::vector<std::size_t> merged;
    std::merge(state.active.begin(), state.active.end(), it->indices.begin(), it->indices.end(),
               std::back_inserter(merged));
    state.active = std::move(merged);
    const bool last = c + 1 == stages;
    run_stage(state, ctx, last ? cfg.stage.final_stage_epochs : cfg.stage.epochs_per_stage, c == 0);
    if (eval_set != nullptr && !eval_set->empty()) {
      report.stage_evals.push_back({c + 1, cam, evaluate_encoder(state.encoder, *eval_set)});
    }
  }
  return out;
}

}  // namespace cacl

#include "kancfd/trainer.hpp"

#include "kancfd/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace kancfd {
namespace {

void add_scaled(Matrix& dst, const Matrix& src, double scale, std::size_t src_row0 = 0) {
  for (std::size_t r = 0; r < dst.rows(); ++r)
    for (std::size_t c = 0; c < dst.cols(); ++c) dst(r, c) += scale * src(src_row0 + r, c);
}

void check_finite(double v, const char* what, int task) {
  if (!std::isfinite(v))
    throw NumericError(std::string("non-finite ") + what + " loss while training task " + std::to_string(task + 1));
}

}  // namespace

void TrainerConfig::validate() const {
  loss.validate();
  require(d_x > 0 && d_f >= 2 && hidden > 0, "TrainerConfig: dimensions must be positive (d_f >= 2)");
  require(groups >= 1 && groups <= d_f, "TrainerConfig: need 1 <= groups <= d_f");
  require(projection_groups >= 1 && projection_groups <= d_f, "TrainerConfig: need 1 <= projection_groups <= d_f");
  require(batch_size >= 2 && replay_batch >= 1, "TrainerConfig: batch sizes too small");
  require(epochs >= 1, "TrainerConfig: epochs must be >= 1");
  require(lr > 0.0 && projection_lr > 0.0, "TrainerConfig: learning rates must be positive");
  require(augment.alpha >= 0.0, "TrainerConfig: augment alpha must be non-negative");
  require(memory_budget >= 2, "TrainerConfig: memory budget too small");
}

Trainer::Trainer(TrainerConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed, 0x7A1) {
  cfg_.validate();
  Rng init = rng_.fork(1);
  extractor_ = FeatureExtractor(cfg_.d_x, cfg_.d_f, cfg_.hidden, init);
  head_ = make_head(cfg_.head, cfg_.d_f, 1, HeadOptions{cfg_.groups, cfg_.mlp_hidden}, init);
  memory_.budget = cfg_.memory_budget;
  memory_.features = Matrix(0, cfg_.d_f);
}

void Trainer::train_task(const Dataset& train) {
  require(train.size() >= 2 && train.x.cols() == cfg_.d_x, "train_task: task data shape");
  const bool has_real = std::find(train.labels.begin(), train.labels.end(), 0) != train.labels.end();
  const bool has_fake = std::find(train.labels.begin(), train.labels.end(), 1) != train.labels.end();
  if (!has_real || !has_fake) throw ContractViolation("train_task: task data must contain both classes");

  begin_task(train);
  Rng order_rng = rng_.fork(1000 + static_cast<std::uint64_t>(task_));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
    StepStats sum;
    std::size_t steps = 0;
    for (std::size_t start = 0; start + 1 < order.size(); start += cfg_.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<int> y;
      for (std::size_t i : idx) y.push_back(train.labels[i]);
      step(train.x.select_rows(idx), y);
      sum.cls += last_.cls;
      sum.sc += last_.sc;
      sum.kd += last_.kd;
      sum.align += last_.align;
      sum.total += last_.total;
      ++steps;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    epoch_mean_ = {sum.cls * inv, sum.sc * inv, sum.kd * inv, sum.align * inv, sum.total * inv};
  }
  end_task(train);
}

void Trainer::begin_task(const Dataset& train) {
  const Matrix feats = extractor_.forward(train.x);
  if (task_ > 0) teacher_ = extractor_;
  Rng head_rng = rng_.fork(2000 + static_cast<std::uint64_t>(task_));
  head_->begin_task(feats, head_rng);

  extractor_opt_ = AdamState(extractor_.parameter_count(), AdamConfig{cfg_.lr});
  head_opt_ = AdamState(head_->trainable_parameters().size(), AdamConfig{cfg_.lr});

  projection_.reset();
  if (task_ > 0 && cfg_.ablation.use_kdcp && !cfg_.ablation.use_raw_replay) {
    // Inputs of the projection are previous-space features: this task's data
    // seen by the teacher, and the stored memory.
    Matrix pool = feats;
    pool.append_rows(memory_.features);
    projection_.emplace(cfg_.d_f, cfg_.projection_groups, task_ + 1);
    projection_->init_from_features(pool);
    projection_opt_ = AdamState(projection_->layer().parameter_count(), AdamConfig{cfg_.projection_lr});
  }
}

DomainLabeledBatch Trainer::replay_features(std::size_t count) {
  if (cfg_.ablation.use_raw_replay) {
    // Stored inputs seen by the current backbone: what a perfect drift
    // compensation would give. Treated as constants like projected features.
    const auto picked = replay_rows(count);
    DomainLabeledBatch batch;
    batch.features = extractor_.forward(memory_.raw.select_rows(picked));
    for (std::size_t r : picked) {
      batch.domain_labels.push_back(memory_.domain_labels[r]);
      batch.labels.push_back(memory_.labels[r]);
    }
    return batch;
  }
  if (projection_) {
    // Replay from the memory as seen through the current drift estimate.
    FeatureMemory view = memory_;
    view.features = projection_->apply(memory_.features);
    return augment_features(view, cfg_.augment, rng_, count);
  }
  return augment_features(memory_, cfg_.augment, rng_, count);
}

std::vector<std::size_t> Trainer::replay_rows(std::size_t count) {
  std::map<int, std::vector<std::size_t>> rows_of;
  for (std::size_t r = 0; r < memory_.size(); ++r) rows_of[memory_.domain_labels[r]].push_back(r);
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [label, rows] : rows_of) groups.push_back(&rows);
  std::vector<std::size_t> picked;
  for (std::size_t s = 0; s < count; ++s) {
    const auto& rows = *groups[rng_.below(groups.size())];
    picked.push_back(rows[rng_.below(rows.size())]);
  }
  return picked;
}

void Trainer::step(const Matrix& x, std::span<const int> y) {
  const std::size_t n = x.rows();
  FeatureExtractor::Cache cache;
  const Matrix student = extractor_.forward(x, &cache);
  StepStats stats;

  std::optional<Matrix> teacher_feats;
  if (teacher_) teacher_feats = teacher_->forward(x);

  if (projection_) {
    stats.align = train_projection_step(*projection_, *teacher_feats, student, projection_opt_);
    check_finite(stats.align, "alignment", task_);
  }

  const Matrix logits = head_->forward(student);
  const auto cls = bce_loss(logits.data(), y);
  stats.cls = cls.value;
  check_finite(stats.cls, "classification", task_);
  const auto head_grad = head_->backward(student, Matrix(n, 1, cls.grad));
  Matrix d_student = head_grad.d_input;

  std::vector<int> domain(n);
  for (std::size_t i = 0; i < n; ++i) domain[i] = domain_class_label(task_, y[i]);

  const bool sc_active = cfg_.ablation.use_sc && cfg_.loss.lambda_sc > 0.0 && (task_ > 0 || cfg_.sc_first_task);
  if (sc_active) {
    Matrix pooled = student;
    std::vector<int> pooled_labels = domain;
    if (task_ > 0 && !memory_.empty()) {
      auto replay = replay_features(cfg_.replay_batch);
      pooled.append_rows(replay.features);
      pooled_labels.insert(pooled_labels.end(), replay.domain_labels.begin(), replay.domain_labels.end());
    }
    const bool has_negative =
        std::any_of(pooled_labels.begin(), pooled_labels.end(), [&](int d) { return d != pooled_labels[0]; });
    if (has_negative) {
      const auto sc = supcon_loss(pooled, pooled_labels, cfg_.loss.tau, cfg_.loss.normalize_features);
      stats.sc = sc.value;
      check_finite(stats.sc, "contrastive", task_);
      add_scaled(d_student, sc.grad, cfg_.loss.lambda_sc);
    }
  }

  if (teacher_feats && cfg_.ablation.use_kd && cfg_.loss.lambda_kd > 0.0) {
    const auto kd = kd_loss(*teacher_feats, student);
    stats.kd = kd.value;
    check_finite(stats.kd, "distillation", task_);
    add_scaled(d_student, kd.grad, cfg_.loss.lambda_kd);
  }
  stats.total = overall_loss(stats.cls, sc_active ? stats.sc : 0.0, cfg_.ablation.use_kd ? stats.kd : 0.0,
                             cfg_.loss);
  check_finite(stats.total, "overall", task_);

  auto ext_grad = extractor_.backward(cache, d_student).params;
  auto ext_params = extractor_.parameters();
  adam_step(ext_params, ext_grad, extractor_opt_);
  extractor_.set_parameters(ext_params);

  auto head_params = head_->trainable_parameters();
  adam_step(head_params, head_grad.params, head_opt_);
  head_->set_trainable_parameters(head_params);

  last_ = stats;
}

void Trainer::end_task(const Dataset& train) {
  if (projection_) {
    memory_ = project_memory(memory_, *projection_);
  } else {
    // Without drift compensation the stored rows are reused as they are.
    memory_.space_task = task_ + 1;
  }

  Matrix pool = memory_.features;
  const Matrix fresh = extractor_.forward(train.x);
  pool.append_rows(fresh);
  std::vector<int> labels = memory_.domain_labels;
  for (int y : train.labels) labels.push_back(domain_class_label(task_, y));
  const auto idx = herding_select(pool, labels, cfg_.memory_budget);

  FeatureMemory next;
  next.budget = cfg_.memory_budget;
  next.space_task = task_ + 1;
  next.features = pool.select_rows(idx);
  if (cfg_.ablation.use_raw_replay) {
    Matrix raw_pool = memory_.raw;
    raw_pool.append_rows(train.x);
    next.raw = raw_pool.select_rows(idx);
  }
  for (std::size_t r : idx) {
    next.domain_labels.push_back(labels[r]);
    next.labels.push_back(binary_from_domain_class(labels[r]));
    next.source_tasks.push_back(task_from_domain_class(labels[r]));
  }
  next.validate();
  memory_ = std::move(next);
  projection_.reset();
  ++task_;
}

Trainer::Evaluation Trainer::evaluate(const std::vector<Dataset>& evals) const {
  for (const auto& e : evals)
    require(e.x.cols() == cfg_.d_x && e.size() == e.labels.size(), "evaluate: eval set shape");
  Evaluation ev{std::vector<double>(evals.size()), std::vector<double>(evals.size())};
  // Tasks are independent read-only evaluations; results land by index.
#pragma omp parallel for schedule(static) if (evals.size() > 1)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(evals.size()); ++t) {
    const Matrix lg = logits(evals[t].x);
    ev.acc[t] = accuracy(lg.data(), evals[t].labels);
    ev.auc[t] = auc(lg.data(), evals[t].labels);
  }
  return ev;
}

void Trainer::evaluate_all(const std::vector<Dataset>& evals) {
  require(evals.size() == static_cast<std::size_t>(task_), "evaluate_all: need one eval set per seen task");
  auto ev = evaluate(evals);
  scores_.append_row(std::move(ev.acc), std::move(ev.auc));
}

}  // namespace kancfd

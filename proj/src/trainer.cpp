// src/trainer.cpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pathdisc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "json_util.hpp"
#include "optim.hpp"
#include "pathdisc/metrics.hpp"
#include "pathdisc/negative_miner.hpp"
#include "pathdisc/parallel.hpp"

namespace pathdisc {

namespace {

using detail::Json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kVelocityPrefix = "opt/velocity/";

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double pointwise_loss(double raw, bool positive) { return softplus(positive ? -raw : raw); }

/// One unit of training: a labeled pair (pointwise) or a positive with one
/// of its negatives (pairwise).
struct Item {
  const ScoringInput* first = nullptr;
  const ScoringInput* second = nullptr;
};

struct ItemResult {
  double loss = 0;
  double score_first = 0;
  double score_second = 0;
  std::vector<Mat> grads;  // ParamStore order
};

ItemResult item_gradient(const DiscriminatorConfig& cfg, const ParamStore& params, const Item& item) {
  Tape tape;
  const BoundParams p = bind_params(tape, params, true);
  ItemResult r;
  const Var s1 = pair_raw_score(cfg, p, item.first->tokens, item.first->percepts);
  Var loss = s1;
  if (item.second == nullptr) {
    loss = softplus(item.first->positive() ? neg(s1) : s1);
  } else {
    const Var s2 = pair_raw_score(cfg, p, item.second->tokens, item.second->percepts);
    loss = softplus(sub(s2, s1));
    r.score_second = s2.item();
  }
  r.score_first = s1.item();
  r.loss = loss.item();
  tape.backward(loss);
  r.grads.reserve(p.size());
  for (const auto& [name, v] : p) r.grads.push_back(v.grad());
  return r;
}

/// Per-item results computed in parallel; reduction happens in item order
/// so the sum does not depend on the worker count.
std::vector<ItemResult> batch_results(const DiscriminatorConfig& cfg, const ParamStore& params,
                                      std::span<const Item> items) {
  std::vector<ItemResult> out(items.size());
  parallel_for(items.size(), [&](std::size_t i) { out[i] = item_gradient(cfg, params, items[i]); });
  return out;
}

std::vector<Mat> mean_gradient(std::vector<ItemResult>& results) {
  std::vector<std::vector<Mat>> grads;
  grads.reserve(results.size());
  for (auto& r : results) grads.push_back(std::move(r.grads));
  return detail::mean_of(grads);
}

std::string stage_label(const CurriculumStage& stage) {
  std::string out;
  for (const Provenance p : stage.strategies) {
    if (!out.empty()) out += '+';
    out += strategy_name(p);
  }
  return out;
}

std::size_t ratio_for(const TrainConfig& tcfg, Provenance p) {
  switch (p) {
    case Provenance::kNegativePS: return tcfg.ps_per_positive;
    case Provenance::kNegativePR: return tcfg.pr_per_positive;
    default: return tcfg.rw_per_positive;
  }
}

std::vector<Item> stage_items(const TrainingData& data, const TrainConfig& tcfg, const CurriculumStage& stage) {
  std::unordered_map<std::string, std::vector<const ScoringInput*>> by_source;
  for (const auto& n : data.train_negatives) by_source[n.source_id].push_back(&n);
  std::vector<Item> items;
  std::vector<Item> negatives;
  for (const auto& pos : data.train_positives) {
    if (tcfg.loss == LossKind::kPointwise) items.push_back({&pos, nullptr});
    const auto it = by_source.find(pos.pair_id);
    if (it == by_source.end()) continue;
    for (const Provenance strategy : stage.strategies) {
      std::size_t taken = 0;
      const std::size_t limit = ratio_for(tcfg, strategy);
      for (const ScoringInput* n : it->second) {
        if (n->provenance != strategy || taken == limit) continue;
        ++taken;
        if (tcfg.loss == LossKind::kPointwise) {
          negatives.push_back({n, nullptr});
        } else {
          items.push_back({&pos, n});
        }
      }
    }
  }
  if (tcfg.loss == LossKind::kPointwise) {
    if (negatives.empty() || items.empty()) {
      throw ValidationError("stage " + stage_label(stage) + ": no training negatives of these strategies");
    }
    items.insert(items.end(), negatives.begin(), negatives.end());
  } else if (items.empty()) {
    throw ValidationError("stage " + stage_label(stage) + ": no training negatives of these strategies");
  }
  return items;
}

double subset_auc(const std::vector<double>& pos, const std::vector<double>& neg_scores,
                  const std::vector<const ScoringInput*>& negs, std::initializer_list<Provenance> keep) {
  std::vector<ScoredLabel> s;
  for (const double x : pos) s.push_back({x, true});
  const std::size_t before = s.size();
  for (std::size_t i = 0; i < negs.size(); ++i) {
    for (const Provenance k : keep) {
      if (negs[i]->provenance == k) s.push_back({neg_scores[i], false});
    }
  }
  if (pos.empty() || s.size() == before) return kNaN;
  return auc(s);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j, const std::string& where) {
  if (j.is_null()) return kNaN;
  return detail::as_number(j, where);
}

std::size_t count_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = detail::field(j, key, where);
  if (!v.is_number_unsigned()) throw ValidationError(where + ": " + key + " must be a non-negative integer");
  return v.get<std::size_t>();
}

Json row_to_json(const EpochRow& r) {
  Json j;
  j["stage"] = r.stage;
  j["epoch"] = r.epoch;
  j["stage_epoch"] = r.stage_epoch;
  j["strategies"] = r.strategies;
  j["examples"] = r.examples;
  j["loss"] = number_or_null(r.loss);
  j["train_auc"] = number_or_null(r.train_auc);
  j["val_pr_rw"] = number_or_null(r.val.pr_rw);
  j["val_ps"] = number_or_null(r.val.ps);
  j["val_pr"] = number_or_null(r.val.pr);
  j["val_rw"] = number_or_null(r.val.rw);
  j["val_all"] = number_or_null(r.val.all);
  return j;
}

EpochRow row_from_json(const Json& j, const std::string& w) {
  using detail::field;
  detail::expect_object(j, w);
  EpochRow r;
  r.stage = count_field(j, "stage", w);
  r.epoch = count_field(j, "epoch", w);
  r.stage_epoch = count_field(j, "stage_epoch", w);
  r.strategies = detail::as_string(field(j, "strategies", w), w + ": strategies");
  r.examples = count_field(j, "examples", w);
  r.loss = number_from(field(j, "loss", w), w + ": loss");
  r.train_auc = number_from(field(j, "train_auc", w), w + ": train_auc");
  r.val.pr_rw = number_from(field(j, "val_pr_rw", w), w + ": val_pr_rw");
  r.val.ps = number_from(field(j, "val_ps", w), w + ": val_ps");
  r.val.pr = number_from(field(j, "val_pr", w), w + ": val_pr");
  r.val.rw = number_from(field(j, "val_rw", w), w + ": val_rw");
  r.val.all = number_from(field(j, "val_all", w), w + ": val_all");
  return r;
}

Json train_config_json(const TrainConfig& c) {
  Json j;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["clip_norm"] = c.clip_norm;
  j["ps_per_positive"] = c.ps_per_positive;
  j["pr_per_positive"] = c.pr_per_positive;
  j["rw_per_positive"] = c.rw_per_positive;
  Json stages = Json::array();
  for (const auto& s : c.stages) {
    Json names = Json::array();
    for (const Provenance p : s.strategies) names.push_back(strategy_name(p));
    stages.push_back({{"strategies", names}, {"epochs", s.epochs}});
  }
  j["stages"] = stages;
  j["loss"] = to_string(c.loss);
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from(const Json& doc, const std::string& root, const TrainConfig& base) {
  detail::reject_unknown(doc,
                         {"batch_size", "learning_rate", "momentum", "clip_norm", "ps_per_positive",
                          "pr_per_positive", "rw_per_positive", "stages", "loss", "seed"},
                         root);
  TrainConfig c = base;
  detail::read_field(doc, "batch_size", c.batch_size, root);
  detail::read_field(doc, "learning_rate", c.learning_rate, root);
  detail::read_field(doc, "momentum", c.momentum, root);
  detail::read_field(doc, "clip_norm", c.clip_norm, root);
  detail::read_field(doc, "ps_per_positive", c.ps_per_positive, root);
  detail::read_field(doc, "pr_per_positive", c.pr_per_positive, root);
  detail::read_field(doc, "rw_per_positive", c.rw_per_positive, root);
  detail::read_field(doc, "seed", c.seed, root);
  if (const auto it = doc.find("loss"); it != doc.end()) {
    c.loss = parse_loss_kind(detail::as_string(*it, root + ": loss"));
  }
  if (const auto it = doc.find("stages"); it != doc.end()) {
    const std::string w = root + ": stages";
    detail::as_array(*it, w);
    c.stages.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& s = (*it)[i];
      const std::string sw = detail::sub(w, i);
      detail::reject_unknown(s, {"strategies", "epochs"}, sw);
      CurriculumStage stage;
      const Json& names = detail::as_array(detail::field(s, "strategies", sw), sw + ".strategies");
      for (std::size_t k = 0; k < names.size(); ++k) {
        stage.strategies.push_back(parse_strategy(detail::as_string(names[k], detail::sub(sw + ".strategies", k))));
      }
      stage.epochs = count_field(s, "epochs", sw);
      c.stages.push_back(std::move(stage));
    }
  }
  validate(c);
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Inputs and scoring

std::vector<ScoringInput> make_scoring_inputs(const World& world, std::span<const InstructionPathPair> pairs) {
  std::vector<ScoringInput> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const InstructionPathPair& p = pairs[i];
    ScoringInput& s = out[i];
    s.pair_id = p.pair_id;
    s.source_id = is_negative(p.provenance) ? negative_source_id(p.pair_id) : p.pair_id;
    s.tokens = p.tokens;
    s.percepts = perceptual_sequence(world, p);
    s.provenance = p.provenance;
  });
  return out;
}

std::vector<double> raw_scores(const DiscriminatorConfig& cfg, const ParamStore& params,
                               std::span<const ScoringInput> inputs) {
  std::vector<double> out(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    Tape tape;
    const BoundParams p = bind_params(tape, params, false);
    out[i] = pair_raw_score(cfg, p, inputs[i].tokens, inputs[i].percepts).item();
  });
  return out;
}

double compute_loss(const DiscriminatorConfig& cfg, const ParamStore& params, std::span<const ScoringInput> batch) {
  if (batch.empty()) throw ValidationError("compute_loss: empty batch");
  const std::vector<double> s = raw_scores(cfg, params, batch);
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += pointwise_loss(s[i], batch[i].positive());
  return total / static_cast<double>(batch.size());
}

LossGradient loss_and_gradient(const DiscriminatorConfig& cfg, const ParamStore& params,
                               std::span<const ScoringInput> batch) {
  if (batch.empty()) throw ValidationError("loss_and_gradient: empty batch");
  std::vector<Item> items;
  for (const auto& b : batch) items.push_back({&b, nullptr});
  std::vector<ItemResult> results = batch_results(cfg, params, items);
  LossGradient out;
  for (const auto& r : results) out.loss += r.loss;
  const std::vector<Mat> g = mean_gradient(results);
  out.loss /= static_cast<double>(results.size());
  std::size_t k = 0;
  for (const auto& [name, _] : params) out.gradient.emplace(name, g[k++]);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

const char* to_string(LossKind k) { return k == LossKind::kPointwise ? "pointwise" : "pairwise"; }

LossKind parse_loss_kind(std::string_view s) {
  if (s == "pointwise") return LossKind::kPointwise;
  if (s == "pairwise") return LossKind::kPairwise;
  throw ValidationError("unknown loss '" + std::string(s) + "' (expected pointwise or pairwise)");
}

std::string strategy_name(Provenance p) {
  switch (p) {
    case Provenance::kNegativePS: return "PS";
    case Provenance::kNegativePR: return "PR";
    case Provenance::kNegativeRW: return "RW";
    default: throw ValidationError(std::string("'") + to_string(p) + "' is not a negative strategy");
  }
}

Provenance parse_strategy(std::string_view s) {
  if (s == "PS") return Provenance::kNegativePS;
  if (s == "PR") return Provenance::kNegativePR;
  if (s == "RW") return Provenance::kNegativeRW;
  throw ValidationError("unknown negative strategy '" + std::string(s) + "' (expected PS, PR or RW)");
}

void validate(const TrainConfig& c) {
  const std::string w = "train config: ";
  if (c.batch_size == 0) throw ValidationError(w + "batch_size must be positive");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw ValidationError(w + "learning_rate must be finite and non-negative");
  }
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ValidationError(w + "momentum must be in [0, 1)");
  if (!(c.clip_norm > 0.0)) throw ValidationError(w + "clip_norm must be positive");
  if (c.ps_per_positive == 0 || c.pr_per_positive == 0 || c.rw_per_positive == 0) {
    throw ValidationError(w + "negatives per positive must be at least 1");
  }
  if (c.stages.empty()) throw ValidationError(w + "at least one curriculum stage is required");
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto& s = c.stages[i];
    const std::string sw = w + "stages[" + std::to_string(i) + "]: ";
    if (s.strategies.empty()) throw ValidationError(sw + "empty strategy set");
    std::set<Provenance> seen;
    for (const Provenance p : s.strategies) {
      if (!is_negative(p)) throw ValidationError(sw + "'" + to_string(p) + "' is not a negative strategy");
      if (!seen.insert(p).second) throw ValidationError(sw + "duplicate strategy " + strategy_name(p));
    }
  }
}

std::string to_json(const TrainConfig& cfg) { return train_config_json(cfg).dump(1) + "\n"; }

TrainConfig parse_train_config(std::string_view text, std::string_view source, const TrainConfig& base) {
  return train_config_from(detail::parse_json(text, source), std::string(source), base);
}

// ---------------------------------------------------------------------------
// Data

TrainingData make_training_data(const World& world, std::span<const InstructionPathPair> pairs) {
  std::vector<InstructionPathPair> kept;
  for (const auto& p : pairs) {
    if (p.provenance != Provenance::kAugmented) kept.push_back(p);
  }
  std::vector<ScoringInput> inputs = make_scoring_inputs(world, kept);
  std::set<std::string> train_ids, val_ids;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!inputs[i].positive()) continue;
    (kept[i].split == Split::kTrain ? train_ids : val_ids).insert(inputs[i].pair_id);
  }
  TrainingData data;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const bool train = kept[i].split == Split::kTrain;
    ScoringInput& in = inputs[i];
    if (in.positive()) {
      (train ? data.train_positives : data.val_positives).push_back(std::move(in));
      continue;
    }
    if (!(train ? train_ids : val_ids).count(in.source_id)) {
      throw ValidationError("negative '" + in.pair_id + "' has no positive '" + in.source_id + "' in split " +
                            to_string(kept[i].split));
    }
    (train ? data.train_negatives : data.val_negatives).push_back(std::move(in));
  }
  return data;
}

ValidationAuc validation_auc(const DiscriminatorConfig& cfg, const ParamStore& params, const TrainingData& data) {
  const std::vector<double> pos = raw_scores(cfg, params, data.val_positives);
  const std::vector<double> neg = raw_scores(cfg, params, data.val_negatives);
  std::vector<const ScoringInput*> negs;
  for (const auto& n : data.val_negatives) negs.push_back(&n);
  using P = Provenance;
  ValidationAuc v;
  v.pr_rw = subset_auc(pos, neg, negs, {P::kNegativePR, P::kNegativeRW});
  v.ps = subset_auc(pos, neg, negs, {P::kNegativePS});
  v.pr = subset_auc(pos, neg, negs, {P::kNegativePR});
  v.rw = subset_auc(pos, neg, negs, {P::kNegativeRW});
  v.all = subset_auc(pos, neg, negs, {P::kNegativePS, P::kNegativePR, P::kNegativeRW});
  return v;
}

// ---------------------------------------------------------------------------
// Reports

CsvTable report_table(std::span<const EpochRow> rows) {
  CsvTable t;
  t.header = {"stage", "epoch", "stage_epoch", "strategies", "examples", "loss", "train_auc",
              "val_auc_pr_rw", "val_auc_ps", "val_auc_pr", "val_auc_rw", "val_auc_all"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.stage), std::to_string(r.epoch), std::to_string(r.stage_epoch), r.strategies,
                      std::to_string(r.examples), format_double(r.loss), format_double(r.train_auc),
                      format_double(r.val.pr_rw), format_double(r.val.ps), format_double(r.val.pr),
                      format_double(r.val.rw), format_double(r.val.all)});
  }
  return t;
}

CsvTable timing_table(std::span<const EpochRow> rows) {
  CsvTable t;
  t.header = {"epoch", "seconds"};
  for (const auto& r : rows) t.rows.push_back({std::to_string(r.epoch), format_double(r.seconds)});
  return t;
}

// ---------------------------------------------------------------------------
// Training

TrainState init_train_state(const DiscriminatorConfig& cfg, const TrainConfig& tcfg) {
  validate(cfg);
  Rng init(derive_seed(tcfg.seed, "disc-init"));
  return init_train_state(init_discriminator(cfg, init), tcfg);
}

TrainState init_train_state(ParamStore params, const TrainConfig& tcfg) {
  validate(tcfg);
  TrainState s;
  for (const auto& [name, m] : params) s.velocity.emplace(name, Mat::Zero(m.rows(), m.cols()));
  s.params = std::move(params);
  s.rng = Rng(derive_seed(tcfg.seed, "disc-shuffle"));
  return s;
}

bool train_stage(TrainState& state, const DiscriminatorConfig& cfg, const TrainingData& data,
                 const TrainConfig& tcfg, std::size_t stage, const EpochHook& hook) {
  validate(tcfg);
  check_params(cfg, state.params);
  if (stage >= tcfg.stages.size()) throw ValidationError("train_stage: no stage " + std::to_string(stage));
  if (stage != state.stage) {
    throw ValidationError("train_stage: state is at stage " + std::to_string(state.stage) + ", not " +
                          std::to_string(stage));
  }
  const CurriculumStage& spec = tcfg.stages[stage];
  if (state.stage_epoch >= spec.epochs) {
    ++state.stage;
    state.stage_epoch = 0;
    return true;
  }
  const std::vector<Item> items = stage_items(data, tcfg, spec);
  const std::string label = stage_label(spec);
  std::vector<std::size_t> order(items.size());

  while (state.stage_epoch < spec.epochs) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    state.rng.shuffle(order);

    double loss_sum = 0.0;
    std::vector<ScoredLabel> seen;
    seen.reserve(items.size() * 2);
    for (std::size_t start = 0, batch = 0; start < order.size(); start += tcfg.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      std::vector<Item> chunk;
      for (std::size_t k = start; k < end; ++k) chunk.push_back(items[order[k]]);
      std::vector<ItemResult> results = batch_results(cfg, state.params, chunk);

      double batch_loss = 0.0;
      for (std::size_t k = 0; k < results.size(); ++k) {
        batch_loss += results[k].loss;
        seen.push_back({results[k].score_first, chunk[k].first->positive()});
        if (chunk[k].second) seen.push_back({results[k].score_second, false});
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite loss at stage " + std::to_string(stage) + " epoch " +
                             std::to_string(state.stage_epoch + 1) + " batch " + std::to_string(batch) +
                             " (first pair '" + chunk.front().first->pair_id + "')");
      }
      loss_sum += batch_loss;

      std::vector<Mat> g = mean_gradient(results);
      detail::momentum_step(state.params, state.velocity, g, tcfg.learning_rate, tcfg.momentum, tcfg.clip_norm,
                            "stage " + std::to_string(stage) + " epoch " + std::to_string(state.stage_epoch + 1) +
                                " batch " + std::to_string(batch));
    }

    ++state.stage_epoch;
    EpochRow row;
    row.stage = stage;
    row.epoch = state.report.size() + 1;
    row.stage_epoch = state.stage_epoch;
    row.strategies = label;
    row.examples = items.size();
    row.loss = loss_sum / static_cast<double>(items.size());
    row.train_auc = auc(seen);
    row.val = data.val_positives.empty() ? ValidationAuc{kNaN, kNaN, kNaN, kNaN, kNaN}
                                         : validation_auc(cfg, state.params, data);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    state.report.push_back(row);
    if (state.stage_epoch == spec.epochs) {
      ++state.stage;
      state.stage_epoch = 0;
    }
    if (hook && !hook(state)) return false;
    if (state.stage != stage) break;
  }
  return true;
}

bool curriculum_train(TrainState& state, const DiscriminatorConfig& cfg, const TrainingData& data,
                      const TrainConfig& tcfg, const EpochHook& hook) {
  validate(tcfg);
  while (state.stage < tcfg.stages.size()) {
    if (!train_stage(state, cfg, data, tcfg, state.stage, hook)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Checkpoints

Checkpoint training_checkpoint(const TrainState& state, const DiscriminatorConfig& cfg, const TrainConfig& tcfg,
                               std::uint64_t vocab_hash) {
  Checkpoint ck = discriminator_checkpoint(cfg, state.params, vocab_hash);
  for (const auto& [name, v] : state.velocity) ck.arrays.emplace(std::string(kVelocityPrefix) + name, v);
  Json extra;
  extra["train_config"] = train_config_json(tcfg);
  extra["rng"] = state.rng.state();
  extra["stage"] = state.stage;
  extra["stage_epoch"] = state.stage_epoch;
  Json rows = Json::array();
  for (const auto& r : state.report) rows.push_back(row_to_json(r));
  extra["report"] = rows;
  ck.extra = extra.dump();
  return ck;
}

ResumedTraining resume_training(const Checkpoint& ckpt, std::uint64_t vocab_hash, std::string_view source) {
  LoadedDiscriminator loaded = load_discriminator(ckpt, vocab_hash, source);
  const std::string w = std::string(source) + ": training state";
  const Json extra = detail::parse_json(ckpt.extra, w);
  if (!extra.is_object() || !extra.contains("train_config")) {
    throw ValidationError(std::string(source) + ": checkpoint has no training state to resume");
  }
  detail::reject_unknown(extra, {"train_config", "rng", "stage", "stage_epoch", "report"}, w);
  ResumedTraining out;
  out.config = loaded.config;
  out.train_config = train_config_from(extra["train_config"], w + ".train_config", TrainConfig{});
  out.state.params = std::move(loaded.params);
  for (const auto& [name, m] : ckpt.arrays) {
    if (name.rfind(kVelocityPrefix, 0) == 0) out.state.velocity.emplace(name.substr(kVelocityPrefix.size()), m);
  }
  if (out.state.velocity.size() != out.state.params.size()) {
    throw ValidationError(w + ": optimizer state covers " + std::to_string(out.state.velocity.size()) + " of " +
                          std::to_string(out.state.params.size()) + " parameters");
  }
  for (const auto& [name, m] : out.state.params) {
    const auto it = out.state.velocity.find(name);
    if (it == out.state.velocity.end() || it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw DimensionError(w + ": velocity for '" + name + "' is missing or misshaped");
    }
  }
  out.state.rng.set_state(detail::as_string(detail::field(extra, "rng", w), w + ": rng"));
  out.state.stage = count_field(extra, "stage", w);
  out.state.stage_epoch = count_field(extra, "stage_epoch", w);
  if (out.state.stage > out.train_config.stages.size()) throw ValidationError(w + ": stage out of range");
  const Json& rows = detail::as_array(detail::field(extra, "report", w), w + ": report");
  for (std::size_t i = 0; i < rows.size(); ++i) out.state.report.push_back(row_from_json(rows[i], detail::sub(w + ".report", i)));
  return out;
}

}  // namespace pathdisc

// tools/cli.cpp

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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "pathdisc/agent.hpp"
#include "pathdisc/filter.hpp"
#include "pathdisc/io.hpp"
#include "pathdisc/negative_miner.hpp"
#include "pathdisc/trainer.hpp"

#ifndef PATHDISC_VERSION
#define PATHDISC_VERSION "unknown"
#endif

namespace pathdisc::cli {

namespace {

namespace fs = std::filesystem;
using detail::Json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Four decimals for progress lines; artifacts keep full precision.
std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

/// Content hash of a file, or of every file below a directory in path order.
std::uint64_t content_hash(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("input '" + path + "' does not exist");
  if (!fs::is_directory(path)) return fnv1a(read_file(path));
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) {
    acc += fs::relative(f, path).generic_string() + ":" + hex64(fnv1a(read_file(f.string()))) + "\n";
  }
  return fnv1a(acc);
}

// ---------------------------------------------------------------------------
// Configuration file

/// The --config document: one optional object per concern, so a single file
/// can drive the whole pipeline.
class ConfigFile {
 public:
  void load(const std::string& path) {
    source_ = path;
    doc_ = detail::parse_json(read_file(path), path);
    detail::reject_unknown(doc_, {"world", "mining", "discriminator", "training", "agent", "filter", "metrics"},
                           path);
  }
  /// Section text, or "{}" when absent.
  std::string section(const char* name) const {
    if (!doc_.is_object()) return "{}";
    const auto it = doc_.find(name);
    if (it == doc_.end()) return "{}";
    detail::expect_object(*it, where(name));
    return it->dump();
  }
  Json section_json(const char* name) const { return Json::parse(section(name)); }
  std::string where(const char* name) const { return (source_.empty() ? "config" : source_) + ": " + name; }

 private:
  std::string source_;
  Json doc_;
};

MiningConfig mining_config(const ConfigFile& cf) {
  const Json j = cf.section_json("mining");
  const std::string w = cf.where("mining");
  detail::reject_unknown(j, {"ps_per_positive", "pr_per_positive", "rw_per_positive", "far_threshold_m", "pr_mode",
                             "attempts", "seed"},
                         w);
  MiningConfig c;
  detail::read_field(j, "ps_per_positive", c.ps_per_positive, w);
  detail::read_field(j, "pr_per_positive", c.pr_per_positive, w);
  detail::read_field(j, "rw_per_positive", c.rw_per_positive, w);
  detail::read_field(j, "far_threshold_m", c.far_threshold_m, w);
  detail::read_field(j, "attempts", c.attempts, w);
  detail::read_field(j, "seed", c.seed, w);
  if (const auto it = j.find("pr_mode"); it != j.end()) c.pr_mode = parse_pr_mode(detail::as_string(*it, w + ": pr_mode"));
  return c;
}

Json mining_json(const MiningConfig& c) {
  return {{"ps_per_positive", c.ps_per_positive}, {"pr_per_positive", c.pr_per_positive},
          {"rw_per_positive", c.rw_per_positive}, {"far_threshold_m", c.far_threshold_m},
          {"pr_mode", to_string(c.pr_mode)},      {"attempts", c.attempts},
          {"seed", c.seed}};
}

/// Architecture fields only; vocabulary and feature sizes come from the data.
DiscriminatorConfig discriminator_config(const ConfigFile& cf) {
  const Json j = cf.section_json("discriminator");
  const std::string w = cf.where("discriminator");
  detail::reject_unknown(j, {"embed_dim", "hidden_dim", "text_mode", "path_mode"}, w);
  DiscriminatorConfig c;
  detail::read_field(j, "embed_dim", c.embed_dim, w);
  detail::read_field(j, "hidden_dim", c.hidden_dim, w);
  if (const auto it = j.find("text_mode"); it != j.end()) {
    c.text_mode = parse_tower_mode(detail::as_string(*it, w + ": text_mode"));
  }
  if (const auto it = j.find("path_mode"); it != j.end()) {
    c.path_mode = parse_tower_mode(detail::as_string(*it, w + ": path_mode"));
  }
  return c;
}

struct FilterConfig {
  std::string strategy = "top";
  double fraction = 0.05;
  double stratum = kDefaultStratum;
  std::uint64_t seed = 7;
};

FilterConfig filter_config(const ConfigFile& cf) {
  const Json j = cf.section_json("filter");
  const std::string w = cf.where("filter");
  detail::reject_unknown(j, {"strategy", "fraction", "stratum", "seed"}, w);
  FilterConfig c;
  if (const auto it = j.find("strategy"); it != j.end()) c.strategy = detail::as_string(*it, w + ": strategy");
  detail::read_field(j, "fraction", c.fraction, w);
  detail::read_field(j, "stratum", c.stratum, w);
  detail::read_field(j, "seed", c.seed, w);
  return c;
}

MetricConfig metric_config(const ConfigFile& cf) {
  const Json j = cf.section_json("metrics");
  const std::string w = cf.where("metrics");
  detail::reject_unknown(j, {"success_threshold_m"}, w);
  MetricConfig c;
  detail::read_field(j, "success_threshold_m", c.success_threshold_m, w);
  return c;
}

/// Accepts both "random_top" and "random-top".
Selection selection_from_flag(std::string s) {
  std::replace(s.begin(), s.end(), '-', '_');
  return parse_selection(s);
}

// ---------------------------------------------------------------------------
// Data directory written by gen-world

struct DataDir {
  World world;
  Vocabulary vocab;
  Dataset data;
  QualitySidecar quality;
};

const char* const kSplitFiles[] = {"train", "val_seen", "val_unseen", "augmented"};

std::vector<InstructionPathPair>& split_of(Dataset& d, std::string_view name) {
  if (name == "train") return d.train;
  if (name == "val_seen") return d.val_seen;
  if (name == "val_unseen") return d.val_unseen;
  if (name == "augmented") return d.augmented;
  throw ValidationError("unknown split '" + std::string(name) +
                        "' (expected train, val_seen, val_unseen, or augmented)");
}

std::vector<InstructionPathPair> load_pairs(const std::string& file, const World& world, const Vocabulary& vocab,
                                            LoadMode mode = LoadMode::kTraining, QualitySidecar* quality = nullptr) {
  std::vector<InstructionPathPair> pairs = parse_pairs_jsonl(read_file(file), world, file, mode, quality);
  for (const auto& p : pairs) validate_pair(world, vocab, p);
  return pairs;
}

/// Only `report` passes LoadMode::kEvaluation; every other command sees the
/// augmented pool without its latent quality.
DataDir load_data(const std::string& dir, LoadMode mode = LoadMode::kTraining) {
  if (!fs::is_directory(dir)) throw ValidationError("data directory '" + dir + "' does not exist (run gen-world)");
  DataDir d{load_world(path_in(dir, "world")), parse_vocabulary(read_file(path_in(dir, "vocab.json")),
                                                                path_in(dir, "vocab.json")),
            {}, {}};
  for (const char* name : kSplitFiles) {
    const bool eval = mode == LoadMode::kEvaluation && std::string_view(name) == "augmented";
    split_of(d.data, name) = load_pairs(path_in(dir, std::string("pairs/") + name + ".jsonl"), d.world, d.vocab,
                                        eval ? LoadMode::kEvaluation : LoadMode::kTraining,
                                        eval ? &d.quality : nullptr);
  }
  return d;
}

LoadedDiscriminator load_model(const std::string& file, const Vocabulary& vocab) {
  return load_discriminator(load_checkpoint(file), vocab.hash(), file);
}

// ---------------------------------------------------------------------------
// Runs and manifests

/// Shared state of one subcommand invocation.
struct Run {
  std::string command;
  std::vector<std::string> args;  // everything after the subcommand name
  std::string out_dir;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  ConfigFile config;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::string out_file(const std::string& name) const { return path_in(out_dir, name); }
  void write(const std::string& name, std::string_view content) const { write_file_atomic(out_file(name), content); }
  void write_csv(const std::string& name, const CsvTable& t) const { write(name, to_csv(t)); }

  /// Written before any artifact. The argument list omits --out so reruns
  /// into another directory reproduce the manifest byte for byte.
  void manifest(const Json& effective, std::uint64_t run_seed, const std::vector<std::string>& inputs) const {
    Json m;
    m["command"] = command;
    std::vector<std::string> replay;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--out") {
        ++i;
        continue;
      }
      if (args[i].rfind("--out=", 0) == 0) continue;
      replay.push_back(args[i]);
    }
    m["args"] = replay;
    m["version"] = PATHDISC_VERSION;
    m["seed"] = run_seed;
    m["config"] = effective;
    m["config_hash"] = hex64(fnv1a(effective.dump()));
    Json in = Json::object();
    for (const auto& path : inputs) in[path] = hex64(content_hash(path));
    m["inputs"] = in;
    fs::create_directories(out_dir);
    write("manifest.json", m.dump(1) + "\n");
  }
};

void add_common(CLI::App* sub, Run& run) {
  sub->add_option("--config", run.config_path, "JSON configuration file");
  sub->add_option("--seed", run.seed, "Seed override for this stage");
  sub->add_option("--out", run.out_dir, "Output directory")->required();
}

void load_config(Run& run) {
  if (!run.config_path.empty()) run.config.load(run.config_path);
}

/// Flag values override the configuration file when given.
template <typename T>
void override_with(const std::optional<T>& flag, T& target) {
  if (flag) target = *flag;
}

// ---------------------------------------------------------------------------
// gen-world

void cmd_gen_world(Run& run) {
  WorldSpec spec = parse_world_spec(run.config.section("world"), run.config.where("world"));
  override_with(run.seed, spec.seed);
  validate(spec);
  run.manifest({{"world", Json::parse(world_spec_to_json(spec))}}, spec.seed, {});
  GeneratedData g = generate_dataset(spec);
  save_world(g.world, run.out_file("world"));
  run.write("vocab.json", vocabulary_to_json(g.vocab));
  for (const char* name : kSplitFiles) {
    const bool aug = std::string_view(name) == "augmented";
    run.write(std::string("pairs/") + name + ".jsonl",
              pairs_to_jsonl(g.world, split_of(g.data, name), aug ? &g.evaluation_only : nullptr));
  }
  std::vector<InstructionPathPair> all;
  for (const char* name : kSplitFiles) {
    const auto& s = split_of(g.data, name);
    all.insert(all.end(), s.begin(), s.end());
  }
  run.write_csv("stats.csv", dataset_stats(all));
  *run.out << "world: " << g.world.train.size() << " train + " << g.world.unseen.size()
           << " unseen environments; pairs: " << g.data.train.size() << " train, " << g.data.val_seen.size()
           << " val_seen, " << g.data.val_unseen.size() << " val_unseen, " << g.data.augmented.size()
           << " augmented\n";
}

// ---------------------------------------------------------------------------
// mine

struct MineFlags {
  std::string data;
  std::optional<std::size_t> ps, pr, rw;
  std::optional<double> far;
  std::optional<std::string> pr_mode;
};

void cmd_mine(Run& run, const MineFlags& f) {
  MiningConfig mc = mining_config(run.config);
  override_with(f.ps, mc.ps_per_positive);
  override_with(f.pr, mc.pr_per_positive);
  override_with(f.rw, mc.rw_per_positive);
  override_with(f.far, mc.far_threshold_m);
  if (f.pr_mode) mc.pr_mode = parse_pr_mode(*f.pr_mode);
  override_with(run.seed, mc.seed);
  validate(mc);
  const DataDir d = load_data(f.data);
  run.manifest({{"mining", mining_json(mc)}}, mc.seed, {f.data});
  std::vector<InstructionPathPair> positives = d.data.train;
  positives.insert(positives.end(), d.data.val_seen.begin(), d.data.val_seen.end());
  positives.insert(positives.end(), d.data.val_unseen.begin(), d.data.val_unseen.end());
  MiningStats stats;
  const std::vector<InstructionPathPair> negatives = mine_all(d.world, positives, mc, &stats);
  run.write("negatives.jsonl", pairs_to_jsonl(d.world, negatives));
  CsvTable t;
  t.header = {"strategy", "count"};
  t.rows = {{"PS", std::to_string(stats.ps)},
            {"PR_strict", std::to_string(stats.pr_strict)},
            {"PR_relaxed", std::to_string(stats.pr_relaxed)},
            {"RW", std::to_string(stats.rw)},
            {"PS_skipped", std::to_string(stats.ps_skipped)},
            {"RW_skipped", std::to_string(stats.rw_skipped)}};
  run.write_csv("mining_stats.csv", t);
  *run.out << "mined " << negatives.size() << " negatives (PS " << stats.ps << ", PR "
           << stats.pr_strict + stats.pr_relaxed << ", RW " << stats.rw << ") from " << positives.size()
           << " positives\n";
}

// ---------------------------------------------------------------------------
// train-disc

struct TrainDiscFlags {
  std::string data;
  std::string negatives;
  std::string resume;
  std::optional<std::size_t> embed_dim, hidden_dim, batch_size, stop_after;
  std::optional<std::string> text_mode, path_mode, loss, stages;
  std::optional<double> lr;
  bool quiet = false;
};

/// "PS:30,PR+RW:30" -> stages.
std::vector<CurriculumStage> parse_stages_flag(const std::string& text) {
  std::vector<CurriculumStage> stages;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("--stages: '" + item + "' is not STRATEGIES:EPOCHS (e.g. PS:30,PR+RW:30)");
    }
    CurriculumStage s;
    std::stringstream names(item.substr(0, colon));
    std::string name;
    while (std::getline(names, name, '+')) s.strategies.push_back(parse_strategy(name));
    const std::string epochs = item.substr(colon + 1);
    const double e = parse_double(epochs, "--stages epochs");
    if (e < 0 || e != static_cast<double>(static_cast<std::size_t>(e))) {
      throw ValidationError("--stages: epochs '" + epochs + "' must be a non-negative integer");
    }
    s.epochs = static_cast<std::size_t>(e);
    stages.push_back(std::move(s));
  }
  if (stages.empty()) throw ValidationError("--stages: no stages given");
  return stages;
}

void cmd_train_disc(Run& run, const TrainDiscFlags& f) {
  const DataDir d = load_data(f.data);
  std::vector<InstructionPathPair> pairs = d.data.train;
  pairs.insert(pairs.end(), d.data.val_seen.begin(), d.data.val_seen.end());
  pairs.insert(pairs.end(), d.data.val_unseen.begin(), d.data.val_unseen.end());
  const std::vector<InstructionPathPair> negatives = load_pairs(f.negatives, d.world, d.vocab);
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  const TrainingData data = make_training_data(d.world, pairs);
  if (data.train_positives.empty()) throw ValidationError(f.data + ": no training positives");

  DiscriminatorConfig cfg;
  TrainConfig tcfg;
  TrainState state;
  std::vector<std::string> inputs{f.data, f.negatives};
  if (!f.resume.empty()) {
    if (f.embed_dim || f.hidden_dim || f.batch_size || f.text_mode || f.path_mode || f.loss || f.stages || f.lr ||
        run.seed || !run.config_path.empty()) {
      throw ValidationError("--resume continues the configuration stored in '" + f.resume +
                            "'; drop the model and training flags");
    }
    ResumedTraining r = resume_training(load_checkpoint(f.resume), d.vocab.hash(), f.resume);
    cfg = r.config;
    tcfg = std::move(r.train_config);
    state = std::move(r.state);
    inputs.push_back(f.resume);
  } else {
    cfg = discriminator_config(run.config);
    override_with(f.embed_dim, cfg.embed_dim);
    override_with(f.hidden_dim, cfg.hidden_dim);
    if (f.text_mode) cfg.text_mode = parse_tower_mode(*f.text_mode);
    if (f.path_mode) cfg.path_mode = parse_tower_mode(*f.path_mode);
    cfg.vocab_size = d.vocab.size();
    cfg.feature_dim = static_cast<std::size_t>(data.train_positives.front().percepts.cols());
    validate(cfg);
    tcfg = parse_train_config(run.config.section("training"), run.config.where("training"));
    override_with(f.batch_size, tcfg.batch_size);
    override_with(f.lr, tcfg.learning_rate);
    if (f.loss) tcfg.loss = parse_loss_kind(*f.loss);
    if (f.stages) tcfg.stages = parse_stages_flag(*f.stages);
    override_with(run.seed, tcfg.seed);
    validate(tcfg);
    state = init_train_state(cfg, tcfg);
  }
  run.manifest({{"discriminator", Json::parse(to_json(cfg))},
                {"training", Json::parse(to_json(tcfg))},
                {"resumed_at_epoch", state.report.size()}},
               tcfg.seed, inputs);

  const std::uint64_t vh = d.vocab.hash();
  auto hook = [&](const TrainState& s) {
    const EpochRow& r = s.report.back();
    if (!f.quiet) {
      *run.err << "epoch " << r.epoch << " [" << r.strategies << "] loss " << short_num(r.loss) << " val_auc PR+RW "
               << short_num(r.val.pr_rw) << " all " << short_num(r.val.all) << "\n";
    }
    run.write("state.ckpt", serialize_checkpoint(training_checkpoint(s, cfg, tcfg, vh)));
    return !(f.stop_after && s.report.size() >= *f.stop_after);
  };
  const bool finished = curriculum_train(state, cfg, data, tcfg, hook);
  run.write_csv("report.csv", report_table(state.report));
  run.write_csv("timing.csv", timing_table(state.report));
  if (!finished) {
    *run.out << "stopped after epoch " << state.report.size() << "; continue with --resume "
             << run.out_file("state.ckpt") << "\n";
    return;
  }
  run.write("discriminator.ckpt", serialize_checkpoint(training_checkpoint(state, cfg, tcfg, vh)));
  const ValidationAuc v = validation_auc(cfg, state.params, data);
  *run.out << "trained " << state.report.size() << " epochs; validation AUC PR+RW " << short_num(v.pr_rw) << ", PS "
           << short_num(v.ps) << ", all " << short_num(v.all) << "\n";
}

// ---------------------------------------------------------------------------
// score

struct ScoreFlags {
  std::string data, model, split = "augmented", pairs;
};

void cmd_score(Run& run, const ScoreFlags& f) {
  DataDir d = load_data(f.data);
  const LoadedDiscriminator m = load_model(f.model, d.vocab);
  std::vector<std::string> inputs{f.data, f.model};
  std::vector<InstructionPathPair> pairs;
  if (!f.pairs.empty()) {
    pairs = load_pairs(f.pairs, d.world, d.vocab);
    inputs.push_back(f.pairs);
  } else {
    pairs = split_of(d.data, f.split);
  }
  run.manifest({{"split", f.pairs.empty() ? f.split : std::string()}}, 0, inputs);
  const std::vector<ScoringInput> scoring = make_scoring_inputs(d.world, pairs);
  const std::vector<ScoredPair> ranked = rank_pool(m.config, m.params, scoring);
  run.write("ranked.jsonl", ranked_to_jsonl(ranked));
  double mean = 0;
  for (const auto& r : ranked) mean += r.probability;
  *run.out << "scored " << ranked.size() << " pairs; mean probability "
           << format_double(mean / static_cast<double>(ranked.size())) << "\n";
}

// ---------------------------------------------------------------------------
// filter

struct FilterFlags {
  std::string ranked, data, pool;
  std::optional<std::string> strategy;
  std::optional<double> fraction, stratum;
};

void cmd_filter(Run& run, const FilterFlags& f) {
  FilterConfig fc = filter_config(run.config);
  override_with(f.strategy, fc.strategy);
  override_with(f.fraction, fc.fraction);
  override_with(f.stratum, fc.stratum);
  override_with(run.seed, fc.seed);
  const Selection strategy = selection_from_flag(fc.strategy);
  if (!(fc.fraction > 0.0 && fc.fraction <= 1.0)) throw ValidationError("--fraction must be in (0, 1]");
  if (!(fc.stratum > 0.0 && fc.stratum <= 1.0)) throw ValidationError("--stratum must be in (0, 1]");
  if ((strategy == Selection::kRandomTop || strategy == Selection::kRandomBottom) && fc.fraction > fc.stratum) {
    throw ValidationError("--fraction " + format_double(fc.fraction) + " exceeds the " + to_string(strategy) +
                          " stratum size " + format_double(fc.stratum) + "; lower --fraction or raise --stratum");
  }
  const std::vector<ScoredPair> ranked = parse_ranked_jsonl(read_file(f.ranked), f.ranked);
  const DataDir d = load_data(f.data);
  const std::string pool_file = f.pool.empty() ? path_in(f.data, "pairs/augmented.jsonl") : f.pool;
  const std::vector<InstructionPathPair> pool = load_pairs(pool_file, d.world, d.vocab);
  std::vector<std::string> inputs{f.ranked, f.data};
  if (!f.pool.empty()) inputs.push_back(f.pool);
  run.manifest({{"filter",
                 {{"strategy", to_string(strategy)},
                  {"fraction", fc.fraction},
                  {"stratum", fc.stratum},
                  {"seed", fc.seed}}}},
               fc.seed, inputs);
  const std::vector<ScoredPair> chosen = select(ranked, strategy, fc.fraction, fc.seed, fc.stratum);
  std::map<std::string_view, const InstructionPathPair*> by_id;
  for (const auto& p : pool) by_id.emplace(p.pair_id, &p);
  std::vector<InstructionPathPair> selected;
  for (const auto& c : chosen) {
    const auto it = by_id.find(c.pair_id);
    if (it == by_id.end()) throw ValidationError(f.ranked + ": pair '" + c.pair_id + "' is not in " + pool_file);
    selected.push_back(*it->second);
  }
  run.write("selected.jsonl", ranked_to_jsonl(chosen));
  run.write("pairs.jsonl", pairs_to_jsonl(d.world, selected));
  *run.out << "selected " << selected.size() << " of " << ranked.size() << " pairs (" << to_string(strategy) << ", "
           << format_double(fc.fraction) << ")\n";
}

// ---------------------------------------------------------------------------
// train-agent

struct TrainAgentFlags {
  std::string data;
  std::vector<std::string> pairs;
  bool with_train = false;
  std::string init = "random";
  std::string discriminator;
  std::optional<std::size_t> epochs, batch_size, horizon, embed_dim, hidden_dim;
  std::optional<double> lr;
  std::optional<std::string> text_mode;
  bool quiet = false;
};

void cmd_train_agent(Run& run, const TrainAgentFlags& f) {
  const DataDir d = load_data(f.data);
  std::vector<std::string> inputs{f.data};
  std::vector<InstructionPathPair> pairs;
  if (f.pairs.empty() || f.with_train) pairs = d.data.train;
  for (const auto& file : f.pairs) {
    const auto more = load_pairs(file, d.world, d.vocab);
    pairs.insert(pairs.end(), more.begin(), more.end());
    inputs.push_back(file);
  }
  AgentConfig cfg = parse_agent_config(run.config.section("agent"), run.config.where("agent"));
  override_with(f.epochs, cfg.epochs);
  override_with(f.batch_size, cfg.batch_size);
  override_with(f.horizon, cfg.horizon);
  override_with(f.lr, cfg.learning_rate);
  override_with(run.seed, cfg.seed);
  cfg.vocab_size = d.vocab.size();
  cfg.feature_dim = d.world.train.front().feature_dim() + kOrientationDim;

  ParamStore params;
  if (f.init == "random") {
    if (!f.discriminator.empty()) throw ValidationError("--discriminator requires --init discriminator");
    override_with(f.embed_dim, cfg.embed_dim);
    override_with(f.hidden_dim, cfg.hidden_dim);
    if (f.text_mode) cfg.text_mode = parse_tower_mode(*f.text_mode);
    validate(cfg);
    run.manifest({{"agent", Json::parse(to_json(cfg))}, {"init", f.init}}, cfg.seed, inputs);
    params = init_agent_random(cfg);
  } else if (f.init == "discriminator") {
    if (f.discriminator.empty()) throw ValidationError("--init discriminator requires --discriminator CKPT");
    if (f.embed_dim || f.hidden_dim || f.text_mode) {
      throw ValidationError("encoder sizes come from the discriminator; drop --embed-dim/--hidden-dim/--text-mode");
    }
    const LoadedDiscriminator disc = load_model(f.discriminator, d.vocab);
    cfg = agent_config_for(disc.config, cfg);
    validate(cfg);
    inputs.push_back(f.discriminator);
    run.manifest({{"agent", Json::parse(to_json(cfg))}, {"init", f.init}}, cfg.seed, inputs);
    params = init_agent_from_discriminator(cfg, disc);
  } else {
    throw ValidationError("--init must be 'random' or 'discriminator', got '" + f.init + "'");
  }
  AgentTrainResult result = train_student_forcing(cfg, std::move(params), d.world, pairs);
  if (!f.quiet) {
    for (const auto& r : result.report) {
      *run.err << "epoch " << r.epoch << " loss " << short_num(r.loss) << " train_sr " << short_num(r.train_sr) << "\n";
    }
  }
  run.write("agent.ckpt", serialize_checkpoint(agent_checkpoint(cfg, result.params, d.vocab.hash())));
  run.write_csv("report.csv", agent_report_table(result.report));
  CsvTable timing;
  timing.header = {"epoch", "seconds"};
  for (const auto& r : result.report) timing.rows.push_back({std::to_string(r.epoch), format_double(r.seconds)});
  run.write_csv("timing.csv", timing);
  *run.out << "trained agent on " << pairs.size() << " pairs for " << cfg.epochs << " epochs\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  std::string data, agent, policy = "agent", splits = "val_seen,val_unseen";
  std::optional<std::size_t> horizon;
  std::optional<double> threshold;
};

void cmd_eval(Run& run, const EvalFlags& f) {
  DataDir d = load_data(f.data);
  MetricConfig mc = metric_config(run.config);
  override_with(f.threshold, mc.success_threshold_m);
  validate(mc);
  std::vector<std::string> inputs{f.data};
  std::optional<LoadedAgent> agent;
  std::size_t horizon = AgentConfig{}.horizon;
  std::uint64_t seed = run.seed.value_or(0);
  PolicyFactory factory;
  if (f.policy == "agent") {
    if (f.agent.empty()) throw ValidationError("--policy agent requires --agent CKPT");
    agent = load_agent(load_checkpoint(f.agent), d.vocab.hash(), f.agent);
    horizon = agent->config.horizon;
    inputs.push_back(f.agent);
    factory = greedy_agent(agent->config, agent->params);
  } else if (f.policy == "oracle") {
    factory = oracle_policy();
  } else if (f.policy == "random") {
    factory = random_policy(seed);
  } else {
    throw ValidationError("--policy must be agent, oracle, or random; got '" + f.policy + "'");
  }
  override_with(f.horizon, horizon);
  if (horizon == 0) throw ValidationError("--horizon must be positive");
  std::vector<std::string> splits;
  std::stringstream ss(f.splits);
  for (std::string s; std::getline(ss, s, ',');) {
    if (s == "augmented") throw ValidationError("--splits: the augmented pool has no evaluation role");
    split_of(d.data, s);
    splits.push_back(s);
  }
  if (splits.empty()) throw ValidationError("--splits: no splits given");
  run.manifest({{"metrics", {{"success_threshold_m", mc.success_threshold_m}}},
                {"policy", f.policy},
                {"horizon", horizon},
                {"splits", splits}},
               seed, inputs);
  std::vector<std::pair<std::string, NavMetrics>> rows;
  std::string predictions;
  for (const auto& s : splits) {
    const auto& pairs = split_of(d.data, s);
    const EvaluationResult r = evaluate_policy(d.world, pairs, factory, horizon, mc);
    rows.emplace_back(s, r.mean);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      Json j;
      j["pair_id"] = pairs[i].pair_id;
      j["split"] = s;
      j["path"] = node_ids(d.world.env(pairs[i].env_id), r.predictions[i]);
      j["pl"] = r.episodes[i].pl;
      j["ne"] = r.episodes[i].ne;
      j["sr"] = r.episodes[i].sr;
      j["spl"] = r.episodes[i].spl;
      predictions += j.dump() + "\n";
    }
  }
  const CsvTable table = nav_metrics_table(rows);
  run.write_csv("metrics.csv", table);
  run.write("predictions.jsonl", predictions);
  *run.out << to_csv(table);
}

// ---------------------------------------------------------------------------
// export-alignment

struct ExportFlags {
  std::string data, model, split = "val_seen", pairs;
  std::vector<std::string> ids;
  std::size_t count = 1;
};

std::string file_stem(std::string id) {
  for (char& c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return id;
}

void cmd_export_alignment(Run& run, const ExportFlags& f) {
  DataDir d = load_data(f.data);
  const LoadedDiscriminator m = load_model(f.model, d.vocab);
  std::vector<std::string> inputs{f.data, f.model};
  std::vector<InstructionPathPair> pool;
  if (!f.pairs.empty()) {
    pool = load_pairs(f.pairs, d.world, d.vocab);
    inputs.push_back(f.pairs);
  } else {
    pool = split_of(d.data, f.split);
  }
  std::vector<const InstructionPathPair*> chosen;
  if (!f.ids.empty()) {
    for (const auto& id : f.ids) {
      const auto it = std::find_if(pool.begin(), pool.end(), [&](const auto& p) { return p.pair_id == id; });
      if (it == pool.end()) throw ValidationError("--pair-id '" + id + "' is not in the selected pairs");
      chosen.push_back(&*it);
    }
  } else {
    if (f.count == 0) throw ValidationError("--count must be positive");
    for (std::size_t i = 0; i < std::min(f.count, pool.size()); ++i) chosen.push_back(&pool[i]);
  }
  if (chosen.empty()) throw ValidationError("no pairs to export");
  run.manifest({{"split", f.pairs.empty() ? f.split : std::string()}, {"pair_ids", f.ids}, {"count", f.count}}, 0,
               inputs);
  CsvTable summary;
  summary.header = {"pair_id", "rows", "cols", "probability", "diagonality"};
  double total = 0;
  for (const InstructionPathPair* p : chosen) {
    const EnvironmentGraph& env = d.world.env(p->env_id);
    const AlignmentOutcome o = score_pair(m.config, m.params, p->tokens, perceptual_sequence(env, p->nodes));
    std::vector<std::string> words;
    for (int t : p->tokens) words.push_back(d.vocab.token(t));
    const std::string stem = file_stem(p->pair_id);
    run.write(stem + ".csv", alignment_csv(o.alignment));
    run.write(stem + ".pgm", alignment_pgm(o.alignment));
    run.write(stem + ".labels.json", alignment_labels(words, node_ids(env, p->path())));
    const double diag = o.alignment.rows() >= 2 && o.alignment.cols() >= 2 ? diagonality(o.alignment) : 0.0;
    total += diag;
    summary.rows.push_back({p->pair_id, std::to_string(o.alignment.rows()), std::to_string(o.alignment.cols()),
                            format_double(o.probability), format_double(diag)});
  }
  run.write_csv("summary.csv", summary);
  *run.out << "exported " << chosen.size() << " alignment matrices; mean diagonality "
           << format_double(total / static_cast<double>(chosen.size())) << "\n";
}

// ---------------------------------------------------------------------------
// report

struct ReportFlags {
  std::string data, model;
  std::vector<std::string> evals;
  std::vector<double> fractions{0.01, 0.05};
};

void cmd_report(Run& run, const ReportFlags& f) {
  if (f.model.empty() && f.evals.empty()) throw ValidationError("report needs --model and/or --eval NAME=DIR");
  std::vector<std::pair<std::string, std::string>> evals;
  for (const auto& e : f.evals) {
    const auto eq = e.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--eval '" + e + "' is not NAME=DIR");
    evals.emplace_back(e.substr(0, eq), e.substr(eq + 1));
  }
  for (double fr : f.fractions) {
    if (!(fr > 0.0 && fr <= 1.0)) throw ValidationError("--fractions must lie in (0, 1]");
  }
  std::vector<std::string> inputs;
  if (!f.model.empty()) inputs = {f.data, f.model};
  for (const auto& [name, dir] : evals) inputs.push_back(path_in(dir, "metrics.csv"));
  run.manifest({{"fractions", f.fractions}, {"evals", f.evals}}, 0, inputs);

  if (!f.model.empty()) {
    // The one reader of latent quality.
    DataDir d = load_data(f.data, LoadMode::kEvaluation);
    const LoadedDiscriminator m = load_model(f.model, d.vocab);
    std::map<std::string, std::vector<double>> scores;
    std::vector<ScoredPair> ranked;
    for (const char* name : {"val_seen", "augmented", "val_unseen"}) {
      const auto& pairs = split_of(d.data, name);
      const std::vector<ScoringInput> in = make_scoring_inputs(d.world, pairs);
      std::vector<ScoredPair> r = rank_pool(m.config, m.params, in);
      for (const auto& s : r) scores[name].push_back(s.probability);
      if (std::string_view(name) == "augmented") ranked = std::move(r);
    }
    const CdfReport cdf = score_cdf_report(scores);
    run.write_csv("score_cdf.csv", cdf.cdf);
    run.write_csv("score_means.csv", cdf.means);
    CsvTable q;
    q.header = {"strategy", "fraction", "n", "mean_quality"};
    for (double fr : f.fractions) {
      for (Selection s : {Selection::kTop, Selection::kBottom}) {
        const auto chosen = select(ranked, s, fr, 0);
        double sum = 0;
        for (const auto& c : chosen) sum += d.quality.at(c.pair_id);
        q.rows.push_back({to_string(s), format_double(fr), std::to_string(chosen.size()),
                          format_double(sum / static_cast<double>(chosen.size()))});
      }
    }
    run.write_csv("quality.csv", q);
    *run.out << to_csv(cdf.means) << to_csv(q);
  }

  if (!evals.empty()) {
    CsvTable nav;
    nav.header = {"run"};
    for (const char* s : {"val_seen", "val_unseen"}) {
      for (const char* k : {"PL", "NE", "SR", "SPL"}) nav.header.push_back(std::string(s) + "_" + k);
    }
    for (const auto& [name, dir] : evals) {
      const std::string file = path_in(dir, "metrics.csv");
      const CsvTable t = parse_csv(read_file(file));
      std::vector<std::string> row{name};
      for (const char* s : {"val_seen", "val_unseen"}) {
        std::size_t at = t.rows.size();
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          if (t.rows[i].at(t.column("split")) == s) at = i;
        }
        for (const char* k : {"PL", "NE", "SR", "SPL"}) {
          row.push_back(at == t.rows.size() ? "" : t.rows[at].at(t.column(k)));
        }
      }
      nav.rows.push_back(std::move(row));
    }
    run.write_csv("navigation.csv", nav);
    *run.out << to_csv(nav);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pathdisc: instruction-path discriminator, data filtering, and follower agents"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PATHDISC_VERSION);

  Run r;
  r.out = &out;
  r.err = &err;

  CLI::App* gen = app.add_subcommand("gen-world", "Generate the synthetic environments and pair splits");
  add_common(gen, r);

  MineFlags mine_f;
  CLI::App* mine = app.add_subcommand("mine", "Mine PS/PR/RW negatives for every positive");
  add_common(mine, r);
  mine->add_option("--data", mine_f.data, "gen-world output directory")->required();
  mine->add_option("--ps", mine_f.ps, "PS negatives per positive");
  mine->add_option("--pr", mine_f.pr, "PR negatives per positive");
  mine->add_option("--rw", mine_f.rw, "RW negatives per positive");
  mine->add_option("--far-threshold", mine_f.far, "RW far threshold in meters");
  mine->add_option("--pr-mode", mine_f.pr_mode, "strict, relaxed, or auto");

  TrainDiscFlags td_f;
  CLI::App* td = app.add_subcommand("train-disc", "Train the discriminator with a negative curriculum");
  add_common(td, r);
  td->add_option("--data", td_f.data, "gen-world output directory")->required();
  td->add_option("--negatives", td_f.negatives, "mine output negatives.jsonl")->required();
  td->add_option("--resume", td_f.resume, "Continue from a state.ckpt written by an earlier run");
  td->add_option("--stop-after", td_f.stop_after, "Stop after this many total epochs");
  td->add_option("--embed-dim", td_f.embed_dim);
  td->add_option("--hidden-dim", td_f.hidden_dim);
  td->add_option("--text-mode", td_f.text_mode, "bidirectional or unidirectional");
  td->add_option("--path-mode", td_f.path_mode, "bidirectional or unidirectional");
  td->add_option("--batch-size", td_f.batch_size);
  td->add_option("--lr", td_f.lr, "Learning rate");
  td->add_option("--loss", td_f.loss, "pointwise or pairwise");
  td->add_option("--stages", td_f.stages, "Curriculum, e.g. PS:30,PR+RW:30");
  td->add_flag("--quiet", td_f.quiet, "No per-epoch log");

  ScoreFlags sc_f;
  CLI::App* sc = app.add_subcommand("score", "Rank pairs by discriminator probability");
  add_common(sc, r);
  sc->add_option("--data", sc_f.data, "gen-world output directory")->required();
  sc->add_option("--model", sc_f.model, "Discriminator checkpoint")->required();
  sc->add_option("--split", sc_f.split, "train, val_seen, val_unseen, or augmented");
  sc->add_option("--pairs", sc_f.pairs, "Score this pairs file instead of a split");

  FilterFlags fl_f;
  CLI::App* fl = app.add_subcommand("filter", "Select a subset of a ranked pool");
  add_common(fl, r);
  fl->add_option("--ranked", fl_f.ranked, "score output ranked.jsonl")->required();
  fl->add_option("--data", fl_f.data, "gen-world output directory")->required();
  fl->add_option("--pool", fl_f.pool, "Pairs file that was ranked (default: the augmented pool)");
  fl->add_option("--strategy", fl_f.strategy, "top, bottom, random_full, random_top, random_bottom");
  fl->add_option("--fraction", fl_f.fraction, "Fraction of the pool to keep");
  fl->add_option("--stratum", fl_f.stratum, "Stratum size for random_top/random_bottom");

  TrainAgentFlags ta_f;
  CLI::App* ta = app.add_subcommand("train-agent", "Train a follower with student forcing");
  add_common(ta, r);
  ta->add_option("--data", ta_f.data, "gen-world output directory")->required();
  ta->add_option("--pairs", ta_f.pairs, "Training pairs files (default: the train split)");
  ta->add_flag("--with-train", ta_f.with_train, "Add the train split to --pairs");
  ta->add_option("--init", ta_f.init, "random or discriminator");
  ta->add_option("--discriminator", ta_f.discriminator, "Checkpoint for --init discriminator");
  ta->add_option("--epochs", ta_f.epochs);
  ta->add_option("--batch-size", ta_f.batch_size);
  ta->add_option("--horizon", ta_f.horizon);
  ta->add_option("--lr", ta_f.lr, "Learning rate");
  ta->add_option("--embed-dim", ta_f.embed_dim);
  ta->add_option("--hidden-dim", ta_f.hidden_dim);
  ta->add_option("--text-mode", ta_f.text_mode, "bidirectional or unidirectional");
  ta->add_flag("--quiet", ta_f.quiet, "No per-epoch log");

  EvalFlags ev_f;
  CLI::App* ev = app.add_subcommand("eval", "Navigation metrics of a policy");
  add_common(ev, r);
  ev->add_option("--data", ev_f.data, "gen-world output directory")->required();
  ev->add_option("--agent", ev_f.agent, "Agent checkpoint");
  ev->add_option("--policy", ev_f.policy, "agent, oracle, or random");
  ev->add_option("--splits", ev_f.splits, "Comma-separated splits");
  ev->add_option("--horizon", ev_f.horizon, "Step limit (default: the agent's)");
  ev->add_option("--success-threshold", ev_f.threshold, "Success radius in meters");

  ExportFlags ex_f;
  CLI::App* ex = app.add_subcommand("export-alignment", "Write alignment matrices as CSV and PGM");
  add_common(ex, r);
  ex->add_option("--data", ex_f.data, "gen-world output directory")->required();
  ex->add_option("--model", ex_f.model, "Discriminator checkpoint")->required();
  ex->add_option("--split", ex_f.split, "Split to draw pairs from");
  ex->add_option("--pairs", ex_f.pairs, "Pairs file instead of a split");
  ex->add_option("--pair-id", ex_f.ids, "Pairs to export (repeatable)");
  ex->add_option("--count", ex_f.count, "Export the first N pairs when no --pair-id is given");

  ReportFlags rp_f;
  CLI::App* rp = app.add_subcommand("report", "Score distributions, quality of selections, navigation tables");
  add_common(rp, r);
  rp->add_option("--data", rp_f.data, "gen-world output directory")->required();
  rp->add_option("--model", rp_f.model, "Discriminator checkpoint");
  rp->add_option("--eval", rp_f.evals, "NAME=DIR of an eval run (repeatable)");
  rp->add_option("--fractions", rp_f.fractions, "Selection fractions for the quality table")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    r.command = sub->get_name();
    const auto at = std::find(args.begin(), args.end(), r.command);
    r.args.assign(at + 1, args.end());
    load_config(r);
    if (sub == gen) cmd_gen_world(r);
    if (sub == mine) cmd_mine(r, mine_f);
    if (sub == td) cmd_train_disc(r, td_f);
    if (sub == sc) cmd_score(r, sc_f);
    if (sub == fl) cmd_filter(r, fl_f);
    if (sub == ta) cmd_train_agent(r, ta_f);
    if (sub == ev) cmd_eval(r, ev_f);
    if (sub == ex) cmd_export_alignment(r, ex_f);
    if (sub == rp) cmd_report(r, rp_f);
  } catch (const ValidationError& e) {
    err << "pathdisc " << r.command << ": error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "pathdisc " << r.command << ": failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace pathdisc::cli

/*
 * Copyright 2026 The vhlsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "vhl/experiment/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vhl/analysis/export.hpp"
#include "vhl/data/idx.hpp"
#include "vhl/data/partition.hpp"
#include "vhl/errors.hpp"
#include "vhl/fl/aggregate.hpp"
#include "vhl/virtual/generator.hpp"

namespace vhl::experiment {

namespace {

// Stream tags for the per-seed derived seeds.
constexpr std::uint64_t kDataStream = 0xDA7A;
constexpr std::uint64_t kPartitionStream = 0x9A27;
constexpr std::uint64_t kVirtualStream = 0x7172;
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kServerStream = 0x5E7E;

bool uses_noise_inputs(objective::VhlMode mode) {
  return mode == objective::VhlMode::kFull || mode == objective::VhlMode::kNaive;
}

data::TrainTest load_dataset(const DatasetSection& d, std::uint64_t seed) {
  if (d.kind == "idx") {
    auto load = [&](const std::string& images, const std::string& labels) {
      const auto img_bytes = data::read_file_bytes(images);
      const auto lbl_bytes = data::read_file_bytes(labels);
      return data::idx_to_dataset(data::parse_idx(img_bytes), data::parse_idx(lbl_bytes), d.class_count);
    };
    return {load(d.train_images, d.train_labels), load(d.test_images, d.test_labels)};
  }
  data::MixtureParams mp;
  mp.class_count = d.class_count;
  mp.dim = d.dim;
  mp.per_class = d.per_class;
  mp.center_spread = d.center_spread;
  mp.noise_sigma = d.noise_sigma;
  mp.seed = d.seed.value_or(derive_seed({seed, kDataStream}));
  return data::make_synthetic_split(mp, d.test_per_class);
}

}  // namespace

std::string format_row(const MetricsRow& r) {
  return fmt::format("{},{},{},{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}", r.seed, r.round, fl::to_string(r.strategy),
                     objective::to_string(r.mode), r.accuracy, r.train_loss, r.client_drift, r.calibration_penalty,
                     r.lr);
}

double ExperimentResult::mean_best_accuracy() const {
  if (seeds.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : seeds) total += s.best_accuracy;
  return total / static_cast<double>(seeds.size());
}

std::unique_ptr<SeedContext> prepare_seed(const ExperimentConfig& config, std::uint64_t seed) {
  auto ctx = std::make_unique<SeedContext>();
  ctx->seed = seed;
  auto split = load_dataset(config.dataset, seed);
  ctx->train = std::move(split.train);
  ctx->test = std::move(split.test);
  if (ctx->test.dim() != ctx->train.dim()) throw ConfigError("dataset", "train and test inputs differ in width");

  const auto& vhl = config.fl.local.vhl;
  const auto& vs = config.virtual_data;
  const int vclasses = vs.classes.value_or(ctx->train.class_count);

  ctx->spec.layer_widths = {ctx->train.dim()};
  for (int w : config.model.hidden) ctx->spec.layer_widths.push_back(w);
  ctx->spec.natural_classes = ctx->train.class_count;
  ctx->spec.virtual_classes = uses_noise_inputs(vhl.mode) ? vclasses : 0;
  ctx->spec.activation = config.model.activation;
  ctx->spec.validate();

  data::PartitionSpec ps;
  ps.scheme = config.partition.scheme;
  ps.clients = config.fl.clients;
  ps.alpha = config.partition.alpha;
  ps.samples_per_client = config.partition.samples_per_client;
  ps.dominant_count = config.partition.dominant_count;
  ps.tail_count_low = config.partition.tail_count_low;
  ps.tail_count_high = config.partition.tail_count_high;
  ps.seed = derive_seed({seed, kPartitionStream});

  const std::uint64_t vseed = vs.seed.value_or(derive_seed({seed, kVirtualStream}));
  if (uses_noise_inputs(vhl.mode)) {
    const auto geometry = default_virtual_geometry(ctx->train.dim());
    virtual_data::VirtualSpec spec;
    spec.classes = vclasses;
    spec.per_class = vs.per_class;
    spec.base_side = vs.base_side.value_or(geometry.base_side);
    spec.up_factor = vs.up_factor.value_or(geometry.up_factor);
    spec.channels = vs.channels.value_or(geometry.channels);
    spec.mean_separation = vs.mean_separation;
    spec.sigma = vs.sigma;
    spec.seed = vseed;
    if (spec.sample_dim() != ctx->train.dim()) {
      throw ConfigError("vhl.virtual", fmt::format("virtual samples have {} values, the inputs have {}",
                                                   spec.sample_dim(), ctx->train.dim()));
    }
    ctx->virtual_set = virtual_data::generate_noise_dataset(spec).data;
  } else if (vhl.mode == objective::VhlMode::kVfa) {
    if (vclasses > ctx->train.class_count) {
      throw ConfigError("vhl.virtual.classes", "vfa needs at most one virtual class per natural class");
    }
    const int layer = vhl.resolved_layer(ctx->spec);
    const int width = ctx->spec.layer_widths[static_cast<std::size_t>(layer)];
    ctx->virtual_set =
        virtual_data::generate_vfa_features(vclasses, width, vs.per_class, vs.mean_separation, vs.sigma, vseed).data;
  }

  ctx->setup.spec = ctx->spec;
  ctx->setup.train = &ctx->train;
  ctx->setup.shards = data::partition(ctx->train, ps);
  ctx->setup.virtual_set = vhl.uses_virtual_data() ? &ctx->virtual_set : nullptr;
  ctx->setup.test = &ctx->test;

  const auto w0 = nn::init_params(ctx->spec, derive_seed({seed, kInitStream}));
  ctx->initial_state =
      fl::ServerState::initial(w0, config.fl.strategy, derive_seed({seed, kServerStream}), config.fl.clients);
  return ctx;
}

namespace {

void write_feature_table(const SeedContext& ctx, const nn::ModelParams& params, int layer, std::ostream& out) {
  if (layer < 0) layer = ctx.spec.hidden_layers();
  if (layer > ctx.spec.hidden_layers()) {
    throw ConfigError("output.feature_layer", fmt::format("layer {} outside 0..{}", layer, ctx.spec.hidden_layers()));
  }
  analysis::FeatureTableWriter writer(out, ctx.spec.layer_widths[static_cast<std::size_t>(layer)]);
  writer.append(analysis::layer_features(ctx.spec, params, ctx.test.features, layer), ctx.test.labels, false);
  // Noise inputs can be pushed through the network; vfa features cannot.
  if (ctx.spec.virtual_classes > 0 && ctx.virtual_set.size() > 0) {
    writer.append(analysis::layer_features(ctx.spec, params, ctx.virtual_set.features, layer),
                  ctx.virtual_set.labels, true);
  }
}

void dump_features(const ExperimentConfig& config, const SeedContext& ctx, const nn::ModelParams& params, int round) {
  const auto& o = config.output;
  if (o.features_dir.empty()) return;
  if (std::find(o.feature_rounds.begin(), o.feature_rounds.end(), round) == o.feature_rounds.end()) return;
  std::filesystem::create_directories(o.features_dir);
  const auto path = std::filesystem::path(o.features_dir) / fmt::format("features_seed{}_round{}.csv", ctx.seed, round);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature dump " + path.string());
  write_feature_table(ctx, params, o.feature_layer, out);
}

// Trains one seed; rows are appended to `rows` as they are produced so a
// failure leaves the completed rounds behind.
void train_seed(const ExperimentConfig& config, std::uint64_t seed, int workers, bool write_files,
                std::vector<MetricsRow>& rows) {
  auto ctx = prepare_seed(config, seed);
  fl::RoundOptions opts;
  opts.clients_per_round = config.fl.resolved_clients_per_round();
  opts.workers = workers;
  fl::ServerState state = ctx->initial_state;
  if (write_files) dump_features(config, *ctx, state.global, 0);
  for (int r = 0; r < config.fl.rounds; ++r) {
    fl::RoundOutcome outcome;
    try {
      outcome = fl::run_round(std::move(state), ctx->setup, opts, config.fl.local);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.client(), e.step(), e.detail(), fmt::format("seed {}, round {}", seed, r + 1));
    }
    state = std::move(outcome.state);
    MetricsRow row;
    row.seed = seed;
    row.round = r + 1;
    row.strategy = config.fl.strategy;
    row.mode = config.fl.local.vhl.mode;
    row.accuracy = outcome.metrics.accuracy;
    row.train_loss = outcome.metrics.train_loss;
    row.client_drift = outcome.metrics.client_drift;
    row.calibration_penalty = outcome.metrics.calibration_penalty;
    row.lr = outcome.metrics.lr;
    rows.push_back(row);
    if (write_files) dump_features(config, *ctx, state.global, r + 1);
  }
}

SeedSummary summarise(std::uint64_t seed, std::vector<MetricsRow> rows, std::optional<double> target) {
  SeedSummary s;
  s.seed = seed;
  s.target = target;
  for (const auto& row : rows) {
    if (row.accuracy > s.best_accuracy || s.best_round == 0) {
      s.best_accuracy = row.accuracy;
      s.best_round = row.round;
    }
    if (target && !s.rounds_to_target && row.accuracy >= *target) s.rounds_to_target = row.round;
  }
  s.rows = std::move(rows);
  return s;
}

std::string render_csv(const std::vector<std::vector<MetricsRow>>& per_seed) {
  std::string csv = std::string(kMetricsHeader) + "\n";
  for (const auto& rows : per_seed)
    for (const auto& row : rows) csv += format_row(row) + "\n";
  return csv;
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write metrics file '" + path + "'");
  out << text;
  if (!out) throw Error("write to metrics file '" + path + "' failed");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const int workers = options.workers.value_or(config.fl.workers);
  if (workers < 1) throw ConfigError("fl.workers", "must be >= 1");

  std::vector<std::vector<MetricsRow>> per_seed;
  per_seed.reserve(config.seeds.size());
  try {
    for (auto seed : config.seeds) {
      per_seed.emplace_back();
      train_seed(config, seed, workers, options.write_files, per_seed.back());
    }
  } catch (...) {
    if (options.write_files) write_text(config.output.metrics, render_csv(per_seed));
    throw;
  }

  ExperimentResult result;
  result.metrics_csv = render_csv(per_seed);
  if (options.write_files) write_text(config.output.metrics, result.metrics_csv);

  std::optional<double> fixed_target = options.target ? options.target : config.report.target_accuracy;
  std::vector<std::optional<double>> targets(config.seeds.size(), fixed_target);
  if (!fixed_target && config.report.baseline_target) {
    ExperimentConfig baseline = config;
    baseline.fl.strategy = fl::Strategy::kFedAvg;
    baseline.fl.local.vhl.mode = objective::VhlMode::kOff;
    baseline.report.baseline_target = false;
    RunOptions quiet;
    quiet.workers = workers;
    quiet.write_files = false;
    const auto base = run_experiment(baseline, quiet);
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = base.seeds[i].best_accuracy;
  }
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    result.seeds.push_back(summarise(config.seeds[i], std::move(per_seed[i]), targets[i]));
  }
  return result;
}

void export_features_at(const ExperimentConfig& config, int round, int layer, std::ostream& out) {
  if (round < 0) throw ConfigError("round", "must be >= 0");
  auto ctx = prepare_seed(config, config.seeds.front());
  fl::RoundOptions opts;
  opts.clients_per_round = config.fl.resolved_clients_per_round();
  opts.workers = config.fl.workers;
  fl::ServerState state = ctx->initial_state;
  for (int r = 0; r < round; ++r) state = fl::run_round(std::move(state), ctx->setup, opts, config.fl.local).state;
  write_feature_table(*ctx, state.global, layer, out);
}

std::string instance_to_json(const analysis::MarginGapInstance& inst, const analysis::MarginGapReport& report) {
  using nlohmann::json;
  auto rows = [](const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      out.push_back(row);
    }
    return out;
  };
  json j;
  j["p"] = {{"points", rows(inst.p.points)}, {"labels", inst.p.labels}};
  j["pv"] = {{"points", rows(inst.pv.points)}, {"labels", inst.pv.labels}};
  j["classifier"] = {{"weights", rows(inst.classifier.weights)},
                     {"bias", std::vector<double>(inst.classifier.bias.data(),
                                                  inst.classifier.bias.data() + inst.classifier.bias.size())}};
  j["candidates"] = rows(inst.candidates);
  j["report"] = {{"margin_p", report.margin_p},
                 {"margin_v", report.margin_v},
                 {"lhs", report.lhs},
                 {"rhs", report.rhs},
                 {"holds", report.holds}};
  return j.dump(2);
}

TheoryReport run_theory_checks(int instances, std::uint64_t seed) {
  if (instances < 1) throw ConfigError("instances", "must be >= 1");
  TheoryReport report;
  report.instances = instances;
  report.min_slack = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(i)}));
    const auto inst = analysis::random_margin_gap_instance(rng);
    const analysis::LinearClassifier clf = inst.classifier;
    const auto r = analysis::margin_gap_check([&](const RowVector& x) { return clf(x); }, inst.p, inst.pv,
                                              inst.candidates);
    report.min_slack = std::min(report.min_slack, r.slack());
    total += r.slack();
    if (!r.holds) {
      ++report.violations;
      if (!report.failing_instance_json) report.failing_instance_json = instance_to_json(inst, r);
    }
  }
  report.mean_slack = total / instances;
  return report;
}

}  // namespace vhl::experiment

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


#include "vhl/experiment/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "vhl/errors.hpp"

namespace vhl::experiment {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Map reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  // An undefined node when the key is absent.
  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& map = node_;
    return map[key];
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  template <class T>
  void read(const std::string& key, T& out);

  template <class T>
  void read_opt(const std::string& key, std::optional<T>& out) {
    if (!has(key)) {
      seen_.insert(key);
      return;
    }
    T value{};
    read(key, value);
    out = value;
  }

  void reject_unknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

YAML::Node scalar_node(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected a scalar");
  return n;
}

double to_double(const YAML::Node& n, const std::string& path) {
  scalar_node(n, path);
  if (n.Tag() == "!") throw ConfigError(path, "expected a number, got a quoted string");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "expected a number, got '" + n.Scalar() + "'");
  }
}

long long to_integer(const YAML::Node& n, const std::string& path) {
  scalar_node(n, path);
  if (n.Tag() == "!") throw ConfigError(path, "expected an integer, got a quoted string");
  try {
    return n.as<long long>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "expected an integer, got '" + n.Scalar() + "'");
  }
}

int to_int(const YAML::Node& n, const std::string& path) {
  const long long v = to_integer(n, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(path, "integer out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t to_u64(const YAML::Node& n, const std::string& path) {
  scalar_node(n, path);
  if (n.Tag() == "!") throw ConfigError(path, "expected an unsigned integer, got a quoted string");
  if (!n.Scalar().empty() && n.Scalar()[0] == '-') throw ConfigError(path, "expected an unsigned integer");
  try {
    return n.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "expected an unsigned integer, got '" + n.Scalar() + "'");
  }
}

bool to_bool(const YAML::Node& n, const std::string& path) {
  scalar_node(n, path);
  if (n.Tag() == "!") throw ConfigError(path, "expected a boolean, got a quoted string");
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "expected a boolean, got '" + n.Scalar() + "'");
  }
}

std::string to_str(const YAML::Node& n, const std::string& path) { return scalar_node(n, path).Scalar(); }

template <class T, class F>
std::vector<T> to_list(const YAML::Node& n, const std::string& path, F convert) {
  if (!n.IsSequence()) throw ConfigError(path, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(convert(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Wraps enum parsers (which throw InputError) so the message carries the path.
template <class F>
auto parse_enum(const YAML::Node& n, const std::string& path, F parse) {
  try {
    return parse(to_str(n, path));
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
}

template <>
void Section::read<double>(const std::string& key, double& out) {
  if (auto n = child(key)) out = to_double(n, path(key));
}
template <>
void Section::read<int>(const std::string& key, int& out) {
  if (auto n = child(key)) out = to_int(n, path(key));
}
template <>
void Section::read<std::uint64_t>(const std::string& key, std::uint64_t& out) {
  if (auto n = child(key)) out = to_u64(n, path(key));
}
template <>
void Section::read<bool>(const std::string& key, bool& out) {
  if (auto n = child(key)) out = to_bool(n, path(key));
}
template <>
void Section::read<std::string>(const std::string& key, std::string& out) {
  if (auto n = child(key)) out = to_str(n, path(key));
}
template <>
void Section::read<std::vector<int>>(const std::string& key, std::vector<int>& out) {
  if (auto n = child(key)) out = to_list<int>(n, path(key), to_int);
}

void read_dataset(Section s, DatasetSection& d) {
  s.read("kind", d.kind);
  if (d.kind != "synthetic" && d.kind != "idx") {
    throw ConfigError(s.path("kind"), "expected synthetic or idx, got '" + d.kind + "'");
  }
  s.read("class_count", d.class_count);
  s.read("dim", d.dim);
  s.read("per_class", d.per_class);
  s.read("test_per_class", d.test_per_class);
  s.read("center_spread", d.center_spread);
  s.read("noise_sigma", d.noise_sigma);
  s.read_opt("seed", d.seed);
  s.read("train_images", d.train_images);
  s.read("train_labels", d.train_labels);
  s.read("test_images", d.test_images);
  s.read("test_labels", d.test_labels);
  s.reject_unknown();
  if (d.kind == "idx" && (d.train_images.empty() || d.train_labels.empty() || d.test_images.empty() ||
                          d.test_labels.empty())) {
    throw ConfigError(s.path("train_images"), "idx datasets need train/test image and label paths");
  }
}

void read_partition(Section s, PartitionSection& p) {
  if (auto n = s.child("scheme")) p.scheme = parse_enum(n, s.path("scheme"), data::parse_partition_scheme);
  s.read("alpha", p.alpha);
  s.read("samples_per_client", p.samples_per_client);
  s.read("dominant_count", p.dominant_count);
  s.read("tail_count_low", p.tail_count_low);
  s.read("tail_count_high", p.tail_count_high);
  s.reject_unknown();
}

void read_model(Section s, ModelSection& m) {
  s.read("hidden", m.hidden);
  if (auto n = s.child("activation")) m.activation = parse_enum(n, s.path("activation"), nn::parse_activation);
  s.reject_unknown();
  if (m.hidden.empty()) throw ConfigError(s.path("hidden"), "at least one hidden layer is required");
}

void read_fl(Section s, FlSection& f) {
  if (auto n = s.child("strategy")) f.strategy = parse_enum(n, s.path("strategy"), fl::parse_strategy);
  s.read("clients", f.clients);
  if (!s.has("rounds")) throw ConfigError(s.path("rounds"), "required key is missing");
  s.read("rounds", f.rounds);
  s.read_opt("clients_per_round", f.clients_per_round);
  s.read("local_epochs", f.local.epochs);
  s.read("base_lr", f.local.base_lr);
  s.read("lr_decay", f.local.lr_decay);
  s.read("momentum", f.local.momentum);
  s.read("weight_decay", f.local.weight_decay);
  s.read("batch_size", f.local.natural_batch);
  s.read("fedprox_mu", f.local.fedprox_mu);
  s.read("workers", f.workers);
  s.reject_unknown();
  if (f.rounds < 0) throw ConfigError(s.path("rounds"), "must be >= 0");
  if (f.clients < 1) throw ConfigError(s.path("clients"), "must be >= 1");
  if (f.workers < 1) throw ConfigError(s.path("workers"), "must be >= 1");
  if (f.local.epochs < 1) throw ConfigError(s.path("local_epochs"), "must be >= 1");
  if (f.local.natural_batch < 1) throw ConfigError(s.path("batch_size"), "must be >= 1");
  if (f.clients_per_round && *f.clients_per_round < 1) throw ConfigError(s.path("clients_per_round"), "must be >= 1");
}

void read_virtual(Section s, VirtualSection& v) {
  s.read_opt("classes", v.classes);
  s.read("per_class", v.per_class);
  s.read_opt("base_side", v.base_side);
  s.read_opt("up_factor", v.up_factor);
  s.read_opt("channels", v.channels);
  s.read("mean_separation", v.mean_separation);
  s.read("sigma", v.sigma);
  s.read_opt("seed", v.seed);
  s.reject_unknown();
}

void read_vhl(Section s, objective::VhlConfig& c, VirtualSection& v, bool& batch_given) {
  s.read("lambda", c.lambda);
  s.read("calibration_layer", c.calibration_layer);
  batch_given = s.has("virtual_batch");
  s.read("virtual_batch", c.virtual_batch);
  if (auto n = s.child("mode")) c.mode = parse_enum(n, s.path("mode"), objective::parse_mode);
  s.read("detach_virtual", c.detach_virtual);
  if (auto n = s.child("ce_weighting")) {
    c.ce_weighting = parse_enum(n, s.path("ce_weighting"), objective::parse_ce_weighting);
  }
  s.read("temperature", c.temperature);
  read_virtual(Section(s.child("virtual"), s.path("virtual")), v);
  s.reject_unknown();
  if (!(c.lambda >= 0.0)) throw ConfigError(s.path("lambda"), "must be >= 0");
  if (!(c.temperature > 0.0)) throw ConfigError(s.path("temperature"), "must be > 0");
  if (c.virtual_batch < 0) throw ConfigError(s.path("virtual_batch"), "must be >= 0");
}

void read_output(Section s, OutputSection& o) {
  s.read("metrics", o.metrics);
  s.read("features_dir", o.features_dir);
  s.read("feature_rounds", o.feature_rounds);
  s.read("feature_layer", o.feature_layer);
  s.reject_unknown();
}

void read_report(Section s, ReportSection& r) {
  s.read_opt("target_accuracy", r.target_accuracy);
  s.read("baseline_target", r.baseline_target);
  s.reject_unknown();
}

}  // namespace

int FlSection::resolved_clients_per_round() const {
  if (clients_per_round) return std::min(*clients_per_round, clients);
  return clients <= 10 ? std::max(1, clients / 2) : 10;
}

VirtualGeometry default_virtual_geometry(int input_dim) {
  if (input_dim == 3072) return {8, 4, 3};
  if (input_dim == 784) return {7, 4, 1};
  return {1, 1, input_dim};
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  if (!root || root.IsNull() || !root.IsMap()) throw ConfigError("", "config must be a mapping");

  ExperimentConfig c;
  Section top(root, "");
  if (!top.has("dataset")) throw ConfigError("dataset", "required section is missing");
  if (!top.has("fl")) throw ConfigError("fl.rounds", "required key is missing");
  read_dataset(Section(top.child("dataset"), "dataset"), c.dataset);
  read_partition(Section(top.child("partition"), "partition"), c.partition);
  read_model(Section(top.child("model"), "model"), c.model);
  read_fl(Section(top.child("fl"), "fl"), c.fl);
  bool batch_given = false;
  read_vhl(Section(top.child("vhl"), "vhl"), c.fl.local.vhl, c.virtual_data, batch_given);
  // B_v follows B_d unless set explicitly.
  if (!batch_given) c.fl.local.vhl.virtual_batch = c.fl.local.natural_batch;
  read_output(Section(top.child("output"), "output"), c.output);
  read_report(Section(top.child("report"), "report"), c.report);
  if (auto n = top.child("seeds")) {
    c.seeds = to_list<std::uint64_t>(n, "seeds", to_u64);
    if (c.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  }
  top.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

template <class T>
void emit_opt(YAML::Emitter& e, const char* key, const std::optional<T>& v) {
  if (v) e << YAML::Key << key << YAML::Value << *v;
}

void emit_ints(YAML::Emitter& e, const char* key, const std::vector<int>& v) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int x : v) e << x;
  e << YAML::EndSeq;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;

  const auto& d = c.dataset;
  e << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << d.kind;
  e << YAML::Key << "class_count" << YAML::Value << d.class_count;
  e << YAML::Key << "dim" << YAML::Value << d.dim;
  e << YAML::Key << "per_class" << YAML::Value << d.per_class;
  e << YAML::Key << "test_per_class" << YAML::Value << d.test_per_class;
  e << YAML::Key << "center_spread" << YAML::Value << d.center_spread;
  e << YAML::Key << "noise_sigma" << YAML::Value << d.noise_sigma;
  emit_opt(e, "seed", d.seed);
  e << YAML::Key << "train_images" << YAML::Value << d.train_images;
  e << YAML::Key << "train_labels" << YAML::Value << d.train_labels;
  e << YAML::Key << "test_images" << YAML::Value << d.test_images;
  e << YAML::Key << "test_labels" << YAML::Value << d.test_labels;
  e << YAML::EndMap;

  const auto& p = c.partition;
  e << YAML::Key << "partition" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "scheme" << YAML::Value << data::to_string(p.scheme);
  e << YAML::Key << "alpha" << YAML::Value << p.alpha;
  e << YAML::Key << "samples_per_client" << YAML::Value << p.samples_per_client;
  e << YAML::Key << "dominant_count" << YAML::Value << p.dominant_count;
  e << YAML::Key << "tail_count_low" << YAML::Value << p.tail_count_low;
  e << YAML::Key << "tail_count_high" << YAML::Value << p.tail_count_high;
  e << YAML::EndMap;

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  emit_ints(e, "hidden", c.model.hidden);
  e << YAML::Key << "activation" << YAML::Value << nn::to_string(c.model.activation);
  e << YAML::EndMap;

  const auto& f = c.fl;
  e << YAML::Key << "fl" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "strategy" << YAML::Value << fl::to_string(f.strategy);
  e << YAML::Key << "clients" << YAML::Value << f.clients;
  e << YAML::Key << "rounds" << YAML::Value << f.rounds;
  emit_opt(e, "clients_per_round", f.clients_per_round);
  e << YAML::Key << "local_epochs" << YAML::Value << f.local.epochs;
  e << YAML::Key << "base_lr" << YAML::Value << f.local.base_lr;
  e << YAML::Key << "lr_decay" << YAML::Value << f.local.lr_decay;
  e << YAML::Key << "momentum" << YAML::Value << f.local.momentum;
  e << YAML::Key << "weight_decay" << YAML::Value << f.local.weight_decay;
  e << YAML::Key << "batch_size" << YAML::Value << f.local.natural_batch;
  e << YAML::Key << "fedprox_mu" << YAML::Value << f.local.fedprox_mu;
  e << YAML::Key << "workers" << YAML::Value << f.workers;
  e << YAML::EndMap;

  const auto& h = f.local.vhl;
  const auto& v = c.virtual_data;
  e << YAML::Key << "vhl" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lambda" << YAML::Value << h.lambda;
  e << YAML::Key << "calibration_layer" << YAML::Value << h.calibration_layer;
  e << YAML::Key << "virtual_batch" << YAML::Value << h.virtual_batch;
  e << YAML::Key << "mode" << YAML::Value << objective::to_string(h.mode);
  e << YAML::Key << "detach_virtual" << YAML::Value << h.detach_virtual;
  e << YAML::Key << "ce_weighting" << YAML::Value << objective::to_string(h.ce_weighting);
  e << YAML::Key << "temperature" << YAML::Value << h.temperature;
  e << YAML::Key << "virtual" << YAML::Value << YAML::BeginMap;
  emit_opt(e, "classes", v.classes);
  e << YAML::Key << "per_class" << YAML::Value << v.per_class;
  emit_opt(e, "base_side", v.base_side);
  emit_opt(e, "up_factor", v.up_factor);
  emit_opt(e, "channels", v.channels);
  e << YAML::Key << "mean_separation" << YAML::Value << v.mean_separation;
  e << YAML::Key << "sigma" << YAML::Value << v.sigma;
  emit_opt(e, "seed", v.seed);
  e << YAML::EndMap;
  e << YAML::EndMap;

  const auto& o = c.output;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "metrics" << YAML::Value << o.metrics;
  e << YAML::Key << "features_dir" << YAML::Value << o.features_dir;
  emit_ints(e, "feature_rounds", o.feature_rounds);
  e << YAML::Key << "feature_layer" << YAML::Value << o.feature_layer;
  e << YAML::EndMap;

  e << YAML::Key << "report" << YAML::Value << YAML::BeginMap;
  emit_opt(e, "target_accuracy", c.report.target_accuracy);
  e << YAML::Key << "baseline_target" << YAML::Value << c.report.baseline_target;
  e << YAML::EndMap;

  e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto s : c.seeds) e << s;
  e << YAML::EndSeq;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace vhl::experiment

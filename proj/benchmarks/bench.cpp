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


#include <benchmark/benchmark.h>

#include <random>

#include "vhl/analysis/assignment.hpp"
#include "vhl/experiment/config.hpp"
#include "vhl/experiment/runner.hpp"
#include "vhl/fl/engine.hpp"
#include "vhl/nn/losses.hpp"
#include "vhl/nn/mlp.hpp"
#include "vhl/objective/vhl_loss.hpp"

namespace {

using namespace vhl;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
  return m;
}

Labels cyclic_labels(std::size_t n, int classes) {
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
  return y;
}

// 32-64-64 with a 10-class head, the reference scenario's network.
const nn::MlpSpec kSpec{{32, 64, 64}, 10, 10, nn::Activation::kRelu};

void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = state.range(0);
  const auto params = nn::init_params(kSpec, 1);
  const Matrix x = gaussian(batch, 32, 2);
  const Labels y = cyclic_labels(static_cast<std::size_t>(batch), 10);
  for (auto _ : state) {
    const auto trace = nn::forward(kSpec, params, x);
    const auto ce = nn::cross_entropy(trace.logits, y);
    benchmark::DoNotOptimize(nn::backward(kSpec, params, trace, ce.grad));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(128)->Arg(256);

void BM_SupCon(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix f = gaussian(n, 64, 3);
  const Labels y = cyclic_labels(static_cast<std::size_t>(n), 10);
  std::vector<bool> frozen(static_cast<std::size_t>(n), false);
  std::fill(frozen.begin() + n / 2, frozen.end(), true);
  for (auto _ : state) benchmark::DoNotOptimize(nn::supcon_loss(f, y, 0.07, frozen));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SupCon)->Arg(128)->Arg(256);

void BM_VhlStep(benchmark::State& state) {
  const auto params = nn::init_params(kSpec, 4);
  const Matrix nx = gaussian(64, 32, 5), vx = gaussian(64, 32, 6);
  const Labels ny = cyclic_labels(64, 10), vy = cyclic_labels(64, 10);
  objective::VhlConfig cfg;
  cfg.mode = state.range(0) == 0 ? objective::VhlMode::kNaive : objective::VhlMode::kFull;
  for (auto _ : state) benchmark::DoNotOptimize(objective::vhl_step_loss(kSpec, params, nx, ny, vx, vy, cfg));
}
BENCHMARK(BM_VhlStep)->ArgName("full")->Arg(0)->Arg(1);

void BM_Hungarian(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix cost = gaussian(n, n, 7).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(analysis::min_cost_assignment(cost));
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(4)->Range(4, 256);

void BM_Round(benchmark::State& state) {
  auto config = experiment::parse_config(R"(
dataset: {class_count: 10, dim: 32, per_class: 500, noise_sigma: 1.5}
partition: {scheme: lda, alpha: 0.1}
model: {hidden: [64, 64]}
fl: {clients: 10, rounds: 1, batch_size: 64}
vhl: {mode: full, virtual_batch: 64, virtual: {base_side: 2, up_factor: 2, channels: 2}}
)");
  if (state.range(0) == 0) config.fl.local.vhl.mode = objective::VhlMode::kOff;
  const auto ctx = experiment::prepare_seed(config, 0);
  const fl::RoundOptions opts{config.fl.resolved_clients_per_round(), 1};
  for (auto _ : state) benchmark::DoNotOptimize(fl::run_round(ctx->initial_state, ctx->setup, opts, config.fl.local));
}
BENCHMARK(BM_Round)->ArgName("vhl")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

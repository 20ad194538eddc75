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


#include "vhl/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vhl/errors.hpp"

namespace vhl::data {

PartitionScheme parse_partition_scheme(const std::string& name) {
  if (name == "lda") return PartitionScheme::kLda;
  if (name == "two_class") return PartitionScheme::kTwoClass;
  if (name == "subset") return PartitionScheme::kSubset;
  throw InputError("unknown partition scheme '" + name + "' (expected lda, two_class or subset)");
}

std::string to_string(PartitionScheme s) {
  switch (s) {
    case PartitionScheme::kLda:
      return "lda";
    case PartitionScheme::kTwoClass:
      return "two_class";
    case PartitionScheme::kSubset:
      return "subset";
  }
  return "?";
}

void PartitionSpec::validate() const {
  if (clients < 1) throw InputError("partition needs at least one client");
  if (scheme == PartitionScheme::kLda && !(alpha > 0.0)) throw InputError("lda alpha must be positive");
  if (scheme == PartitionScheme::kTwoClass && samples_per_client < 2) {
    throw InputError("two_class needs at least 2 samples per client");
  }
  if (scheme == PartitionScheme::kSubset &&
      (dominant_count < 1 || tail_count_low < 0 || tail_count_high < tail_count_low)) {
    throw InputError("subset counts must satisfy dominant >= 1 and 0 <= low <= high");
  }
}

namespace {

constexpr int kMaxAttempts = 100;

std::vector<std::vector<std::size_t>> indices_by_class(const LabeledDataset& ds) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  return by_class;
}

std::vector<double> dirichlet(Rng& rng, double alpha, int k) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> q(static_cast<std::size_t>(k));
  for (int tries = 0; tries < kMaxAttempts; ++tries) {
    double sum = 0.0;
    for (auto& v : q) sum += (v = gamma(rng));
    if (sum > 0.0) {
      for (auto& v : q) v /= sum;
      return q;
    }
  }
  // Every draw underflowed: the alpha -> 0 limit puts all mass on one client.
  std::fill(q.begin(), q.end(), 0.0);
  q[std::uniform_int_distribution<std::size_t>(0, q.size() - 1)(rng)] = 1.0;
  return q;
}

// Splits n items by proportions q; remainders go to the largest fractional
// parts, ties to the lowest client id.
std::vector<std::size_t> largest_remainder(const std::vector<double>& q, std::size_t n) {
  std::vector<std::size_t> counts(q.size());
  std::vector<double> frac(q.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double exact = q[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    frac[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  // Rounding can leave assigned slightly above n when q sums past 1.
  while (assigned > n) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  for (std::size_t i = 0; assigned < n; i = (i + 1) % order.size(), ++assigned) ++counts[order[i]];
  return counts;
}

std::vector<ClientShard> make_shards(int clients) {
  std::vector<ClientShard> shards(static_cast<std::size_t>(clients));
  for (int k = 0; k < clients; ++k) shards[static_cast<std::size_t>(k)].owner = k;
  return shards;
}

void sort_shards(std::vector<ClientShard>& shards) {
  for (auto& s : shards) std::sort(s.indices.begin(), s.indices.end());
}

}  // namespace

std::vector<ClientShard> partition_lda(const LabeledDataset& ds, int clients, double alpha, std::uint64_t seed) {
  if (clients < 1) throw PartitionError("lda needs at least one client");
  if (!(alpha > 0.0)) throw PartitionError("lda alpha must be positive");
  if (ds.size() < static_cast<std::size_t>(clients)) {
    throw PartitionError("dataset of " + std::to_string(ds.size()) + " samples cannot feed " + std::to_string(clients) +
                         " clients");
  }
  const auto by_class = indices_by_class(ds);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(attempt)}));
    auto shards = make_shards(clients);
    for (const auto& members : by_class) {
      auto idx = members;
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto counts = largest_remainder(dirichlet(rng, alpha, clients), idx.size());
      std::size_t pos = 0;
      for (int k = 0; k < clients; ++k) {
        auto& dst = shards[static_cast<std::size_t>(k)].indices;
        dst.insert(dst.end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                   idx.begin() + static_cast<std::ptrdiff_t>(pos + counts[static_cast<std::size_t>(k)]));
        pos += counts[static_cast<std::size_t>(k)];
      }
    }
    if (std::all_of(shards.begin(), shards.end(), [](const ClientShard& s) { return !s.indices.empty(); })) {
      sort_shards(shards);
      return shards;
    }
  }
  throw PartitionError("lda left a client empty in all " + std::to_string(kMaxAttempts) + " attempts");
}

std::vector<ClientShard> partition_two_class(const LabeledDataset& ds, int clients, int samples_per_client,
                                             std::uint64_t seed) {
  if (clients < 1) throw PartitionError("two_class needs at least one client");
  if (ds.class_count < 2) throw PartitionError("two_class needs at least 2 classes");
  if (samples_per_client < 2) throw PartitionError("two_class needs at least 2 samples per client");
  const std::size_t first_half = static_cast<std::size_t>((samples_per_client + 1) / 2);
  const std::size_t second_half = static_cast<std::size_t>(samples_per_client / 2);
  const auto by_class = indices_by_class(ds);

  std::size_t total = 0;
  for (const auto& m : by_class) total += m.size();
  if (total < static_cast<std::size_t>(clients) * static_cast<std::size_t>(samples_per_client)) {
    throw PartitionError("two_class needs " + std::to_string(clients * samples_per_client) + " samples, dataset has " +
                         std::to_string(total));
  }

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(attempt)}));
    auto pools = by_class;
    for (auto& p : pools) std::shuffle(p.begin(), p.end(), rng);
    std::vector<std::size_t> used(pools.size(), 0);
    auto shards = make_shards(clients);

    // Picks a class with at least `need` unused samples, weighted by how many
    // remain, or -1 when none qualifies.
    auto pick = [&](std::size_t need, int exclude) {
      std::vector<double> w(pools.size(), 0.0);
      double sum = 0.0;
      for (std::size_t c = 0; c < pools.size(); ++c) {
        const std::size_t left = pools[c].size() - used[c];
        if (static_cast<int>(c) != exclude && left >= need) sum += (w[c] = static_cast<double>(left));
      }
      if (sum == 0.0) return -1;
      return static_cast<int>(std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng));
    };
    auto take = [&](int c, std::size_t count, std::vector<std::size_t>& dst) {
      auto& pool = pools[static_cast<std::size_t>(c)];
      auto& u = used[static_cast<std::size_t>(c)];
      dst.insert(dst.end(), pool.begin() + static_cast<std::ptrdiff_t>(u),
                 pool.begin() + static_cast<std::ptrdiff_t>(u + count));
      u += count;
    };

    bool ok = true;
    for (int k = 0; k < clients && ok; ++k) {
      const int a = pick(first_half, -1);
      if (a < 0) {
        ok = false;
        break;
      }
      take(a, first_half, shards[static_cast<std::size_t>(k)].indices);
      const int b = pick(second_half, a);
      if (b < 0) {
        ok = false;
        break;
      }
      take(b, second_half, shards[static_cast<std::size_t>(k)].indices);
    }
    if (ok) {
      sort_shards(shards);
      return shards;
    }
  }
  throw PartitionError("two_class could not find a feasible class assignment in " + std::to_string(kMaxAttempts) +
                       " attempts (insufficient samples per class)");
}

std::vector<ClientShard> partition_subset(const LabeledDataset& ds, int clients, int dominant_count,
                                          int tail_count_low, int tail_count_high, std::uint64_t seed) {
  if (clients < 1) throw PartitionError("subset needs at least one client");
  if (clients > ds.class_count) {
    throw PartitionError("subset needs clients <= class_count (" + std::to_string(clients) + " > " +
                         std::to_string(ds.class_count) + ")");
  }
  if (dominant_count < 1 || tail_count_low < 0 || tail_count_high < tail_count_low) {
    throw PartitionError("subset counts must satisfy dominant >= 1 and 0 <= low <= high");
  }
  const auto by_class = indices_by_class(ds);
  Rng rng(seed);
  auto shards = make_shards(clients);

  for (int c = 0; c < ds.class_count; ++c) {
    auto pool = by_class[static_cast<std::size_t>(c)];
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> takers;
    int owner = -1;
    for (int k = 0; k < clients; ++k) {
      if (k % ds.class_count == c) {
        owner = k;
      } else {
        takers.push_back(k);
      }
    }

    long avail = static_cast<long>(pool.size()) - (owner >= 0 ? dominant_count : 0);
    const long m = static_cast<long>(takers.size());
    if (avail < m * tail_count_low) {
      throw PartitionError("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                           " samples, subset needs at least " +
                           std::to_string((owner >= 0 ? dominant_count : 0) + m * tail_count_low));
    }
    // Coin flip per taker, capped by how many high draws the class can afford.
    const int gap = tail_count_high - tail_count_low;
    const long max_high = gap == 0 ? m : std::min(m, (avail - m * tail_count_low) / gap);
    std::vector<bool> high(takers.size());
    std::bernoulli_distribution coin(0.5);
    std::vector<std::size_t> high_ids;
    for (std::size_t t = 0; t < takers.size(); ++t) {
      high[t] = coin(rng);
      if (high[t]) high_ids.push_back(t);
    }
    std::shuffle(high_ids.begin(), high_ids.end(), rng);
    for (std::size_t j = static_cast<std::size_t>(max_high); j < high_ids.size(); ++j) high[high_ids[j]] = false;

    std::size_t pos = 0;
    auto give = [&](int k, std::size_t count) {
      auto& dst = shards[static_cast<std::size_t>(k)].indices;
      dst.insert(dst.end(), pool.begin() + static_cast<std::ptrdiff_t>(pos),
                 pool.begin() + static_cast<std::ptrdiff_t>(pos + count));
      pos += count;
    };
    if (owner >= 0) give(owner, static_cast<std::size_t>(dominant_count));
    for (std::size_t t = 0; t < takers.size(); ++t) {
      give(takers[t], static_cast<std::size_t>(high[t] ? tail_count_high : tail_count_low));
    }
  }
  for (const auto& s : shards) {
    if (s.indices.empty()) throw PartitionError("subset left client " + std::to_string(s.owner) + " empty");
  }
  sort_shards(shards);
  return shards;
}

std::vector<ClientShard> partition(const LabeledDataset& ds, const PartitionSpec& spec) {
  spec.validate();
  switch (spec.scheme) {
    case PartitionScheme::kLda:
      return partition_lda(ds, spec.clients, spec.alpha, spec.seed);
    case PartitionScheme::kTwoClass:
      return partition_two_class(ds, spec.clients, spec.samples_per_client, spec.seed);
    case PartitionScheme::kSubset:
      return partition_subset(ds, spec.clients, spec.dominant_count, spec.tail_count_low, spec.tail_count_high,
                              spec.seed);
  }
  throw InputError("unknown partition scheme");
}

}  // namespace vhl::data

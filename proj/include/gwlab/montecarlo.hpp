#pragma once

// Forward simulation of the multitype process, aggregated by type: each
// generation draws, for every parent type, the summed offspring of all
// parents of that type. Replicate r always uses Philox stream r, and
// replicates are processed in fixed-size blocks merged in block order, so
// results do not depend on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gwlab/errors.hpp"
#include "gwlab/model.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

struct SimConfig {
  std::uint64_t master_seed = 1;
  std::uint64_t replicates = 1;
  long long max_steps = 1000;
  std::vector<long long> snapshot_times;
  std::int64_t population_cap = std::int64_t{1} << 50;
  unsigned workers = 0;  // 0: hardware concurrency
  /// Stop as soon as types 1..N-1 are extinct (enough for W_N); type N is not simulated.
  bool stop_when_lower_extinct = false;
  /// conditional_estimate refuses acceptance rates below this.
  double min_acceptance = 1e-5;

  void validate() const {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (population_cap < 1) throw std::invalid_argument("population_cap must be >= 1");
    for (long long m : snapshot_times)
      if (m < 0) throw std::invalid_argument("snapshot_times must be >= 0");
  }
};

struct TrajectorySummary {
  std::optional<long long> extinction_time;  // empty when censored
  bool cap_exceeded = false;
  long long steps = 0;  // generations simulated
  /// Z(m) for each requested m; empty vector when the run stopped before m.
  std::vector<std::vector<std::int64_t>> snapshots;
  std::int64_t w_total = 0;  // type-N children of lower-type parents
  std::int64_t w_check = 0;  // same count from the type-N balance Z_N(t+1) - own births
  std::optional<long long> lower_extinction_time;

  bool censored() const noexcept { return !extinction_time.has_value(); }
};

struct EstimateWithCI {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  double acceptance_rate = 1.0;
};

/// Receives every generation's offspring blocks: blocks[i*N + j] is the number
/// of type-j children of all type-i parents.
using GenerationObserver =
    std::function<void(long long t, const std::vector<std::int64_t>& z_before, const std::vector<std::int64_t>& blocks,
                        const std::vector<std::int64_t>& z_after)>;

inline TrajectorySummary simulate_once(const ProcessSpec& spec, const SimConfig& config, std::uint64_t stream,
                                       const GenerationObserver& observer = {}) {
  const std::size_t types = spec.types();
  const std::size_t last = types - 1;
  Philox4x32 rng(config.master_seed, stream);

  TrajectorySummary out;
  out.snapshots.assign(config.snapshot_times.size(), {});
  std::vector<std::int64_t> z(types, 0), next(types, 0), blocks(types * types, 0);
  z[0] = 1;

  auto record = [&](long long t) {
    for (std::size_t k = 0; k < config.snapshot_times.size(); ++k)
      if (config.snapshot_times[k] == t) out.snapshots[k] = z;
  };
  auto lower_extinct = [&] {
    for (std::size_t i = 0; i < last; ++i)
      if (z[i] != 0) return false;
    return true;
  };
  auto all_extinct = [&] { return lower_extinct() && z[last] == 0; };

  record(0);
  if (lower_extinct()) out.lower_extinction_time = 0;

  long long t = 0;
  bool stopped_early = false;
  while (t < config.max_steps) {
    if (all_extinct()) break;
    if (config.stop_when_lower_extinct && out.lower_extinction_time) {
      stopped_early = true;
      break;
    }
    std::fill(next.begin(), next.end(), 0);
    std::fill(blocks.begin(), blocks.end(), 0);
    const std::size_t sim_types = config.stop_when_lower_extinct ? last : types;
    for (std::size_t i = 0; i < sim_types; ++i) {
      if (z[i] == 0) continue;
      std::span<std::int64_t> row(blocks.data() + i * types, types);
      sample_offspring_sum(spec.law(i), rng, z[i], row);
      for (std::size_t j = 0; j < types; ++j) next[j] += row[j];
    }
    for (std::size_t i = 0; i < last; ++i) out.w_total += blocks[i * types + last];
    out.w_check += next[last] - blocks[last * types + last];
    if (observer) observer(t, z, blocks, next);
    z.swap(next);
    ++t;
    record(t);
    if (!out.lower_extinction_time && lower_extinct()) out.lower_extinction_time = t;
    std::int64_t total = 0;
    for (auto c : z) total += c;
    if (total > config.population_cap) {
      out.cap_exceeded = true;
      break;
    }
  }
  out.steps = t;
  if (!stopped_early && !out.cap_exceeded && all_extinct()) {
    out.extinction_time = t;
    for (std::size_t k = 0; k < config.snapshot_times.size(); ++k)
      if (config.snapshot_times[k] > t) out.snapshots[k].assign(types, 0);
  }
  return out;
}

namespace detail {

inline constexpr std::uint64_t kBlockSize = 4096;

/// Runs `per_block(begin, end)` over fixed replicate blocks on a worker pool;
/// results are returned in block order.
template <class Acc, class Fn>
std::vector<Acc> run_blocks(std::uint64_t replicates, unsigned workers, Fn&& per_block) {
  const std::uint64_t blocks = (replicates + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> results(blocks);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(blocks, 1)));
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      const std::uint64_t begin = b * kBlockSize;
      const std::uint64_t end = std::min(replicates, begin + kBlockSize);
      results[b] = per_block(begin, end);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return results;
}

}  // namespace detail

struct PmfEstimate {
  std::vector<EstimateWithCI> pmf;  // pmf[n], n = 0..max_steps
  std::uint64_t replicates = 0;
  std::uint64_t censored = 0;

  double total_mass() const {
    double s = 0.0;
    for (const auto& e : pmf) s += e.estimate;
    return s;
  }
};

/// Empirical law of the extinction time with binomial standard errors.
inline PmfEstimate estimate_pmf_T(const ProcessSpec& spec, const SimConfig& config) {
  config.validate();
  const auto len = static_cast<std::size_t>(config.max_steps) + 1;
  SimConfig cfg = config;
  cfg.snapshot_times.clear();
  cfg.stop_when_lower_extinct = false;
  auto blocks = detail::run_blocks<std::vector<std::uint64_t>>(
      config.replicates, config.workers, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<std::uint64_t> counts(len + 1, 0);  // last slot: censored
        for (std::uint64_t r = begin; r < end; ++r) {
          const auto tr = simulate_once(spec, cfg, r);
          if (tr.extinction_time) ++counts[static_cast<std::size_t>(*tr.extinction_time)];
          else ++counts[len];
        }
        return counts;
      });
  std::vector<std::uint64_t> counts(len + 1, 0);
  for (const auto& b : blocks)
    for (std::size_t k = 0; k < b.size(); ++k) counts[k] += b[k];

  PmfEstimate out;
  out.replicates = config.replicates;
  out.censored = counts[len];
  const auto reps = static_cast<double>(config.replicates);
  out.pmf.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double p = static_cast<double>(counts[k]) / reps;
    out.pmf[k] = {p, std::sqrt(p * (1.0 - p) / reps), config.replicates, 1.0};
  }
  return out;
}

using TrajectoryFunctional = std::function<double(const TrajectorySummary&)>;

/// Mean of `functional` over trajectories with T_N = n exactly (rejection).
inline EstimateWithCI conditional_estimate(const ProcessSpec& spec, const SimConfig& config, long long n,
                                           const TrajectoryFunctional& functional) {
  config.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  for (long long m : config.snapshot_times)
    if (m > n) throw std::invalid_argument("snapshot times must not exceed n");
  SimConfig cfg = config;
  cfg.max_steps = n;
  cfg.stop_when_lower_extinct = false;

  struct Acc {
    std::uint64_t hits = 0;
    double sum = 0.0;
    double sumsq = 0.0;
  };
  auto blocks = detail::run_blocks<Acc>(config.replicates, config.workers, [&](std::uint64_t begin, std::uint64_t end) {
    Acc acc;
    for (std::uint64_t r = begin; r < end; ++r) {
      const auto tr = simulate_once(spec, cfg, r);
      if (tr.extinction_time && *tr.extinction_time == n) {
        const double v = functional(tr);
        ++acc.hits;
        acc.sum += v;
        acc.sumsq += v * v;
      }
    }
    return acc;
  });
  Acc total;
  for (const auto& b : blocks) {
    total.hits += b.hits;
    total.sum += b.sum;
    total.sumsq += b.sumsq;
  }
  const double rate = static_cast<double>(total.hits) / static_cast<double>(config.replicates);
  if (total.hits == 0 || rate < config.min_acceptance) throw AcceptanceTooLow(rate, total.hits);
  const auto h = static_cast<double>(total.hits);
  const double mean = total.sum / h;
  const double var = total.hits > 1 ? std::max(0.0, (total.sumsq - h * mean * mean) / (h - 1.0)) : 0.0;
  return {mean, std::sqrt(var / h), total.hits, rate};
}

/// Per-replicate values of W_N (types 1..N-1 simulated to extinction).
/// Replicates still alive at max_steps are reported through `censored`.
struct WSample {
  std::vector<std::int64_t> values;
  std::uint64_t censored = 0;
};

inline WSample sample_w(const ProcessSpec& spec, const SimConfig& config) {
  config.validate();
  SimConfig cfg = config;
  cfg.snapshot_times.clear();
  cfg.stop_when_lower_extinct = true;
  struct Acc {
    std::vector<std::int64_t> values;
    std::uint64_t censored = 0;
  };
  auto blocks = detail::run_blocks<Acc>(config.replicates, config.workers, [&](std::uint64_t begin, std::uint64_t end) {
    Acc acc;
    acc.values.reserve(end - begin);
    for (std::uint64_t r = begin; r < end; ++r) {
      const auto tr = simulate_once(spec, cfg, r);
      if (!tr.lower_extinction_time) ++acc.censored;
      acc.values.push_back(tr.w_total);
    }
    return acc;
  });
  WSample out;
  for (auto& b : blocks) {
    out.values.insert(out.values.end(), b.values.begin(), b.values.end());
    out.censored += b.censored;
  }
  return out;
}

}  // namespace gwlab

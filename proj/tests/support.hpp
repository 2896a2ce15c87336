#pragma once

#include <random>
#include <string>
#include <vector>

#include "gwlab/gwlab.hpp"

namespace gwtest {

inline std::string model_path(const std::string& name) {
  return std::string(GWLAB_SOURCE_DIR) + "/config/models/" + name + ".json";
}

inline gwlab::ProcessSpec load(const std::string& name) { return gwlab::load_model_config(model_path(name)).spec; }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Critical own-type law with mean exactly 1 and positive variance.
inline gwlab::Family random_critical_family(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 1)(rng)) {
    case 0: return gwlab::Geometric{1.0};
    default: return gwlab::Poisson{1.0};
  }
}

inline gwlab::Family random_link_family(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mu(0.1, 2.0);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return gwlab::Geometric{mu(rng)};
    case 1: return gwlab::Poisson{mu(rng)};
    default: return gwlab::Bernoulli{std::uniform_real_distribution<double>(0.05, 1.0)(rng)};
  }
}

/// Finite own-type law {0: p, 1: 1-2p, 2: p} plus a Bernoulli-like link column.
inline gwlab::OffspringLaw random_table_law(std::mt19937_64& rng, std::size_t parent, std::size_t types) {
  const double p = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
  gwlab::FiniteTable t;
  const std::size_t width = types - parent;
  auto row = [&](long long own, long long link, double prob) {
    gwlab::TableEntry e;
    e.counts.assign(width, 0);
    e.counts[0] = own;
    if (width > 1) e.counts[1] = link;
    e.p = prob;
    t.entries.push_back(e);
  };
  row(0, 0, p);
  row(1, 1, 1.0 - 2.0 * p);
  row(2, width > 1 ? 1 : 0, p);
  return {parent, t};
}

/// Random decomposable strongly critical spec with 1..max_types types.
inline gwlab::ProcessSpec random_spec(std::mt19937_64& rng, std::size_t max_types = 4) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_types)(rng);
  std::vector<gwlab::OffspringLaw> laws;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
      laws.push_back(random_table_law(rng, i, n));
      continue;
    }
    gwlab::ProductForm pf;
    pf.children.emplace_back(i, random_critical_family(rng));
    for (std::size_t j = i + 1; j < n; ++j)
      if (j == i + 1 || std::uniform_int_distribution<int>(0, 2)(rng) == 0)
        pf.children.emplace_back(j, random_link_family(rng));
    laws.push_back({i, pf});
  }
  return gwlab::ProcessSpec(std::move(laws));
}

inline std::vector<double> random_point(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& x : s) x = u(rng);
  return s;
}

}  // namespace gwtest

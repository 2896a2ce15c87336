// Laplace transform of the last type's population shortly before extinction,
// next to its limit 1/(1+lambda)^2.
//   demo_conditional config/models/zoo2.json 20000 200

#include <cmath>
#include <cstdlib>
#include <iostream>

#include "gwlab/gwlab.hpp"

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: demo_conditional <model.json> <n> <k>\n";
    return 2;
  }
  const auto cfg = gwlab::load_model_config(argv[1]);
  const long long n = std::atoll(argv[2]), k = std::atoll(argv[3]);
  const auto md = gwlab::compute_moments(cfg.spec);
  const double b = md.half_variance.back();
  const auto table = gwlab::build_survival_table(cfg.spec, n);
  for (double lambda : {0.5, 1.0, 2.0}) {
    gwlab::Point s(cfg.spec.types(), gwlab::Prob::one());
    s.back() = gwlab::exp_prob(lambda / (b * double(k)));
    const double v = gwlab::conditional_transform(cfg.spec, table, s, n - k, n);
    std::cout << "lambda " << lambda << ": " << v << " (limit " << gwlab::limit_death(lambda) << ")\n";
  }
}

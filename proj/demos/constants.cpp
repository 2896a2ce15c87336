// Prints the constants of a model and checks the c_{1,N} identity.
//   demo_constants config/models/zoo3.json

#include <iostream>

#include "gwlab/gwlab.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: demo_constants <model.json>\n";
    return 2;
  }
  const auto cfg = gwlab::load_model_config(argv[1]);
  const auto v = gwlab::validate_hypothesis_A(cfg.spec, cfg.validation);
  if (!v.ok()) {
    for (const auto& x : v.violations) std::cerr << x.describe() << "\n";
    return 1;
  }
  const auto cs = gwlab::constant_set(v.moments);
  for (std::size_t i = 0; i < cs.n; ++i)
    std::cout << "type " << i + 1 << ": gamma = " << cs.gamma[i] << ", c = " << cs.c[i] << ", g = " << cs.g[i] << "\n";
  if (cs.n >= 2) {
    const auto id = gwlab::check_identity_c1N(cs);
    std::cout << "identity residual " << id.residual << "\n";
  }
}

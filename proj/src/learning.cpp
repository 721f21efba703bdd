#include "fedsllm/learning.hpp"

#include <cmath>
#include <sstream>

#include "fedsllm/error.hpp"

namespace fedsllm {

void LearningHyperParams::validate() const {
  const double L = lipschitz_L;
  const double gamma = strong_convexity_gamma;
  std::ostringstream os;
  if (!(gamma > 0.0 && gamma <= L && std::isfinite(L))) {
    os << "need 0 < gamma <= L, got gamma=" << gamma << " L=" << L;
  } else if (!(surrogate_weight_xi > 0.0 && surrogate_weight_xi <= gamma / L)) {
    os << "need 0 < xi <= gamma/L = " << gamma / L
       << ", got xi=" << surrogate_weight_xi;
  } else if (!(step_size_delta > 0.0 && step_size_delta < 2.0 / L)) {
    os << "need 0 < delta < 2/L = " << 2.0 / L
       << ", got delta=" << step_size_delta;
  } else if (!(global_accuracy_eps0 > 0.0 && global_accuracy_eps0 < 1.0)) {
    os << "need 0 < eps0 < 1, got eps0=" << global_accuracy_eps0;
  } else {
    return;
  }
  throw HyperparameterError(os.str());
}

double LearningHyperParams::local_iteration_constant() const {
  const double L = lipschitz_L;
  const double delta = step_size_delta;
  if (!(delta > 0.0 && delta < 2.0 / L)) {
    throw HyperparameterError("local iterations need 0 < delta < 2/L");
  }
  return 2.0 / ((2.0 - L * delta) * delta * strong_convexity_gamma);
}

}  // namespace fedsllm

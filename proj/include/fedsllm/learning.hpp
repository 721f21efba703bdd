#pragma once

namespace fedsllm {

/// Convergence constants of the federated training loop.
///
/// Invariants (checked by validate()): 0 < gamma <= L, 0 < xi <= gamma/L,
/// 0 < delta < 2/L, 0 < eps0 < 1.
struct LearningHyperParams {
  double lipschitz_L = 4.0;
  double strong_convexity_gamma = 2.0;
  double surrogate_weight_xi = 0.1;
  double step_size_delta = 0.1;
  double global_accuracy_eps0 = 1e-3;

  /// Throws HyperparameterError naming the violated hypothesis.
  void validate() const;

  /// v = 2 / ((2 - L*delta) * delta * gamma), the local-iteration constant.
  double local_iteration_constant() const;
};

}  // namespace fedsllm

#pragma once

// Desk-scale federated split training with LoRA adapters.
//
// The model is linear in its trainable parameters so that every loss is an
// exact quadratic:
//
//   client:  Z  = X (W0 + Bc Ac)      cut-layer activations
//            Z0 = X W0                frozen-path activations
//   server:  Y^ = Z V0 + Z0 Bs As
//
// W0, Ac, V0, As are frozen; Bc (client half) and Bs (server half) are the
// trainable LoRA factors. Loss is mean squared error per user plus an
// optional ridge term mu * |theta|^2.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedsllm/learning.hpp"

namespace fedsllm::train {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Frozen base plus low-rank product: effective = base + down * up.
struct LoraAdapter {
  MatrixXd base;  // omega_0, d x k, frozen
  MatrixXd down;  // B, d x r, trainable
  MatrixXd up;    // A_lora, r x k, frozen

  int rank() const { return static_cast<int>(down.cols()); }
  MatrixXd effective() const { return base + down * up; }

  /// Throws DimensionError on inconsistent shapes or r > min(d, k)/2.
  void validate() const;
};

struct Dataset {
  std::vector<MatrixXd> features;  // per user, D_k x d
  std::vector<MatrixXd> targets;   // per user, D_k x t (t = 1 or outputs)

  int users() const { return static_cast<int>(features.size()); }
  int feature_dim() const;
  int target_dim() const;
  long long total_samples() const;
  std::vector<long long> sizes() const;

  /// Throws DimensionError when shapes disagree or a value is not finite.
  void validate() const;
};

struct ModelShape {
  int features = 16;
  int hidden = 8;
  int outputs = 4;
  int client_rank = 2;
  int server_rank = 2;
};

/// Frozen parts of the split model. The client adapter's up factor is
/// built so that Ac V0 and As are disjoint rows of one orthogonal matrix,
/// which decouples the two halves in the loss curvature.
struct SplitModel {
  LoraAdapter client;  // W0 (d x h), Bc (d x r), Ac (r x h)
  LoraAdapter server;  // V0 (h x o), Bs (h x rs), As (rs x o)
  VectorXd target_direction;  // embeds scalar targets into the output space

  static SplitModel make(const ModelShape& shape, std::uint64_t seed);

  int features() const { return static_cast<int>(client.base.rows()); }
  int hidden() const { return static_cast<int>(client.base.cols()); }
  int outputs() const { return static_cast<int>(server.base.cols()); }
  int num_params() const;
  /// Client share of the trainable parameter count.
  double client_parameter_fraction() const;
};

/// A point or direction in trainable-parameter space.
struct Params {
  MatrixXd client;  // shape of Bc
  MatrixXd server;  // shape of Bs

  static Params zeros_like(const SplitModel& model);
  VectorXd flatten() const;
  static Params unflatten(const VectorXd& v, const SplitModel& model);

  Params& operator+=(const Params& o);
  Params& operator-=(const Params& o);
  Params& operator*=(double s);
  double dot(const Params& o) const;
  double squared_norm() const { return dot(*this); }
};

Params operator+(Params a, const Params& b);
Params operator-(Params a, const Params& b);
Params operator*(double s, Params a);

/// Global gradient broadcast at the start of a round, stamped with it.
struct GlobalGradient {
  Params grad;
  int round = -1;
};

struct SplitTrainState {
  SplitModel model;
  Params global;  // (Bc, Bs) after the last aggregation
  double ridge = 0.0;
  int round = 0;
  int local_iter = 0;
  std::vector<double> loss_history;  // F after each completed round
};

SplitTrainState make_state(const SplitModel& model, double ridge = 0.0);

/// Targets as the model sees them: D_k x outputs.
MatrixXd embed_targets(const SplitModel& model, const MatrixXd& targets);

/// F_k at the global point plus offset h (zero when omitted).
double local_loss(const SplitTrainState& state, int user, const Dataset& data,
                  const Params* h = nullptr);

/// F = sum_k (D_k/D) F_k.
double global_loss(const SplitTrainState& state, const Dataset& data,
                   const Params* h = nullptr);

/// Gradient of F_k computed along the split path: client forward to the
/// cut layer, server forward/backward, cut-layer gradient back to the
/// client.
Params local_gradient(const SplitTrainState& state, int user,
                      const Dataset& data, const Params* h = nullptr);

/// Gradient sync sub-step: every client sends grad F_k, the server returns
/// the D_k-weighted average stamped with the current round.
GlobalGradient sync_global_gradient(const SplitTrainState& state,
                                    const Dataset& data);

/// G_k(h) = F_k(w + h) - (grad F_k(w) - xi grad F(w))^T h.
/// Throws DomainError if `g` was not stamped with the current round.
double surrogate(const SplitTrainState& state, int user, const Dataset& data,
                 const Params& h, double xi, const GlobalGradient& g);

Params surrogate_gradient(const SplitTrainState& state, int user,
                          const Dataset& data, const Params& h, double xi,
                          const GlobalGradient& g);

/// Dense Hessian of F_k in flattened coordinates (constant: F_k is
/// quadratic). Includes the ridge term.
MatrixXd local_hessian(const SplitTrainState& state, int user,
                       const Dataset& data);

/// Exact minimiser of G_k from its normal equations.
Params surrogate_minimizer(const SplitTrainState& state, int user,
                           const Dataset& data, double xi,
                           const GlobalGradient& g);

struct LocalResult {
  Params h;
  int iterations = 0;
  double gap_ratio = 0.0;  // (G(h) - G*) / (G(0) - G*)
};

/// Gradient descent h <- h - delta grad G_k(h) from h = 0 until the gap
/// ratio is at most eta. Throws HyperparameterError when delta >= 2/L or
/// the gap ratio grows for 10 consecutive steps.
LocalResult local_gd_round(const SplitTrainState& state, int user,
                           const Dataset& data, double eta,
                           const LearningHyperParams& h,
                           const GlobalGradient& g);

/// One transcript line per user per round.
struct RoundRecord {
  int round = 0;
  int user = 0;
  int local_iters = 0;
  double F_k = 0.0;
  double gap_ratio = 0.0;
  long long bytes_up_main = 0;  // cut-layer payload per local iteration
  long long bytes_up_fed = 0;   // client-half update per round
  long long bytes_up_sync = 0;  // gradient sync per round
};

std::string to_json_line(const RoundRecord& r);

/// One global round for all users. Both halves move by (1/K) sum_k h_k.
/// Records are appended to `transcript` when given.
void run_round(SplitTrainState& state, const Dataset& data, double eta,
               const LearningHyperParams& h,
               std::vector<RoundRecord>* transcript = nullptr);

struct Smoothness {
  double L = 0.0;
  double gamma = 0.0;
  double gamma_unregularised = 0.0;
  double ridge = 0.0;  // > 0 when the ridge term had to be switched on
};

/// Extreme eigenvalues of the per-user Hessians, max/min across users.
/// When gamma < 1e-9 a ridge of 1e-6 is switched on and the spectrum
/// re-measured.
Smoothness estimate_smoothness(const SplitModel& model, const Dataset& data);

inline constexpr double kRidgeThreshold = 1e-9;
inline constexpr double kRidge = 1e-6;

struct SyntheticSpec {
  int users = 10;
  int samples = 2000;
  double noise = 0.1;
};

/// Gaussian features, targets from a planted adapter pair of `model` plus
/// Gaussian noise; zero noise makes the optimal loss exactly reachable.
Dataset make_synthetic(const SyntheticSpec& spec, const SplitModel& model,
                       std::uint64_t seed);

/// Numeric CSV, optional header row, last column is the target. Samples
/// are shuffled by `seed` and split equally over `users`.
Dataset load_dataset(const std::filesystem::path& path, int users,
                     std::uint64_t seed);

/// Multiplies every feature row by the inverse square root of the pooled
/// second-moment matrix.
void whiten(Dataset& data);

/// (F - F*) / (F(0) - F*) over the whole dataset; 0 when F(0) = F*.
double global_gap_ratio(const SplitTrainState& state, const Dataset& data);

struct TrainingReport {
  Smoothness smooth;
  LearningHyperParams hyper;  // as used (xi and delta clipped to comply)
  double eta = 0.0;
  int rounds = 0;
  bool certified = false;  // global gap ratio reached eps0
  double final_gap_ratio = 0.0;
  int max_local_iters = 0;
  double local_bound = 0.0;   // ceil(v log2(1/eta))
  double global_bound = 0.0;  // ceil(a/(1 - eta))
};

/// Complies (xi, delta) with the measured (L, gamma): xi <= gamma/L and
/// delta <= 1/L, keeping the requested values when they already comply.
LearningHyperParams compliant_hyperparams(const Smoothness& s, double xi,
                                          double delta, double eps0);

/// Runs rounds until the eps0 certificate holds or `max_rounds` pass.
TrainingReport train(SplitTrainState& state, const Dataset& data, double eta,
                     const LearningHyperParams& h, int max_rounds,
                     std::vector<RoundRecord>* transcript = nullptr);

}  // namespace fedsllm::train

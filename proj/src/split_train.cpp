#include "fedsllm/split_train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fedsllm/delay_model.hpp"
#include "fedsllm/error.hpp"
#include "fedsllm/scenario.hpp"

namespace fedsllm::train {

namespace {

constexpr int kDivergenceRun = 10;
constexpr int kMaxLocalIters = 1000000;

MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

// n x n orthogonal matrix from the QR factor of a Gaussian draw.
MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(n, n, rng));
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void check_user(const Dataset& data, int user) {
  if (user < 0 || user >= data.users()) {
    throw DimensionError("user index " + std::to_string(user) +
                         " out of range");
  }
}

void check_compatible(const SplitModel& model, const Dataset& data) {
  data.validate();
  if (data.feature_dim() != model.features()) {
    throw DimensionError("dataset has " + std::to_string(data.feature_dim()) +
                         " features, model expects " +
                         std::to_string(model.features()));
  }
  const int t = data.target_dim();
  if (t != 1 && t != model.outputs()) {
    throw DimensionError("targets need 1 or " +
                         std::to_string(model.outputs()) + " columns");
  }
}

Params point(const SplitTrainState& state, const Params* h) {
  return h ? state.global + *h : state.global;
}

// Output of the full split forward pass at parameters p.
MatrixXd predict(const SplitModel& m, const Params& p, const MatrixXd& X) {
  const MatrixXd Z = X * (m.client.base + p.client * m.client.up);
  const MatrixXd Z0 = X * m.client.base;
  return Z * m.server.base + Z0 * p.server * m.server.up;
}

// Minimiser and curvature of G_k for one user; G_k has Hessian H_k and
// gradient H_k h + xi grad F.
struct SurrogateQuadratic {
  MatrixXd H;
  Eigen::LDLT<MatrixXd> ldlt;
  VectorXd minimizer;
  double reference_gap = 0.0;  // G(0) - G*

  double gap(const VectorXd& h) const {
    const VectorXd e = h - minimizer;
    return 0.5 * e.dot(H * e);
  }
};

SurrogateQuadratic surrogate_quadratic(const SplitTrainState& state, int user,
                                       const Dataset& data, double xi,
                                       const GlobalGradient& g) {
  SurrogateQuadratic q;
  q.H = local_hessian(state, user, data);
  q.ldlt.compute(q.H);
  q.minimizer = q.ldlt.solve(-xi * g.grad.flatten());
  q.reference_gap = q.gap(VectorXd::Zero(q.minimizer.size()));
  return q;
}

void check_stamp(const SplitTrainState& state, const GlobalGradient& g) {
  if (g.round != state.round) {
    throw DomainError("stale global gradient: stamped round " +
                      std::to_string(g.round) + ", current round " +
                      std::to_string(state.round));
  }
}

// Pooled Hessian of F and its factorisation, reused across rounds.
struct GlobalQuadratic {
  MatrixXd H;
  Eigen::LDLT<MatrixXd> ldlt;

  GlobalQuadratic(const SplitTrainState& state, const Dataset& data) {
    const double D = static_cast<double>(data.total_samples());
    const int n = state.model.num_params();
    H = MatrixXd::Zero(n, n);
    for (int k = 0; k < data.users(); ++k) {
      H += (static_cast<double>(data.features[k].rows()) / D) *
           local_hessian(state, k, data);
    }
    ldlt.compute(H);
  }

  double gap_ratio(const SplitTrainState& state, const Dataset& data) const {
    VectorXd grad = VectorXd::Zero(H.rows());
    const double D = static_cast<double>(data.total_samples());
    for (int k = 0; k < data.users(); ++k) {
      grad += (static_cast<double>(data.features[k].rows()) / D) *
              local_gradient(state, k, data).flatten();
    }
    // F(w) - F* = g^T H^-1 g / 2; F(0) - F* = w*^T H w* / 2.
    const VectorXd step = ldlt.solve(grad);
    const double gap = 0.5 * grad.dot(step);
    const VectorXd w_star = state.global.flatten() - step;
    const double gap0 = 0.5 * w_star.dot(H * w_star);
    if (!(gap0 > 0.0)) return 0.0;
    return std::max(gap, 0.0) / gap0;
  }
};

}  // namespace

void LoraAdapter::validate() const {
  const auto d = base.rows();
  const auto k = base.cols();
  if (down.rows() != d || up.cols() != k || down.cols() != up.rows()) {
    throw DimensionError("LoRA factor shapes do not match the base matrix");
  }
  if (2 * down.cols() > std::min(d, k) || down.cols() < 1) {
    throw DimensionError("LoRA rank must satisfy 1 <= r <= min(d, k)/2");
  }
}

int Dataset::feature_dim() const {
  return features.empty() ? 0 : static_cast<int>(features.front().cols());
}

int Dataset::target_dim() const {
  return targets.empty() ? 0 : static_cast<int>(targets.front().cols());
}

long long Dataset::total_samples() const {
  long long total = 0;
  for (const auto& x : features) total += x.rows();
  return total;
}

std::vector<long long> Dataset::sizes() const {
  std::vector<long long> out;
  for (const auto& x : features) out.push_back(x.rows());
  return out;
}

void Dataset::validate() const {
  if (features.empty() || features.size() != targets.size()) {
    throw DimensionError("dataset needs matching per-user feature and target lists");
  }
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (features[k].rows() == 0 || features[k].rows() != targets[k].rows() ||
        features[k].cols() != feature_dim() ||
        targets[k].cols() != target_dim()) {
      throw DimensionError("inconsistent shapes for user " + std::to_string(k));
    }
    if (!features[k].allFinite() || !targets[k].allFinite()) {
      throw DimensionError("non-finite value in data of user " +
                           std::to_string(k));
    }
  }
}

SplitModel SplitModel::make(const ModelShape& s, std::uint64_t seed) {
  if (s.hidden > s.features || s.outputs > s.hidden ||
      s.client_rank + s.server_rank > s.outputs || s.client_rank < 1 ||
      s.server_rank < 1) {
    throw DimensionError(
        "model shape needs outputs <= hidden <= features and "
        "client_rank + server_rank <= outputs");
  }
  std::mt19937_64 rng(seed);
  SplitModel m;
  m.client.base = random_orthogonal(s.features, rng).leftCols(s.hidden);
  m.server.base = random_orthogonal(s.hidden, rng).leftCols(s.outputs);
  const MatrixXd omega = random_orthogonal(s.outputs, rng);
  m.client.up = omega.topRows(s.client_rank) * m.server.base.transpose();
  m.server.up = omega.middleRows(s.client_rank, s.server_rank);
  m.client.down = MatrixXd::Zero(s.features, s.client_rank);
  m.server.down = MatrixXd::Zero(s.hidden, s.server_rank);
  VectorXd dir = omega.row(0).transpose() + omega.row(s.client_rank).transpose();
  m.target_direction = dir.normalized();
  m.client.validate();
  m.server.validate();
  return m;
}

int SplitModel::num_params() const {
  return static_cast<int>(client.down.size() + server.down.size());
}

double SplitModel::client_parameter_fraction() const {
  return static_cast<double>(client.down.size()) / num_params();
}

Params Params::zeros_like(const SplitModel& model) {
  return {MatrixXd::Zero(model.client.down.rows(), model.client.down.cols()),
          MatrixXd::Zero(model.server.down.rows(), model.server.down.cols())};
}

VectorXd Params::flatten() const {
  VectorXd v(client.size() + server.size());
  v.head(client.size()) = client.reshaped();
  v.tail(server.size()) = server.reshaped();
  return v;
}

Params Params::unflatten(const VectorXd& v, const SplitModel& model) {
  Params p = zeros_like(model);
  if (v.size() != model.num_params()) {
    throw DimensionError("parameter vector has the wrong length");
  }
  p.client.reshaped() = v.head(p.client.size());
  p.server.reshaped() = v.tail(p.server.size());
  return p;
}

Params& Params::operator+=(const Params& o) {
  client += o.client;
  server += o.server;
  return *this;
}

Params& Params::operator-=(const Params& o) {
  client -= o.client;
  server -= o.server;
  return *this;
}

Params& Params::operator*=(double s) {
  client *= s;
  server *= s;
  return *this;
}

double Params::dot(const Params& o) const {
  return client.cwiseProduct(o.client).sum() +
         server.cwiseProduct(o.server).sum();
}

Params operator+(Params a, const Params& b) { return a += b; }
Params operator-(Params a, const Params& b) { return a -= b; }
Params operator*(double s, Params a) { return a *= s; }

SplitTrainState make_state(const SplitModel& model, double ridge) {
  if (!(ridge >= 0.0 && std::isfinite(ridge))) {
    throw DomainError("ridge must be non-negative");
  }
  SplitTrainState s;
  s.model = model;
  s.global = Params::zeros_like(model);
  s.ridge = ridge;
  return s;
}

MatrixXd embed_targets(const SplitModel& model, const MatrixXd& targets) {
  if (targets.cols() == model.outputs()) return targets;
  if (targets.cols() != 1) {
    throw DimensionError("targets need 1 or " +
                         std::to_string(model.outputs()) + " columns");
  }
  return targets * model.target_direction.transpose();
}

double local_loss(const SplitTrainState& state, int user, const Dataset& data,
                  const Params* h) {
  check_compatible(state.model, data);
  check_user(data, user);
  const Params p = point(state, h);
  const MatrixXd& X = data.features[user];
  const MatrixXd R =
      predict(state.model, p, X) - embed_targets(state.model, data.targets[user]);
  return R.squaredNorm() / static_cast<double>(X.rows()) +
         state.ridge * p.squared_norm();
}

double global_loss(const SplitTrainState& state, const Dataset& data,
                   const Params* h) {
  const double D = static_cast<double>(data.total_samples());
  double total = 0.0;
  for (int k = 0; k < data.users(); ++k) {
    total += static_cast<double>(data.features[k].rows()) / D *
             local_loss(state, k, data, h);
  }
  return total;
}

Params local_gradient(const SplitTrainState& state, int user,
                      const Dataset& data, const Params* h) {
  check_compatible(state.model, data);
  check_user(data, user);
  const SplitModel& m = state.model;
  const Params p = point(state, h);
  const MatrixXd& X = data.features[user];
  const double scale = 2.0 / static_cast<double>(X.rows());

  // Client forward to the cut layer.
  const MatrixXd Z = X * (m.client.base + p.client * m.client.up);
  const MatrixXd Z0 = X * m.client.base;
  // Main server forward and backward.
  const MatrixXd R = Z * m.server.base + Z0 * p.server * m.server.up -
                     embed_targets(m, data.targets[user]);
  Params g;
  g.server = scale * Z0.transpose() * R * m.server.up.transpose();
  const MatrixXd dZ = scale * R * m.server.base.transpose();
  // Client backward from the returned cut-layer gradient.
  g.client = X.transpose() * dZ * m.client.up.transpose();
  if (state.ridge > 0.0) {
    g.client += 2.0 * state.ridge * p.client;
    g.server += 2.0 * state.ridge * p.server;
  }
  return g;
}

GlobalGradient sync_global_gradient(const SplitTrainState& state,
                                    const Dataset& data) {
  const double D = static_cast<double>(data.total_samples());
  GlobalGradient out;
  out.grad = Params::zeros_like(state.model);
  for (int k = 0; k < data.users(); ++k) {
    out.grad += (static_cast<double>(data.features[k].rows()) / D) *
                local_gradient(state, k, data);
  }
  out.round = state.round;
  return out;
}

double surrogate(const SplitTrainState& state, int user, const Dataset& data,
                 const Params& h, double xi, const GlobalGradient& g) {
  check_stamp(state, g);
  const Params gk = local_gradient(state, user, data);
  return local_loss(state, user, data, &h) - (gk - xi * g.grad).dot(h);
}

Params surrogate_gradient(const SplitTrainState& state, int user,
                          const Dataset& data, const Params& h, double xi,
                          const GlobalGradient& g) {
  check_stamp(state, g);
  return local_gradient(state, user, data, &h) -
         local_gradient(state, user, data) + xi * g.grad;
}

MatrixXd local_hessian(const SplitTrainState& state, int user,
                       const Dataset& data) {
  check_compatible(state.model, data);
  check_user(data, user);
  const SplitModel& m = state.model;
  const MatrixXd& X = data.features[user];
  const double scale = 2.0 / static_cast<double>(X.rows());
  const MatrixXd Z0 = X * m.client.base;
  const MatrixXd Mc = m.client.up * m.server.base;  // r x o
  const MatrixXd& As = m.server.up;                 // rs x o

  const auto nc = m.client.down.size();
  const auto ns = m.server.down.size();
  MatrixXd H(nc + ns, nc + ns);
  H.topLeftCorner(nc, nc) =
      scale * kron(Mc * Mc.transpose(), X.transpose() * X);
  H.bottomRightCorner(ns, ns) =
      scale * kron(As * As.transpose(), Z0.transpose() * Z0);
  H.topRightCorner(nc, ns) =
      scale * kron(Mc * As.transpose(), X.transpose() * Z0);
  H.bottomLeftCorner(ns, nc) = H.topRightCorner(nc, ns).transpose();
  H.diagonal().array() += 2.0 * state.ridge;
  return H;
}

Params surrogate_minimizer(const SplitTrainState& state, int user,
                           const Dataset& data, double xi,
                           const GlobalGradient& g) {
  check_stamp(state, g);
  return Params::unflatten(
      surrogate_quadratic(state, user, data, xi, g).minimizer, state.model);
}

LocalResult local_gd_round(const SplitTrainState& state, int user,
                           const Dataset& data, double eta,
                           const LearningHyperParams& hp,
                           const GlobalGradient& g) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
  const double delta = hp.step_size_delta;
  const double xi = hp.surrogate_weight_xi;
  if (!(delta > 0.0 && delta < 2.0 / hp.lipschitz_L)) {
    throw HyperparameterError("step size delta must lie in (0, 2/L)");
  }
  check_stamp(state, g);
  const SurrogateQuadratic q = surrogate_quadratic(state, user, data, xi, g);

  LocalResult out;
  out.h = Params::zeros_like(state.model);
  if (!(q.reference_gap > 0.0)) return out;  // h = 0 is already optimal

  // grad G_k(h) = grad F_k(w + h) - grad F_k(w) + xi grad F(w).
  const Params shift = xi * g.grad - local_gradient(state, user, data);
  double ratio = 1.0;
  int rising = 0;
  while (ratio > eta) {
    if (out.iterations >= kMaxLocalIters) {
      throw SolverError("local gradient descent did not reach accuracy eta");
    }
    const Params grad = local_gradient(state, user, data, &out.h) + shift;
    out.h -= delta * grad;
    ++out.iterations;
    const double next = q.gap(out.h.flatten()) / q.reference_gap;
    rising = next > ratio ? rising + 1 : 0;
    if (rising >= kDivergenceRun) {
      throw HyperparameterError(
          "local gradient descent diverged (gap ratio rose for 10 steps)");
    }
    ratio = next;
  }
  out.gap_ratio = ratio;
  return out;
}

std::string to_json_line(const RoundRecord& r) {
  nlohmann::ordered_json j;
  j["round"] = r.round;
  j["user"] = r.user;
  j["local_iters"] = r.local_iters;
  j["F_k"] = r.F_k;
  j["gap_ratio"] = r.gap_ratio;
  j["bytes_up_main"] = r.bytes_up_main;
  j["bytes_up_fed"] = r.bytes_up_fed;
  j["bytes_up_sync"] = r.bytes_up_sync;
  return j.dump();
}

void run_round(SplitTrainState& state, const Dataset& data, double eta,
               const LearningHyperParams& h,
               std::vector<RoundRecord>* transcript) {
  check_compatible(state.model, data);
  const GlobalGradient g = sync_global_gradient(state, data);
  const SplitModel& m = state.model;
  const long long word = sizeof(double);

  // Per-client copies of both halves, merged by an order-fixed average.
  Params sum = Params::zeros_like(m);
  for (int k = 0; k < data.users(); ++k) {
    LocalResult local = local_gd_round(state, k, data, eta, h, g);
    if (transcript) {
      RoundRecord r;
      r.round = state.round;
      r.user = k;
      r.local_iters = local.iterations;
      r.F_k = local_loss(state, k, data);
      r.gap_ratio = local.gap_ratio;
      r.bytes_up_main = data.features[k].rows() *
                        (2LL * m.hidden() + data.target_dim()) * word;
      r.bytes_up_fed = static_cast<long long>(m.client.down.size()) * word;
      r.bytes_up_sync = static_cast<long long>(m.num_params()) * word;
      transcript->push_back(r);
    }
    state.local_iter = local.iterations;
    sum += local.h;
  }
  state.global += (1.0 / data.users()) * sum;
  ++state.round;
  state.loss_history.push_back(global_loss(state, data));
}

Smoothness estimate_smoothness(const SplitModel& model, const Dataset& data) {
  Smoothness s;
  auto measure = [&](double ridge, double& L, double& gamma) {
    SplitTrainState st = make_state(model, ridge);
    L = 0.0;
    gamma = std::numeric_limits<double>::infinity();
    for (int k = 0; k < data.users(); ++k) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(local_hessian(st, k, data),
                                                  Eigen::EigenvaluesOnly);
      L = std::max(L, eig.eigenvalues().maxCoeff());
      gamma = std::min(gamma, eig.eigenvalues().minCoeff());
    }
  };
  measure(0.0, s.L, s.gamma);
  s.gamma_unregularised = s.gamma;
  if (s.gamma < kRidgeThreshold) {
    s.ridge = kRidge;
    measure(kRidge, s.L, s.gamma);
  }
  return s;
}

Dataset make_synthetic(const SyntheticSpec& spec, const SplitModel& model,
                       std::uint64_t seed) {
  if (spec.users < 1 || spec.samples < spec.users || !(spec.noise >= 0.0)) {
    throw DomainError("synthetic spec needs samples >= users >= 1 and noise >= 0");
  }
  std::mt19937_64 rng(seed);
  const MatrixXd X = gaussian(spec.samples, model.features(), rng);
  Params planted;
  planted.client = gaussian(model.client.down.rows(), model.client.down.cols(), rng);
  planted.server = gaussian(model.server.down.rows(), model.server.down.cols(), rng);
  MatrixXd Y = predict(model, planted, X);
  if (spec.noise > 0.0) Y += spec.noise * gaussian(Y.rows(), Y.cols(), rng);

  Dataset data;
  const auto sizes = equal_split(spec.samples, spec.users);
  Eigen::Index row = 0;
  for (double n : sizes) {
    const auto rows = static_cast<Eigen::Index>(n);
    data.features.push_back(X.middleRows(row, rows));
    data.targets.push_back(Y.middleRows(row, rows));
    row += rows;
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, int users,
                     std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == begin || *end != '\0' || !std::isfinite(v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw DimensionError(path.string() + ":" + std::to_string(line_no) +
                           ": non-numeric cell '" + cell + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError(path.string() + ":" + std::to_string(line_no) +
                           ": expected " + std::to_string(rows.front().size()) +
                           " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DimensionError("dataset '" + path.string() + "' is empty");
  if (rows.front().size() < 2) {
    throw DimensionError("dataset needs at least one feature and a target");
  }
  if (users < 1 || static_cast<long long>(rows.size()) < users) {
    throw DimensionError("dataset has fewer samples than users");
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Dataset data;
  std::size_t next = 0;
  for (double n : equal_split(static_cast<long long>(rows.size()), users)) {
    const auto count = static_cast<Eigen::Index>(n);
    MatrixXd X(count, d);
    MatrixXd y(count, 1);
    for (Eigen::Index i = 0; i < count; ++i) {
      const auto& r = rows[order[next++]];
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = r[j];
      y(i, 0) = r.back();
    }
    data.features.push_back(std::move(X));
    data.targets.push_back(std::move(y));
  }
  return data;
}

void whiten(Dataset& data) {
  data.validate();
  const int d = data.feature_dim();
  MatrixXd S = MatrixXd::Zero(d, d);
  for (const auto& X : data.features) S += X.transpose() * X;
  S /= static_cast<double>(data.total_samples());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DimensionError("features are rank deficient; cannot whiten");
  }
  const MatrixXd W = eig.operatorInverseSqrt();
  for (auto& X : data.features) X = X * W;
}

double global_gap_ratio(const SplitTrainState& state, const Dataset& data) {
  return GlobalQuadratic(state, data).gap_ratio(state, data);
}

LearningHyperParams compliant_hyperparams(const Smoothness& s, double xi,
                                          double delta, double eps0) {
  LearningHyperParams h;
  h.lipschitz_L = s.L;
  h.strong_convexity_gamma = s.gamma;
  h.surrogate_weight_xi = std::min(xi, s.gamma / s.L);
  h.step_size_delta = std::min(delta, 1.0 / s.L);
  h.global_accuracy_eps0 = eps0;
  h.validate();
  return h;
}

TrainingReport train(SplitTrainState& state, const Dataset& data, double eta,
                     const LearningHyperParams& h, int max_rounds,
                     std::vector<RoundRecord>* transcript) {
  h.validate();
  TrainingReport rep;
  rep.hyper = h;
  rep.eta = eta;
  const double v = h.local_iteration_constant();
  const double a = delay::iteration_constant_a(h);
  rep.local_bound = std::ceil(v * std::log2(1.0 / eta));
  rep.global_bound = std::ceil(a / (1.0 - eta));

  const GlobalQuadratic global(state, data);
  rep.final_gap_ratio = global.gap_ratio(state, data);
  while (rep.final_gap_ratio > h.global_accuracy_eps0 &&
         rep.rounds < max_rounds) {
    std::vector<RoundRecord> records;
    run_round(state, data, eta, h, &records);
    for (const auto& r : records) {
      rep.max_local_iters = std::max(rep.max_local_iters, r.local_iters);
    }
    if (transcript) {
      transcript->insert(transcript->end(), records.begin(), records.end());
    }
    ++rep.rounds;
    rep.final_gap_ratio = global.gap_ratio(state, data);
  }
  rep.certified = rep.final_gap_ratio <= h.global_accuracy_eps0;
  return rep;
}

}  // namespace fedsllm::train

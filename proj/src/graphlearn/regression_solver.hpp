#pragma once

#include <vector>

#include "graphlearn/feature_map.hpp"
#include "graphlearn/graph_core.hpp"

namespace graphlearn {

struct TrainingSample {
  SignalMatrix signals;
  WeightedGraph graph;
};

/// Labelled graphs for training. Every sample has the same node count N and
/// the same number of signals M, and there is at least one sample.
class TrainingSet {
 public:
  TrainingSet() = default;
  explicit TrainingSet(std::vector<TrainingSample> samples);

  const std::vector<TrainingSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  Index n_nodes() const { return n_nodes_; }
  Index n_signals() const { return n_signals_; }

  std::vector<SignalMatrix> signal_matrices() const;
  double mean_edge_count(double eps = 0.0) const;

 private:
  std::vector<TrainingSample> samples_;
  Index n_nodes_ = 0;
  Index n_signals_ = 0;
};

struct Hyperparameters {
  double sigma = 1.0;
  SpectralPolynomial h{0.0, 1.0, 0.0};
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const;
};

struct SolverOptions {
  // Per-graph contributions are computed on this many threads and always
  // summed in graph order, so the result does not depend on the count.
  unsigned threads = 1;
};

/// Reduced K x K normal system f_bar * w = rhs.
struct NormalSystem {
  Matrix f_bar;
  Vector rhs;
  // Zero-based column index sets Omega_0 .. Omega_{N-1} into a vectorised
  // W = I_N (x) w; Omega_j holds the positions of the j-th copy of w.
  std::vector<std::vector<Index>> selection;
};

/// cost(w) == c - 2 b^T w + w^T q w with q symmetric.
struct QuadraticForm {
  Matrix q;
  Vector b;
  double c = 0.0;
};

struct SolveDiagnostics {
  NormalSystem system;
  double min_curvature = 0.0;    // smallest eigenvalue of f_bar / 2
  double curvature_scale = 0.0;  // largest |eigenvalue| of f_bar / 2
  double self_check_error = 0.0;
};

// Omega_j = { j (N+1) K + t : t = 0..K-1 }, zero-based j.
std::vector<Index> omega_set(Index j, Index n_nodes, Index feature_dim);

// Sum over graphs of ||A - Phi W||_F^2 + alpha tr(X^T h(L_hat) X), plus
// beta tr(W^T W), where W = I_N (x) w and L_hat is built from the unclamped
// estimate.
double cost(const Vector& w, const TrainingSet& ts, const Hyperparameters& hyper);

// Constant part g of the W-gradient (gradient = F vec W - g), column-major
// vectorised, length N^2 K. h0 does not contribute.
Vector assemble_g(const TrainingSet& ts, const Hyperparameters& hyper);

// rho_bar^T F as a K x N^2 K matrix, computed from the probe matrices
// I_N (x) e_k without forming F itself.
Matrix projected_operator(const TrainingSet& ts, const Hyperparameters& hyper,
                          const SolverOptions& options = {});

NormalSystem assemble_reduced_system(const TrainingSet& ts, const Hyperparameters& hyper,
                                     const SolverOptions& options = {});

RegressionModel solve(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options = {});
RegressionModel solve(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options,
                      SolveDiagnostics& diagnostics);

// Minimum-norm solution of a symmetric system with singular values below
// 1e-10 * largest treated as zero.
Vector pseudo_inverse_solve(const Matrix& a, const Vector& rhs);

// Recovers (q, b, c) from cost evaluations at 0, e_k, 2 e_k and e_k + e_l.
QuadraticForm quadratic_probe(const TrainingSet& ts, const Hyperparameters& hyper);

// Central differences of cost, one coordinate at a time.
Vector finite_difference_gradient(const Vector& w, const TrainingSet& ts, const Hyperparameters& hyper,
                                  double step);

// Norm bound a gradient must meet at a solution: 1e-6 * (1 + ||rhs||).
double stationarity_tolerance(const NormalSystem& system);

}  // namespace graphlearn

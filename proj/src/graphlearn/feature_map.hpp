#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "graphlearn/graph_core.hpp"

namespace graphlearn {

/// N x M block of graph signals, one signal per column. Row i collects the
/// values every signal takes on node i.
class SignalMatrix {
 public:
  SignalMatrix() = default;
  explicit SignalMatrix(Matrix values);

  Index n_nodes() const { return values_.rows(); }
  Index n_signals() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

/// Stacked pairwise features: an N x (N*K) matrix whose (i, j) block of K
/// columns is phi(x(i), x(j))^T. Diagonal blocks are zero.
struct FeatureBlockMatrix {
  Index n_nodes = 0;
  Index feature_dim = 0;
  Matrix values;

  double feature(Index i, Index j, Index k) const { return values(i, j * feature_dim + k); }

  // N x N matrix of the k-th feature over all node pairs.
  Matrix slice(Index k) const;
};

struct RegressionModel {
  Vector w;
  double sigma = 1.0;
  SpectralPolynomial h;
  double alpha = 0.0;
  double beta = 0.0;
  // Set when the training quadratic had a clearly negative curvature direction.
  bool psd_warning = false;

  Index k() const { return w.size(); }
};

// Component m is sigma / max((xi[m] - xj[m])^2, sigma); zero when same_node.
Vector phi(const Eigen::Ref<const Vector>& xi, const Eigen::Ref<const Vector>& xj, double sigma,
           bool same_node);

FeatureBlockMatrix assemble_feature_matrix(const SignalMatrix& x, double sigma);

// I_N (x) w: an (N*K) x N block-diagonal matrix with w in every diagonal block.
Matrix kron_replicate(const Vector& w, Index n);

// Phi (I_N (x) w), without clamping.
Matrix raw_adjacency(const FeatureBlockMatrix& phi_mat, const Vector& w);

// Raw estimate with negative weights clamped to zero.
WeightedGraph predict_adjacency(const FeatureBlockMatrix& phi_mat, const RegressionModel& model);

// diag(Phi W 1) - Phi W on the unclamped estimate.
Matrix estimate_laplacian(const FeatureBlockMatrix& phi_mat, const Vector& w);
Matrix estimate_laplacian(const FeatureBlockMatrix& phi_mat, const RegressionModel& model);

// scale * median over node pairs (i < j), signals, and matrices of the
// squared signal difference, floored at 1e-8.
double default_sigma(std::span<const SignalMatrix> signals, double scale = 0.1);

// Model persistence. The JSON carries format_version 1.
std::string model_to_json(const RegressionModel& model);
RegressionModel model_from_json(const std::string& text);
void save_model(const RegressionModel& model, const std::filesystem::path& path);
RegressionModel load_model(const std::filesystem::path& path);

}  // namespace graphlearn

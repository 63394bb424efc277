#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

namespace graphlearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Inputs whose asymmetry is below this are symmetrized; above it, rejected.
inline constexpr double kSymmetryTolerance = 1e-9;

/// Undirected weighted graph without self loops.
///
/// Invariants: adjacency is square, symmetric, nonnegative, zero on the
/// diagonal. Construction validates and symmetrizes small round-off.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  static WeightedGraph from_adjacency(Matrix adjacency);
  static WeightedGraph empty(Index n_nodes);

  Index n_nodes() const { return adjacency_.rows(); }
  const Matrix& adjacency() const { return adjacency_; }

  // Number of upper-triangular entries strictly above `eps`.
  Index edge_count(double eps = 0.0) const;

 private:
  explicit WeightedGraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {}

  Matrix adjacency_;
};

struct LaplacianDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column i pairs with eigenvalues(i)
};

/// h(x) = h0 + h1 x + h2 x^2. Order is capped at two so the training cost
/// stays quadratic in the regression weights.
struct SpectralPolynomial {
  double h0 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;

  // Rejects more than three coefficients.
  static SpectralPolynomial from_coefficients(std::span<const double> coefficients);

  std::array<double, 3> coefficients() const { return {h0, h1, h2}; }
  double operator()(double x) const { return h0 + x * (h1 + x * h2); }
};

// (m + m^T) / 2 after checking the asymmetry is below kSymmetryTolerance.
Matrix symmetrized(const Matrix& m);

// Zero cutoff for Laplacian eigenvalues: 1e-10 * max(1, largest eigenvalue).
double eigenvalue_zero_tolerance(const Vector& eigenvalues);

Matrix laplacian(const WeightedGraph& graph);

// D - A for an arbitrary square matrix, with D = diag(A 1). No validation;
// used for estimated adjacencies that may carry negative entries.
Matrix laplacian_of(const Matrix& adjacency);

// x^T L x.
double smoothness(const Vector& signal, const Matrix& laplacian);

LaplacianDecomposition gft(const Matrix& laplacian);

Matrix apply_spectral_polynomial(const Matrix& laplacian, const SpectralPolynomial& h);

Matrix laplacian_pseudoinverse(const Matrix& laplacian);

bool is_connected(const WeightedGraph& graph);

}  // namespace graphlearn

#include "graphlearn/graph_core.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "graphlearn/error.hpp"

namespace graphlearn {

WeightedGraph WeightedGraph::from_adjacency(Matrix adjacency) {
  require(adjacency.rows() == adjacency.cols(), ErrorCode::DimensionMismatch,
          fmt::format("adjacency must be square, got {}x{}", adjacency.rows(), adjacency.cols()));
  require(adjacency.rows() >= 1, ErrorCode::InvalidArgument, "adjacency must have at least one node");
  require(adjacency.allFinite(), ErrorCode::InvalidArgument, "adjacency has non-finite entries");
  Matrix sym = symmetrized(adjacency);
  for (Index i = 0; i < sym.rows(); ++i) {
    require(std::abs(sym(i, i)) <= kSymmetryTolerance, ErrorCode::InvalidArgument,
            fmt::format("adjacency has a self loop at node {}", i));
    sym(i, i) = 0.0;
  }
  require(sym.minCoeff() >= 0.0, ErrorCode::InvalidArgument, "adjacency has negative entries");
  return WeightedGraph(std::move(sym));
}

WeightedGraph WeightedGraph::empty(Index n_nodes) {
  require(n_nodes >= 1, ErrorCode::InvalidArgument, "graph needs at least one node");
  return WeightedGraph(Matrix::Zero(n_nodes, n_nodes));
}

Index WeightedGraph::edge_count(double eps) const {
  Index count = 0;
  for (Index j = 1; j < n_nodes(); ++j)
    for (Index i = 0; i < j; ++i)
      if (adjacency_(i, j) > eps) ++count;
  return count;
}

SpectralPolynomial SpectralPolynomial::from_coefficients(std::span<const double> coefficients) {
  require(coefficients.size() <= 3, ErrorCode::InvalidArgument,
          fmt::format("spectral polynomial must have order <= 2 (at most 3 coefficients), got {}",
                      coefficients.size()));
  SpectralPolynomial h;
  if (coefficients.size() > 0) h.h0 = coefficients[0];
  if (coefficients.size() > 1) h.h1 = coefficients[1];
  if (coefficients.size() > 2) h.h2 = coefficients[2];
  return h;
}

Matrix symmetrized(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::DimensionMismatch,
          fmt::format("expected a square matrix, got {}x{}", m.rows(), m.cols()));
  const double asymmetry = m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asymmetry <= kSymmetryTolerance, ErrorCode::InvalidArgument,
          fmt::format("matrix is not symmetric (max |m_ij - m_ji| = {:.3g})", asymmetry));
  return 0.5 * (m + m.transpose());
}

double eigenvalue_zero_tolerance(const Vector& eigenvalues) {
  const double top = eigenvalues.size() == 0 ? 0.0 : eigenvalues.maxCoeff();
  return 1e-10 * std::max(1.0, top);
}

Matrix laplacian(const WeightedGraph& graph) { return laplacian_of(graph.adjacency()); }

Matrix laplacian_of(const Matrix& adjacency) {
  Matrix l = -adjacency;
  l.diagonal() += adjacency.rowwise().sum();
  return l;
}

double smoothness(const Vector& signal, const Matrix& laplacian) {
  require(laplacian.rows() == laplacian.cols() && signal.size() == laplacian.rows(),
          ErrorCode::DimensionMismatch,
          fmt::format("signal of length {} does not match {}x{} Laplacian", signal.size(),
                      laplacian.rows(), laplacian.cols()));
  return signal.dot(laplacian * signal);
}

LaplacianDecomposition gft(const Matrix& laplacian) {
  const Matrix sym = symmetrized(laplacian);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  require(solver.info() == Eigen::Success, ErrorCode::Numeric, "eigendecomposition did not converge");
  LaplacianDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  if (out.eigenvalues.size() > 0 &&
      std::abs(out.eigenvalues(0)) < eigenvalue_zero_tolerance(out.eigenvalues)) {
    out.eigenvalues(0) = 0.0;
  }
  return out;
}

Matrix apply_spectral_polynomial(const Matrix& laplacian, const SpectralPolynomial& h) {
  require(laplacian.rows() == laplacian.cols(), ErrorCode::DimensionMismatch,
          "spectral polynomial needs a square matrix");
  Matrix out = h.h1 * laplacian + h.h2 * (laplacian * laplacian);
  out.diagonal().array() += h.h0;
  return out;
}

Matrix laplacian_pseudoinverse(const Matrix& laplacian) {
  const LaplacianDecomposition d = gft(laplacian);
  const double tol = eigenvalue_zero_tolerance(d.eigenvalues);
  Vector inv(d.eigenvalues.size());
  for (Index i = 0; i < inv.size(); ++i)
    inv(i) = std::abs(d.eigenvalues(i)) < tol ? 0.0 : 1.0 / d.eigenvalues(i);
  return d.eigenvectors * inv.asDiagonal() * d.eigenvectors.transpose();
}

bool is_connected(const WeightedGraph& graph) {
  const Index n = graph.n_nodes();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::vector<Index> frontier{0};
  seen[0] = true;
  Index reached = 1;
  while (!frontier.empty()) {
    const Index u = frontier.back();
    frontier.pop_back();
    for (Index v = 0; v < n; ++v) {
      if (!seen[v] && graph.adjacency()(u, v) > 0.0) {
        seen[v] = true;
        ++reached;
        frontier.push_back(v);
      }
    }
  }
  return reached == n;
}

}  // namespace graphlearn

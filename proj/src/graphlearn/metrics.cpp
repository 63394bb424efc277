#include "graphlearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "graphlearn/error.hpp"

namespace graphlearn {

double nmse(std::span<const WeightedGraph> truth, std::span<const Matrix> estimate) {
  require(!truth.empty(), ErrorCode::InvalidArgument, "nmse needs at least one graph");
  require(truth.size() == estimate.size(), ErrorCode::DimensionMismatch,
          fmt::format("nmse: {} true graphs but {} estimates", truth.size(), estimate.size()));
  double error = 0.0;
  double energy = 0.0;
  for (std::size_t g = 0; g < truth.size(); ++g) {
    const Matrix& a = truth[g].adjacency();
    require(a.rows() == estimate[g].rows() && a.cols() == estimate[g].cols(), ErrorCode::DimensionMismatch,
            fmt::format("nmse: graph {} is {}x{} but its estimate is {}x{}", g, a.rows(), a.cols(),
                        estimate[g].rows(), estimate[g].cols()));
    error += (a - estimate[g]).squaredNorm();
    energy += a.squaredNorm();
  }
  require(energy > 0.0, ErrorCode::Degenerate, "nmse: true graphs have no edges");
  return error / energy;
}

WeightedGraph threshold_sparsify(const Matrix& a_hat, double tau) {
  require(tau >= 0.0, ErrorCode::InvalidArgument, fmt::format("threshold must be nonnegative, got {}", tau));
  // decide each pair once so round-off between a_ij and a_ji cannot split it
  Matrix a = symmetrized(a_hat.cwiseMax(0.0));
  a = (a.array() < tau).select(0.0, a);
  a.diagonal().setZero();
  return WeightedGraph::from_adjacency(std::move(a));
}

double count_matching_threshold(const Matrix& a_hat, Index edge_count) {
  require(a_hat.rows() == a_hat.cols(), ErrorCode::DimensionMismatch, "estimate must be square");
  if (edge_count <= 0) return std::numeric_limits<double>::infinity();
  const Matrix a = symmetrized(a_hat.cwiseMax(0.0));
  std::vector<double> values;
  for (Index j = 1; j < a.cols(); ++j)
    for (Index i = 0; i < j; ++i) values.push_back(a(i, j));
  if (values.empty()) return 0.0;
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(edge_count), values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(keep - 1), values.end(),
                   std::greater<>());
  return values[keep - 1];
}

EdgeCounts edge_counts(const WeightedGraph& truth, const WeightedGraph& estimate, double edge_eps) {
  require(truth.n_nodes() == estimate.n_nodes(), ErrorCode::DimensionMismatch,
          fmt::format("f_score: graphs have {} and {} nodes", truth.n_nodes(), estimate.n_nodes()));
  EdgeCounts c;
  for (Index j = 1; j < truth.n_nodes(); ++j) {
    for (Index i = 0; i < j; ++i) {
      const bool t = truth.adjacency()(i, j) > edge_eps;
      const bool p = estimate.adjacency()(i, j) > edge_eps;
      if (t && p) ++c.true_positive;
      else if (p) ++c.false_positive;
      else if (t) ++c.false_negative;
    }
  }
  return c;
}

double f_score(const WeightedGraph& truth, const WeightedGraph& estimate, double edge_eps) {
  const EdgeCounts c = edge_counts(truth, estimate, edge_eps);
  if (c.true_positive + c.false_positive + c.false_negative == 0) return 1.0;
  if (c.true_positive == 0) return 0.0;
  const double precision = static_cast<double>(c.true_positive) / static_cast<double>(c.true_positive + c.false_positive);
  const double recall = static_cast<double>(c.true_positive) / static_cast<double>(c.true_positive + c.false_negative);
  return 2.0 * precision * recall / (precision + recall);
}

void EvalReport::validate() const {
  require(nmse >= 0.0, ErrorCode::Numeric, "nmse must be nonnegative");
  require(f_score >= 0.0 && f_score <= 1.0, ErrorCode::Numeric, "f_score must be in [0, 1]");
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_m = nlohmann::json::object();
  for (const auto& [m, cell] : report.per_m)
    per_m[std::to_string(m)] = {{"nmse", cell.nmse}, {"f_score", cell.f_score}};
  return {{"nmse", report.nmse},         {"f_score", report.f_score}, {"n_graphs", report.n_graphs},
          {"n_runs", report.n_runs},     {"per_m", per_m}};
}

}  // namespace graphlearn

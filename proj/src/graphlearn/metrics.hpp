#pragma once

#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "graphlearn/graph_core.hpp"

namespace graphlearn {

// Default support cutoff for edge detection.
inline constexpr double kEdgeEpsilon = 1e-12;

// mean ||A - A_hat||_F^2 / mean ||A||_F^2 over the list.
double nmse(std::span<const WeightedGraph> truth, std::span<const Matrix> estimate);

// Clamps negatives to zero, then zeroes every entry below tau and the diagonal.
WeightedGraph threshold_sparsify(const Matrix& a_hat, double tau);

// Threshold that keeps the `edge_count` largest upper-triangular entries of
// the clamped estimate (ties may keep more). Returns +inf when edge_count is 0.
double count_matching_threshold(const Matrix& a_hat, Index edge_count);

struct EdgeCounts {
  Index true_positive = 0;
  Index false_positive = 0;
  Index false_negative = 0;
};

EdgeCounts edge_counts(const WeightedGraph& truth, const WeightedGraph& estimate, double edge_eps);

// F1 of the predicted upper-triangular support. Both supports empty gives 1;
// no true positives otherwise gives 0.
double f_score(const WeightedGraph& truth, const WeightedGraph& estimate, double edge_eps = kEdgeEpsilon);

struct CellMetrics {
  double nmse = 0.0;
  double f_score = 0.0;
};

struct EvalReport {
  double nmse = 0.0;
  double f_score = 0.0;
  Index n_graphs = 0;
  Index n_runs = 0;
  std::map<Index, CellMetrics> per_m;

  void validate() const;
};

nlohmann::json to_json(const EvalReport& report);

}  // namespace graphlearn

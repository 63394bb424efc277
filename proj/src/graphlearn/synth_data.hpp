#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphlearn/feature_map.hpp"
#include "graphlearn/regression_solver.hpp"
#include "graphlearn/rng.hpp"

namespace graphlearn {

enum class GraphFamily { PerturbedBase, ErdosRenyi };

enum class SignalProfile {
  Smooth,         // covariance L^+
  HighFrequency,  // covariance L^2
};

struct SynthConfig {
  Index n_nodes = 10;
  Index n_graphs_train = 16;
  Index n_graphs_test = 16;
  double base_density = 0.4;
  double perturb_fraction = 0.1;
  Index n_signals = 10;
  double outlier_fraction = 0.1;
  std::uint64_t seed = 1;
  GraphFamily graph_family = GraphFamily::PerturbedBase;
  double er_edge_probability = 0.4;

  void validate() const;
  Index n_outliers() const;
};

struct Dataset {
  SynthConfig config;
  TrainingSet train;
  TrainingSet test;
  std::vector<Index> outlier_indices;  // sorted, zero-based signal columns
};

// round(fraction * N (N - 1) / 2): the number of upper-triangular pairs.
Index pair_count(Index n_nodes, double fraction);

// Connected graph with exactly pair_count(n, density) edges, U(0,1) weights.
WeightedGraph gen_base_graph(Index n_nodes, double density, Rng& rng);

// Overwrites pair_count(n, fraction) random pairs with fresh U(0,1) weights,
// then scales to unit Frobenius norm.
WeightedGraph perturb_graph(const WeightedGraph& base, double fraction, Rng& rng);

// G(n, p) with U(0,1) weights, scaled to unit Frobenius norm; redrawn while empty.
WeightedGraph gen_erdos_renyi(Index n_nodes, double edge_probability, Rng& rng);

WeightedGraph normalize_frobenius(const WeightedGraph& graph);

SignalMatrix sample_signals(const WeightedGraph& graph, Index n_signals, SignalProfile profile, Rng& rng);

// Smooth signals except at `outlier_indices`, which are high frequency.
SignalMatrix sample_mixed_signals(const WeightedGraph& graph, Index n_signals,
                                  const std::vector<Index>& outlier_indices, Rng& rng);

std::vector<Index> choose_outlier_indices(Index n_signals, Index n_outliers, Rng& rng);

// Deterministic in cfg (including the seed). Graph g (train first, then test)
// draws from its own stream, so graphs do not depend on one another's M.
Dataset build_dataset(const SynthConfig& cfg);
// Same, with a caller-chosen outlier index set (zero-based, within [0, M)).
Dataset build_dataset(const SynthConfig& cfg, std::vector<Index> outlier_indices);

std::string to_string(GraphFamily family);
GraphFamily graph_family_from_string(const std::string& name);

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected. Validates the result.
SynthConfig synth_config_from_json(const nlohmann::json& j);

// Directory layout: manifest.json plus A_<g>.csv and X_<g>.csv for every
// graph g, training graphs first.
void export_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset import_dataset(const std::filesystem::path& dir);

}  // namespace graphlearn

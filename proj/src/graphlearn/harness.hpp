#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "graphlearn/feature_map.hpp"
#include "graphlearn/metrics.hpp"
#include "graphlearn/regression_solver.hpp"
#include "graphlearn/synth_data.hpp"

namespace graphlearn {

/// How hyperparameters follow the training data. Unset alpha/beta scale as
/// alpha_scale / M and beta_scale / M; unset sigma is sigma_scale times the
/// median squared signal difference (default_sigma()).
struct HyperRule {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> sigma;
  double alpha_scale = 0.1;
  double beta_scale = 10.0;
  double sigma_scale = 0.1;
  SpectralPolynomial h{0.0, 1.0, 0.0};

  Hyperparameters resolve(const TrainingSet& ts) const;
};

/// Fixed tau, or (when unset) keep as many edges per test graph as the
/// training graphs have on average.
struct ThresholdRule {
  std::optional<double> tau;
};

struct TrainOutcome {
  RegressionModel model;
  double final_cost = 0.0;
  double gradient_norm = 0.0;
  double stationarity_tol = 0.0;
  double min_curvature = 0.0;
};

// Solves, then checks stationarity with a finite-difference gradient of the
// cost. Throws ErrorCode::Numeric when the check fails.
TrainOutcome train_model(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options = {});

struct Evaluation {
  EvalReport report;
  double nmse_thresholded = 0.0;
  std::vector<Matrix> estimates;  // clamped, not thresholded
  std::vector<WeightedGraph> thresholded;
  std::vector<double> f_scores;
};

// `reference_edge_count` drives the count-matching threshold; ignored when
// the rule carries a fixed tau.
Evaluation evaluate_model(const RegressionModel& model, const TrainingSet& test, const ThresholdRule& rule,
                          double reference_edge_count);

struct ExperimentConfig {
  SynthConfig synth;                 // n_signals and outlier_fraction are swept
  std::vector<double> m_over_n{1, 4, 8, 16, 32};
  std::vector<Index> m_values;       // overrides m_over_n when non-empty
  std::vector<double> outlier_fractions{0.1, 0.25};
  Index runs = 100;
  HyperRule hyper;
  ThresholdRule threshold;
  unsigned threads = 0;              // 0: hardware concurrency

  void validate() const;
  std::vector<Index> signal_counts() const;
};

struct RunRecord {
  Index m = 0;
  double outlier_fraction = 0.0;
  Index run = 0;
  double nmse = 0.0;
  double nmse_thresholded = 0.0;
  double f_score = 0.0;
  double gradient_norm = 0.0;
  bool psd_warning = false;
  Vector w;
};

struct CellSummary {
  Index m = 0;
  double m_over_n = 0.0;
  double outlier_fraction = 0.0;
  Index runs = 0;
  std::vector<Index> outlier_indices;
  double nmse_mean = 0.0;
  double nmse_std = 0.0;
  double nmse_thresholded_mean = 0.0;
  double f_mean = 0.0;
  double f_std = 0.0;
  Vector w_mean;
  Vector w_std;
  // Per-run means of w over smooth and over outlier indices, averaged over
  // runs, with the pooled standard error of their difference.
  double w_smooth_mean = 0.0;
  double w_outlier_mean = 0.0;
  double w_trend_standard_error = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;  // ordered by cell, then run index
  std::vector<CellSummary> cells;
};

// Deterministic in the config: run r of every cell draws its graphs from
// seed stream (synth.seed, r), and each cell fixes one outlier index set
// shared by all of its runs.
ExperimentResult run_experiment(const ExperimentConfig& config);

// runs.csv, summary.csv, weights.csv and report.json.
void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

nlohmann::json hyper_rule_to_json(const HyperRule& rule);
HyperRule hyper_rule_from_json(const nlohmann::json& j, HyperRule base = {});
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_report_json(const ExperimentResult& result);

}  // namespace graphlearn

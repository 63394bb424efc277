#include "graphlearn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "graphlearn/error.hpp"
#include "graphlearn/logging.hpp"
#include "graphlearn/matrix_io.hpp"

namespace graphlearn {

using nlohmann::json;

Hyperparameters HyperRule::resolve(const TrainingSet& ts) const {
  require(!ts.empty(), ErrorCode::Degenerate, "training set has no graphs");
  const double m = static_cast<double>(ts.n_signals());
  Hyperparameters hyper;
  hyper.alpha = alpha.value_or(alpha_scale / m);
  hyper.beta = beta.value_or(beta_scale / m);
  hyper.sigma = sigma ? *sigma : default_sigma(ts.signal_matrices(), sigma_scale);
  hyper.h = h;
  hyper.validate();
  return hyper;
}

TrainOutcome train_model(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options) {
  SolveDiagnostics diagnostics;
  TrainOutcome out;
  out.model = solve(ts, hyper, options, diagnostics);
  out.min_curvature = diagnostics.min_curvature;
  out.final_cost = cost(out.model.w, ts, hyper);
  // The cost is quadratic, so central differences carry no truncation
  // error and a wide step only reduces round-off.
  const double step = 1e-2 * std::max(1.0, out.model.w.cwiseAbs().maxCoeff());
  out.gradient_norm = finite_difference_gradient(out.model.w, ts, hyper, step).norm();
  out.stationarity_tol = stationarity_tolerance(diagnostics.system);
  require(out.gradient_norm <= out.stationarity_tol, ErrorCode::Numeric,
          fmt::format("solution is not stationary: gradient norm {:.3g} exceeds {:.3g}", out.gradient_norm,
                      out.stationarity_tol));
  return out;
}

Evaluation evaluate_model(const RegressionModel& model, const TrainingSet& test, const ThresholdRule& rule,
                          double reference_edge_count) {
  require(!test.empty(), ErrorCode::Degenerate, "test set has no graphs");
  require(test.n_signals() == model.k(), ErrorCode::DimensionMismatch,
          fmt::format("model has K = {} but test signals have M = {}", model.k(), test.n_signals()));
  Evaluation ev;
  std::vector<WeightedGraph> truth;
  std::vector<Matrix> thresholded_dense;
  double f_total = 0.0;
  const auto keep = static_cast<Index>(std::lround(reference_edge_count));
  for (const auto& s : test.samples()) {
    const FeatureBlockMatrix phi_mat = assemble_feature_matrix(s.signals, model.sigma);
    const WeightedGraph estimate = predict_adjacency(phi_mat, model);
    const double tau = rule.tau ? *rule.tau : count_matching_threshold(estimate.adjacency(), keep);
    WeightedGraph sparse = threshold_sparsify(estimate.adjacency(), tau);
    const double f = f_score(s.graph, sparse);
    f_total += f;
    ev.f_scores.push_back(f);
    truth.push_back(s.graph);
    ev.estimates.push_back(estimate.adjacency());
    thresholded_dense.push_back(sparse.adjacency());
    ev.thresholded.push_back(std::move(sparse));
  }
  ev.report.nmse = nmse(truth, ev.estimates);
  ev.nmse_thresholded = nmse(truth, thresholded_dense);
  ev.report.f_score = f_total / static_cast<double>(test.size());
  ev.report.n_graphs = static_cast<Index>(test.size());
  ev.report.n_runs = 1;
  ev.report.validate();
  return ev;
}

void ExperimentConfig::validate() const {
  SynthConfig probe = synth;
  probe.outlier_fraction = 0.0;
  probe.validate();
  require(synth.n_graphs_train >= 1 && synth.n_graphs_test >= 1, ErrorCode::InvalidArgument,
          "experiment needs at least one training and one test graph");
  require(runs >= 1, ErrorCode::InvalidArgument, fmt::format("runs must be >= 1, got {}", runs));
  require(!outlier_fractions.empty(), ErrorCode::InvalidArgument, "outlier_fractions must not be empty");
  for (double f : outlier_fractions)
    require(std::isfinite(f) && f >= 0.0 && f <= 1.0, ErrorCode::InvalidArgument,
            fmt::format("outlier fraction must be in [0, 1], got {}", f));
  require(!signal_counts().empty(), ErrorCode::InvalidArgument, "the M sweep is empty");
  if (hyper.alpha) require(*hyper.alpha >= 0.0, ErrorCode::InvalidArgument, "alpha must be nonnegative");
  if (hyper.beta) require(*hyper.beta >= 0.0, ErrorCode::InvalidArgument, "beta must be nonnegative");
  if (hyper.sigma) require(*hyper.sigma > 0.0, ErrorCode::InvalidArgument, "sigma must be positive");
  if (threshold.tau) require(*threshold.tau >= 0.0, ErrorCode::InvalidArgument, "threshold must be nonnegative");
}

std::vector<Index> ExperimentConfig::signal_counts() const {
  std::vector<Index> out;
  if (!m_values.empty()) {
    out = m_values;
  } else {
    for (double ratio : m_over_n) out.push_back(static_cast<Index>(std::lround(ratio * static_cast<double>(synth.n_nodes))));
  }
  for (Index m : out) require(m >= 1, ErrorCode::InvalidArgument, fmt::format("signal count must be >= 1, got {}", m));
  return out;
}

namespace {

struct Cell {
  Index m;
  double outlier_fraction;
  std::vector<Index> outliers;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation; zero for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

RunRecord run_cell(const ExperimentConfig& config, const Cell& cell, Index run) {
  SynthConfig synth = config.synth;
  synth.n_signals = cell.m;
  synth.outlier_fraction = cell.outlier_fraction;
  synth.seed = Rng::derive_seed(config.synth.seed, "run", {static_cast<std::uint64_t>(run)});
  const Dataset ds = build_dataset(synth, cell.outliers);
  const Hyperparameters hyper = config.hyper.resolve(ds.train);
  const TrainOutcome trained = train_model(ds.train, hyper);
  const Evaluation ev = evaluate_model(trained.model, ds.test, config.threshold, ds.train.mean_edge_count());
  RunRecord r;
  r.m = cell.m;
  r.outlier_fraction = cell.outlier_fraction;
  r.run = run;
  r.nmse = ev.report.nmse;
  r.nmse_thresholded = ev.nmse_thresholded;
  r.f_score = ev.report.f_score;
  r.gradient_norm = trained.gradient_norm;
  r.psd_warning = trained.model.psd_warning;
  r.w = trained.model.w;
  return r;
}

CellSummary summarize(const ExperimentConfig& config, const Cell& cell, std::span<const RunRecord> records) {
  CellSummary s;
  s.m = cell.m;
  s.m_over_n = static_cast<double>(cell.m) / static_cast<double>(config.synth.n_nodes);
  s.outlier_fraction = cell.outlier_fraction;
  s.runs = static_cast<Index>(records.size());
  s.outlier_indices = cell.outliers;
  std::vector<double> nmse, nmse_thr, f, smooth, outlier;
  Matrix w(cell.m, static_cast<Index>(records.size()));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const RunRecord& rec = records[r];
    nmse.push_back(rec.nmse);
    nmse_thr.push_back(rec.nmse_thresholded);
    f.push_back(rec.f_score);
    w.col(static_cast<Index>(r)) = rec.w;
    double sum_s = 0.0, sum_o = 0.0;
    Index n_s = 0, n_o = 0;
    for (Index k = 0; k < cell.m; ++k) {
      if (std::binary_search(cell.outliers.begin(), cell.outliers.end(), k)) {
        sum_o += rec.w(k);
        ++n_o;
      } else {
        sum_s += rec.w(k);
        ++n_s;
      }
    }
    if (n_s) smooth.push_back(sum_s / static_cast<double>(n_s));
    if (n_o) outlier.push_back(sum_o / static_cast<double>(n_o));
  }
  s.nmse_mean = mean_of(nmse);
  s.nmse_std = std_of(nmse);
  s.nmse_thresholded_mean = mean_of(nmse_thr);
  s.f_mean = mean_of(f);
  s.f_std = std_of(f);
  s.w_mean = w.rowwise().mean();
  s.w_std = Vector::Zero(cell.m);
  if (records.size() >= 2) {
    for (Index k = 0; k < cell.m; ++k)
      s.w_std(k) = std::sqrt((w.row(k).array() - s.w_mean(k)).square().sum() / static_cast<double>(records.size() - 1));
  }
  s.w_smooth_mean = mean_of(smooth);
  s.w_outlier_mean = mean_of(outlier);
  if (!smooth.empty() && !outlier.empty()) {
    const double se_s = std_of(smooth);
    const double se_o = std_of(outlier);
    s.w_trend_standard_error = std::sqrt(se_s * se_s / static_cast<double>(smooth.size()) +
                                         se_o * se_o / static_cast<double>(outlier.size()));
  }
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<Cell> cells;
  for (double fraction : config.outlier_fractions) {
    for (Index m : config.signal_counts()) {
      SynthConfig probe = config.synth;
      probe.n_signals = m;
      probe.outlier_fraction = fraction;
      Rng rng = Rng::stream(config.synth.seed, "cell-outliers",
                            {static_cast<std::uint64_t>(m), std::bit_cast<std::uint64_t>(fraction)});
      cells.push_back({m, fraction, choose_outlier_indices(m, probe.n_outliers(), rng)});
    }
  }

  const std::size_t runs = static_cast<std::size_t>(config.runs);
  const std::size_t jobs = cells.size() * runs;
  std::vector<RunRecord> records(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      try {
        const std::size_t c = job / runs;
        records[job] = run_cell(config, cells[c], static_cast<Index>(job % runs));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(config.threads ? config.threads : hw, jobs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.config = config;
  result.runs = std::move(records);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    result.cells.push_back(summarize(config, cells[c], std::span<const RunRecord>(result.runs).subspan(c * runs, runs)));
    const CellSummary& s = result.cells.back();
    log::info(fmt::format("M={} outliers={:.2f}: nmse {:.4f} +- {:.4f}, F {:.3f} +- {:.3f}", s.m, s.outlier_fraction,
                          s.nmse_mean, s.nmse_std, s.f_mean, s.f_std));
  }
  return result;
}

void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::Io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  const double n = static_cast<double>(result.config.synth.n_nodes);

  std::string runs = "m,m_over_n,outlier_fraction,run,nmse,nmse_thresholded,f_score,gradient_norm,psd_warning\n";
  for (const RunRecord& r : result.runs) {
    runs += fmt::format("{},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.m, static_cast<double>(r.m) / n,
                        r.outlier_fraction, r.run, r.nmse, r.nmse_thresholded, r.f_score, r.gradient_norm,
                        r.psd_warning ? 1 : 0);
  }
  io::write_text(dir / "runs.csv", runs);

  std::string summary = "m,m_over_n,outlier_fraction,nmse_mean,nmse_std,f_mean,f_std,nmse_thresholded_mean,runs\n";
  std::string weights = "m,m_over_n,outlier_fraction,index,is_outlier,w_mean,w_std\n";
  for (const CellSummary& s : result.cells) {
    summary += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", s.m, s.m_over_n,
                           s.outlier_fraction, s.nmse_mean, s.nmse_std, s.f_mean, s.f_std, s.nmse_thresholded_mean,
                           s.runs);
    for (Index k = 0; k < s.m; ++k) {
      const bool is_outlier = std::binary_search(s.outlier_indices.begin(), s.outlier_indices.end(), k);
      weights += fmt::format("{},{:.17g},{:.17g},{},{},{:.17g},{:.17g}\n", s.m, s.m_over_n, s.outlier_fraction, k,
                             is_outlier ? 1 : 0, s.w_mean(k), s.w_std(k));
    }
  }
  io::write_text(dir / "summary.csv", summary);
  io::write_text(dir / "weights.csv", weights);
  io::write_text(dir / "report.json", experiment_report_json(result).dump(2) + "\n");
}

json hyper_rule_to_json(const HyperRule& rule) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"alpha", opt(rule.alpha)},           {"beta", opt(rule.beta)},
          {"sigma", opt(rule.sigma)},           {"alpha_scale", rule.alpha_scale},
          {"beta_scale", rule.beta_scale},      {"sigma_scale", rule.sigma_scale},
          {"h", rule.h.coefficients()}};
}

HyperRule hyper_rule_from_json(const json& j, HyperRule rule) {
  require(j.is_object(), ErrorCode::InvalidArgument, "hyper config must be a JSON object");
  auto opt = [](const json& v) { return v.is_null() ? std::optional<double>{} : std::optional<double>{v.get<double>()}; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "alpha") rule.alpha = opt(value);
      else if (key == "beta") rule.beta = opt(value);
      else if (key == "sigma") rule.sigma = opt(value);
      else if (key == "alpha_scale") rule.alpha_scale = value.get<double>();
      else if (key == "beta_scale") rule.beta_scale = value.get<double>();
      else if (key == "sigma_scale") rule.sigma_scale = value.get<double>();
      else if (key == "h") rule.h = SpectralPolynomial::from_coefficients(value.get<std::vector<double>>());
      else fail(ErrorCode::InvalidArgument, fmt::format("unknown hyper config key '{}'", key));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, fmt::format("invalid hyper config: {}", e.what()));
  }
  return rule;
}

json experiment_config_to_json(const ExperimentConfig& config) {
  return {{"synth", synth_config_to_json(config.synth)},
          {"m_over_n", config.m_over_n},
          {"m_values", config.m_values},
          {"outlier_fractions", config.outlier_fractions},
          {"runs", config.runs},
          {"hyper", hyper_rule_to_json(config.hyper)},
          {"threshold", config.threshold.tau ? json(*config.threshold.tau) : json(nullptr)},
          {"threads", config.threads}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  require(j.is_object(), ErrorCode::InvalidArgument, "experiment config must be a JSON object");
  ExperimentConfig config;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "synth") config.synth = synth_config_from_json(value);
      else if (key == "m_over_n") config.m_over_n = value.get<std::vector<double>>();
      else if (key == "m_values") config.m_values = value.get<std::vector<Index>>();
      else if (key == "outlier_fractions") config.outlier_fractions = value.get<std::vector<double>>();
      else if (key == "runs") config.runs = value.get<Index>();
      else if (key == "hyper") config.hyper = hyper_rule_from_json(value);
      else if (key == "threshold")
        config.threshold.tau = value.is_null() ? std::optional<double>{} : std::optional<double>{value.get<double>()};
      else if (key == "threads") config.threads = value.get<unsigned>();
      else fail(ErrorCode::InvalidArgument, fmt::format("unknown experiment config key '{}'", key));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, fmt::format("invalid experiment config: {}", e.what()));
  }
  config.validate();
  return config;
}

json experiment_report_json(const ExperimentResult& result) {
  json cells = json::array();
  for (const CellSummary& s : result.cells) {
    cells.push_back({{"m", s.m},
                     {"m_over_n", s.m_over_n},
                     {"outlier_fraction", s.outlier_fraction},
                     {"runs", s.runs},
                     {"outlier_indices", s.outlier_indices},
                     {"nmse_mean", s.nmse_mean},
                     {"nmse_std", s.nmse_std},
                     {"nmse_thresholded_mean", s.nmse_thresholded_mean},
                     {"f_mean", s.f_mean},
                     {"f_std", s.f_std},
                     {"w_mean", std::vector<double>(s.w_mean.data(), s.w_mean.data() + s.w_mean.size())},
                     {"w_smooth_mean", s.w_smooth_mean},
                     {"w_outlier_mean", s.w_outlier_mean},
                     {"w_trend_standard_error", s.w_trend_standard_error}});
  }
  // One EvalReport per outlier fraction, keyed by M.
  json reports = json::object();
  for (double fraction : result.config.outlier_fractions) {
    EvalReport report;
    double nmse_sum = 0.0, f_sum = 0.0;
    Index count = 0;
    for (const CellSummary& s : result.cells) {
      if (s.outlier_fraction != fraction) continue;
      report.per_m[s.m] = {s.nmse_mean, s.f_mean};
      nmse_sum += s.nmse_mean;
      f_sum += s.f_mean;
      ++count;
    }
    report.nmse = count ? nmse_sum / static_cast<double>(count) : 0.0;
    report.f_score = count ? f_sum / static_cast<double>(count) : 0.0;
    report.n_graphs = result.config.synth.n_graphs_test;
    report.n_runs = result.config.runs;
    reports[fmt::format("{:g}", fraction)] = to_json(report);
  }
  return {{"config", experiment_config_to_json(result.config)}, {"cells", cells}, {"eval_reports", reports}};
}

}  // namespace graphlearn

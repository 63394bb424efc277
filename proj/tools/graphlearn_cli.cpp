// graphlearn command line front end. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "graphlearn/graphlearn.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 runtime failure, 2 bad arguments or input.
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(gl_status s) {
  switch (s) {
    case GL_ERR_INVALID_ARGUMENT:
    case GL_ERR_DIMENSION:
    case GL_ERR_PARSE:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

void check(gl_status s, const std::string& what) {
  if (s != GL_OK) throw Failure{exit_code_for(s), what + ": " + gl_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitUsage, msg}; }

struct MatrixDeleter {
  void operator()(gl_matrix* m) const { gl_matrix_free(m); }
};
struct DatasetDeleter {
  void operator()(gl_dataset* d) const { gl_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(gl_model* m) const { gl_model_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { gl_string_free(s); }
};
using MatrixPtr = std::unique_ptr<gl_matrix, MatrixDeleter>;
using DatasetPtr = std::unique_ptr<gl_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<gl_model, ModelDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

std::string take(char* s) { return std::string(StringPtr(s).get()); }

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Failure{kExitRuntime, "cannot open config file '" + path + "'"};
  try {
    json j = json::parse(in);
    if (!j.is_object()) usage_error("config file '" + path + "' must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    usage_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kExitRuntime, "cannot create directory '" + dir + "': " + ec.message()};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Failure{kExitRuntime, "cannot write '" + path.string() + "'"};
  out << text << '\n';
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text << '\n';
  } else {
    const fs::path p(output);
    if (p.has_parent_path()) ensure_dir(p.parent_path().string());
    write_file(p, text);
  }
}

// Flags shared by train and experiment.
struct HyperFlags {
  std::optional<double> alpha, beta, sigma, h0, h1, h2;

  void add_to(CLI::App* app) {
    app->add_option("--alpha", alpha, "Spectral regularization weight (default 0.1/M)");
    app->add_option("--beta", beta, "Ridge weight (default 10/M)");
    app->add_option("--sigma", sigma, "Feature saturation parameter (default data driven)")->check(CLI::PositiveNumber);
    app->add_option("--h0", h0, "Spectral polynomial constant term");
    app->add_option("--h1", h1, "Spectral polynomial linear term");
    app->add_option("--h2", h2, "Spectral polynomial quadratic term");
  }

  void apply(json& hyper) const {
    if (!hyper.is_object()) usage_error("'hyper' must be a JSON object");
    if (alpha) hyper["alpha"] = *alpha;
    if (beta) hyper["beta"] = *beta;
    if (sigma) hyper["sigma"] = *sigma;
    if (h0 || h1 || h2) {
      json h = hyper.contains("h") ? hyper["h"] : json::array({0.0, 1.0, 0.0});
      if (!h.is_array() || h.size() != 3) usage_error("'h' must be an array of three coefficients");
      if (h0) h[0] = *h0;
      if (h1) h[1] = *h1;
      if (h2) h[2] = *h2;
      hyper["h"] = h;
    }
  }
};

struct Options {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;

  // synth
  std::optional<long> nodes, signals, train_graphs, test_graphs;
  std::optional<double> outlier_frac;

  // train / predict / evaluate
  std::string data;
  std::string model;
  std::string signals_path;
  std::optional<double> threshold;
  HyperFlags hyper;

  // experiment
  std::optional<long> runs;
  std::optional<long> threads;
  std::vector<double> m_sweep;
  std::vector<double> outlier_fracs;
};

DatasetPtr load_dataset(const std::string& dir) {
  if (dir.empty()) usage_error("--data is required");
  gl_dataset* ds = nullptr;
  check(gl_dataset_load(dir.c_str(), &ds), "loading dataset '" + dir + "'");
  return DatasetPtr(ds);
}

ModelPtr load_model(const std::string& path) {
  if (path.empty()) usage_error("--model is required");
  gl_model* m = nullptr;
  check(gl_model_load(path.c_str(), &m), "loading model '" + path + "'");
  return ModelPtr(m);
}

std::string threshold_options(const std::optional<double>& tau) {
  json j = json::object();
  if (tau) j["threshold"] = *tau;
  return j.dump();
}

int cmd_synth(const Options& o) {
  json cfg = read_config(o.config);
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.nodes) cfg["n_nodes"] = *o.nodes;
  if (o.signals) cfg["n_signals"] = *o.signals;
  if (o.train_graphs) cfg["n_graphs_train"] = *o.train_graphs;
  if (o.test_graphs) cfg["n_graphs_test"] = *o.test_graphs;
  if (o.outlier_frac) cfg["outlier_fraction"] = *o.outlier_frac;
  if (o.output.empty()) usage_error("--output is required");

  gl_dataset* raw = nullptr;
  check(gl_dataset_synthesize(cfg.dump().c_str(), &raw), "synthesizing dataset");
  DatasetPtr ds(raw);
  ensure_dir(o.output);
  check(gl_dataset_save(ds.get(), o.output.c_str()), "saving dataset");
  char* summary = nullptr;
  check(gl_dataset_summary(ds.get(), &summary), "summarizing dataset");
  std::cout << take(summary) << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  json hyper = read_config(o.config);
  o.hyper.apply(hyper);
  DatasetPtr ds = load_dataset(o.data);
  if (gl_dataset_size(ds.get(), GL_SPLIT_TRAIN) == 0) usage_error("dataset '" + o.data + "' has no training graphs");

  gl_model* raw = nullptr;
  char* report = nullptr;
  check(gl_train(ds.get(), hyper.dump().c_str(), &raw, &report), "training");
  ModelPtr model(raw);
  const json r = json::parse(take(report));
  std::ostream& info = o.output.empty() ? std::cerr : std::cout;
  info << fmt::format("trained on {} graphs, K = {}\n", r.at("n_graphs").get<long>(), r.at("k").get<long>());
  info << fmt::format("final cost     {:.6g}\n", r.at("final_cost").get<double>());
  info << fmt::format("gradient norm  {:.3e} (tolerance {:.3e})\n", r.at("gradient_norm").get<double>(),
                      r.at("stationarity_tolerance").get<double>());
  info << fmt::format("psd warning    {} (min curvature {:.3e})\n", r.at("psd_warning").get<bool>() ? "yes" : "no",
                      r.at("min_curvature").get<double>());
  if (o.output.empty()) {
    char* text = nullptr;
    check(gl_model_to_json(model.get(), &text), "serializing model");
    std::cout << take(text) << '\n';
  } else {
    const fs::path p(o.output);
    if (p.has_parent_path()) ensure_dir(p.parent_path().string());
    check(gl_model_save(model.get(), o.output.c_str()), "saving model");
  }
  return 0;
}

// Writes raw, clamped and thresholded predictions for one signal matrix.
void predict_one(const gl_model* model, const gl_matrix* signals, double tau, const fs::path& dir,
                 const std::string& stem) {
  gl_matrix* raw = nullptr;
  check(gl_predict_raw(model, signals, &raw), "predicting " + stem);
  MatrixPtr raw_m(raw);
  gl_matrix* thr = nullptr;
  check(gl_threshold(raw_m.get(), tau, &thr), "thresholding " + stem);
  MatrixPtr thr_m(thr);
  check(gl_matrix_save(raw_m.get(), (dir / (stem + "_raw.csv")).string().c_str()), "saving " + stem);
  check(gl_matrix_save(thr_m.get(), (dir / (stem + "_thresholded.csv")).string().c_str()), "saving " + stem);
}

std::vector<double> matrix_values(const gl_matrix* m) {
  std::vector<double> v(gl_matrix_rows(m) * gl_matrix_cols(m));
  check(gl_matrix_copy_data(m, v.data(), v.size()), "reading matrix");
  return v;
}

// The tau that keeps `count` upper-triangular entries of the clamped estimate.
double count_threshold(const gl_matrix* estimate, long count) {
  const std::size_t n = gl_matrix_rows(estimate);
  const std::vector<double> v = matrix_values(estimate);
  std::vector<double> upper;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) upper.push_back(std::max(0.0, 0.5 * (v[i * n + j] + v[j * n + i])));
  if (count <= 0 || upper.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(count), upper.size());
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(keep - 1), upper.end(),
                   std::greater<>());
  return upper[keep - 1];
}

long mean_train_edges(const gl_dataset* ds) {
  const std::size_t g = gl_dataset_size(ds, GL_SPLIT_TRAIN);
  if (g == 0) return -1;
  double total = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    gl_matrix* a = nullptr;
    check(gl_dataset_adjacency(ds, GL_SPLIT_TRAIN, i, &a), "reading training graph");
    MatrixPtr am(a);
    const std::size_t n = gl_matrix_rows(a);
    const std::vector<double> v = matrix_values(a);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r + 1; c < n; ++c) total += v[r * n + c] > 1e-12 ? 1.0 : 0.0;
  }
  return std::lround(total / static_cast<double>(g));
}

int cmd_predict(const Options& o) {
  ModelPtr model = load_model(o.model);
  if (o.output.empty()) usage_error("--output is required");
  if (o.signals_path.empty() == o.data.empty()) usage_error("pass exactly one of --signals or --data");
  if (o.threshold && *o.threshold < 0) usage_error("--threshold must be nonnegative");
  ensure_dir(o.output);
  const fs::path dir(o.output);

  if (!o.signals_path.empty()) {
    gl_matrix* x = nullptr;
    check(gl_matrix_load(o.signals_path.c_str(), &x), "loading signals '" + o.signals_path + "'");
    MatrixPtr xm(x);
    predict_one(model.get(), xm.get(), o.threshold.value_or(0.0), dir, "prediction");
    return 0;
  }

  DatasetPtr ds = load_dataset(o.data);
  const long edges = o.threshold ? -1 : mean_train_edges(ds.get());
  const std::size_t n_test = gl_dataset_size(ds.get(), GL_SPLIT_TEST);
  for (std::size_t i = 0; i < n_test; ++i) {
    gl_matrix* x = nullptr;
    check(gl_dataset_signals(ds.get(), GL_SPLIT_TEST, i, &x), "reading test signals");
    MatrixPtr xm(x);
    double tau = o.threshold.value_or(0.0);
    if (!o.threshold && edges >= 0) {
      gl_matrix* raw = nullptr;
      check(gl_predict_raw(model.get(), xm.get(), &raw), "predicting");
      MatrixPtr rm(raw);
      tau = count_threshold(rm.get(), edges);
    }
    predict_one(model.get(), xm.get(), tau, dir, "test_" + std::to_string(i));
  }
  std::cout << "wrote " << n_test << " predictions to " << o.output << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  ModelPtr model = load_model(o.model);
  DatasetPtr ds = load_dataset(o.data);
  if (o.threshold && *o.threshold < 0) usage_error("--threshold must be nonnegative");
  char* report = nullptr;
  check(gl_evaluate(model.get(), ds.get(), threshold_options(o.threshold).c_str(), &report), "evaluating");
  emit(take(report), o.output);
  return 0;
}

int cmd_experiment(const Options& o) {
  json cfg = read_config(o.config);
  if (o.seed) cfg["synth"]["seed"] = *o.seed;
  if (o.runs) cfg["runs"] = *o.runs;
  if (o.threads) cfg["threads"] = *o.threads;
  if (!o.m_sweep.empty()) {
    cfg.erase("m_values");
    cfg["m_over_n"] = o.m_sweep;
  }
  if (!o.outlier_fracs.empty()) cfg["outlier_fractions"] = o.outlier_fracs;
  if (o.threshold) cfg["threshold"] = *o.threshold;
  if (!cfg.contains("hyper")) cfg["hyper"] = json::object();
  o.hyper.apply(cfg["hyper"]);
  if (o.output.empty()) usage_error("--output is required");
  ensure_dir(o.output);

  char* report = nullptr;
  check(gl_experiment_run(cfg.dump().c_str(), o.output.c_str(), &report), "running experiment");
  const json j = json::parse(take(report));
  std::printf("%8s %8s %10s %10s\n", "M", "outliers", "NMSE", "F");
  for (const json& cell : j.at("cells"))
    std::printf("%8ld %8.3f %10.4f %10.4f\n", cell.at("m").get<long>(), cell.at("outlier_fraction").get<double>(),
                cell.at("nmse_mean").get<double>(), cell.at("f_mean").get<double>());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised graph learning from graph signals"};
  app.set_version_flag("--version", std::string(gl_version()));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    sub->add_option("--output", o.output, "Output file or directory");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  common(synth);
  synth->add_option("--seed", o.seed, "Random seed");
  synth->add_option("--nodes", o.nodes, "Nodes per graph");
  synth->add_option("--signals", o.signals, "Signals per graph (M)");
  synth->add_option("--train-graphs", o.train_graphs, "Number of training graphs");
  synth->add_option("--test-graphs", o.test_graphs, "Number of test graphs");
  synth->add_option("--outlier-frac", o.outlier_frac, "Fraction of high-frequency signals");

  CLI::App* train = app.add_subcommand("train", "Fit regression coefficients on a dataset");
  common(train);
  train->add_option("--data", o.data, "Dataset directory")->required();
  o.hyper.add_to(train);

  CLI::App* predict = app.add_subcommand("predict", "Predict adjacency matrices from signals");
  common(predict);
  predict->add_option("--model", o.model, "Model JSON")->required();
  predict->add_option("--signals", o.signals_path, "Signal matrix (CSV or JSON), one row per node");
  predict->add_option("--data", o.data, "Dataset directory; predicts every test graph");
  predict->add_option("--threshold", o.threshold, "Fixed threshold (default: match training edge count)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "NMSE and F-score on a dataset's test graphs");
  common(evaluate);
  evaluate->add_option("--model", o.model, "Model JSON")->required();
  evaluate->add_option("--data", o.data, "Dataset directory")->required();
  evaluate->add_option("--threshold", o.threshold, "Fixed threshold (default: match training edge count)");

  CLI::App* experiment = app.add_subcommand("experiment", "Monte-Carlo sweep over M and outlier fraction");
  common(experiment);
  experiment->add_option("--seed", o.seed, "Master seed");
  experiment->add_option("--runs", o.runs, "Monte-Carlo runs per cell")->check(CLI::PositiveNumber);
  experiment->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  experiment->add_option("--m-sweep", o.m_sweep, "M/N ratios, comma separated")->delimiter(',');
  experiment->add_option("--outlier-frac", o.outlier_fracs, "Outlier fractions, comma separated")->delimiter(',');
  experiment->add_option("--threshold", o.threshold, "Fixed threshold (default: match training edge count)");
  o.hyper.add_to(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "graphlearn: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (train->parsed()) return cmd_train(o);
    if (predict->parsed()) return cmd_predict(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (experiment->parsed()) return cmd_experiment(o);
  } catch (const Failure& f) {
    std::cerr << "graphlearn: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "graphlearn: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

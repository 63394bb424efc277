#include "graphlearn/graphlearn.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "graphlearn/error.hpp"
#include "graphlearn/feature_map.hpp"
#include "graphlearn/harness.hpp"
#include "graphlearn/matrix_io.hpp"
#include "graphlearn/metrics.hpp"
#include "graphlearn/synth_data.hpp"

struct gl_matrix {
  graphlearn::Matrix value;
};

struct gl_dataset {
  graphlearn::Dataset value;
};

struct gl_model {
  graphlearn::RegressionModel value;
};

namespace {

using graphlearn::ErrorCode;
using nlohmann::json;

thread_local std::string last_error;

gl_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return GL_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return GL_ERR_DIMENSION;
    case ErrorCode::Io: return GL_ERR_IO;
    case ErrorCode::Parse: return GL_ERR_PARSE;
    case ErrorCode::Degenerate: return GL_ERR_DEGENERATE;
    case ErrorCode::Numeric: return GL_ERR_NUMERIC;
  }
  return GL_ERR_INTERNAL;
}

template <typename Fn>
gl_status guarded(Fn&& fn) {
  try {
    fn();
    return GL_OK;
  } catch (const graphlearn::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    last_error = std::string("invalid JSON: ") + e.what();
    return GL_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GL_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return GL_ERR_INTERNAL;
  }
}

void require_arg(const void* p, const char* name) {
  graphlearn::require(p != nullptr, ErrorCode::InvalidArgument, std::string(name) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_config(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    graphlearn::fail(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
}

const graphlearn::TrainingSet& split_of(const gl_dataset* ds, gl_split split) {
  return split == GL_SPLIT_TRAIN ? ds->value.train : ds->value.test;
}

const graphlearn::TrainingSample& sample_at(const gl_dataset* ds, gl_split split, size_t index) {
  require_arg(ds, "dataset");
  const auto& set = split_of(ds, split);
  graphlearn::require(index < set.size(), ErrorCode::InvalidArgument,
                      "graph index " + std::to_string(index) + " out of range (" + std::to_string(set.size()) + ")");
  return set.samples()[index];
}

gl_matrix* new_matrix(graphlearn::Matrix m) { return new gl_matrix{std::move(m)}; }

}  // namespace

extern "C" {

const char* gl_version(void) { return "1.0.0"; }

const char* gl_last_error(void) { return last_error.c_str(); }

const char* gl_status_name(gl_status status) {
  switch (status) {
    case GL_OK: return "ok";
    case GL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GL_ERR_DIMENSION: return "dimension mismatch";
    case GL_ERR_IO: return "i/o error";
    case GL_ERR_PARSE: return "parse error";
    case GL_ERR_DEGENERATE: return "degenerate input";
    case GL_ERR_NUMERIC: return "numerical failure";
    case GL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void gl_string_free(char* s) { delete[] s; }

gl_status gl_matrix_create(size_t rows, size_t cols, const double* row_major, gl_matrix** out) {
  return guarded([&] {
    require_arg(out, "out");
    graphlearn::require(rows == 0 || cols == 0 || row_major != nullptr, ErrorCode::InvalidArgument,
                        "data must not be null");
    graphlearn::Matrix m(static_cast<graphlearn::Index>(rows), static_cast<graphlearn::Index>(cols));
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j)
        m(static_cast<graphlearn::Index>(i), static_cast<graphlearn::Index>(j)) = row_major[i * cols + j];
    *out = new_matrix(std::move(m));
  });
}

size_t gl_matrix_rows(const gl_matrix* m) { return m ? static_cast<size_t>(m->value.rows()) : 0; }

size_t gl_matrix_cols(const gl_matrix* m) { return m ? static_cast<size_t>(m->value.cols()) : 0; }

gl_status gl_matrix_copy_data(const gl_matrix* m, double* out, size_t len) {
  return guarded([&] {
    require_arg(m, "matrix");
    require_arg(out, "out");
    const size_t rows = gl_matrix_rows(m);
    const size_t cols = gl_matrix_cols(m);
    graphlearn::require(len >= rows * cols, ErrorCode::InvalidArgument, "output buffer is too small");
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j)
        out[i * cols + j] = m->value(static_cast<graphlearn::Index>(i), static_cast<graphlearn::Index>(j));
  });
}

gl_status gl_matrix_load(const char* path, gl_matrix** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new_matrix(graphlearn::io::load_matrix(path));
  });
}

gl_status gl_matrix_save(const gl_matrix* m, const char* path) {
  return guarded([&] {
    require_arg(m, "matrix");
    require_arg(path, "path");
    graphlearn::io::save_matrix(m->value, path);
  });
}

void gl_matrix_free(gl_matrix* m) { delete m; }

gl_status gl_laplacian(const gl_matrix* adjacency, gl_matrix** out) {
  return guarded([&] {
    require_arg(adjacency, "adjacency");
    require_arg(out, "out");
    *out = new_matrix(graphlearn::laplacian(graphlearn::WeightedGraph::from_adjacency(adjacency->value)));
  });
}

gl_status gl_threshold(const gl_matrix* estimate, double tau, gl_matrix** out) {
  return guarded([&] {
    require_arg(estimate, "estimate");
    require_arg(out, "out");
    *out = new_matrix(graphlearn::threshold_sparsify(estimate->value, tau).adjacency());
  });
}

gl_status gl_dataset_synthesize(const char* synth_config_json, gl_dataset** out) {
  return guarded([&] {
    require_arg(out, "out");
    const auto cfg = graphlearn::synth_config_from_json(parse_config(synth_config_json));
    *out = new gl_dataset{graphlearn::build_dataset(cfg)};
  });
}

gl_status gl_dataset_load(const char* dir, gl_dataset** out) {
  return guarded([&] {
    require_arg(dir, "dir");
    require_arg(out, "out");
    *out = new gl_dataset{graphlearn::import_dataset(dir)};
  });
}

gl_status gl_dataset_save(const gl_dataset* ds, const char* dir) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(dir, "dir");
    graphlearn::export_dataset(ds->value, dir);
  });
}

size_t gl_dataset_size(const gl_dataset* ds, gl_split split) { return ds ? split_of(ds, split).size() : 0; }

gl_status gl_dataset_signals(const gl_dataset* ds, gl_split split, size_t index, gl_matrix** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = new_matrix(sample_at(ds, split, index).signals.values());
  });
}

gl_status gl_dataset_adjacency(const gl_dataset* ds, gl_split split, size_t index, gl_matrix** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = new_matrix(sample_at(ds, split, index).graph.adjacency());
  });
}

gl_status gl_dataset_summary(const gl_dataset* ds, char** json_out) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(json_out, "json_out");
    const auto& d = ds->value;
    const auto& any = d.train.empty() ? d.test : d.train;
    const json j = {{"config", graphlearn::synth_config_to_json(d.config)},
                    {"outlier_indices", d.outlier_indices},
                    {"n_train", d.train.size()},
                    {"n_test", d.test.size()},
                    {"n_nodes", any.n_nodes()},
                    {"n_signals", any.n_signals()}};
    *json_out = copy_string(j.dump(2));
  });
}

void gl_dataset_free(gl_dataset* ds) { delete ds; }

gl_status gl_train(const gl_dataset* ds, const char* hyper_json, gl_model** model_out, char** report_json) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(model_out, "model_out");
    graphlearn::require(!ds->value.train.empty(), ErrorCode::Degenerate, "dataset has no training graphs");
    const auto rule = graphlearn::hyper_rule_from_json(parse_config(hyper_json));
    const auto hyper = rule.resolve(ds->value.train);
    const auto outcome = graphlearn::train_model(ds->value.train, hyper);
    if (report_json) {
      const json j = {{"final_cost", outcome.final_cost},
                      {"gradient_norm", outcome.gradient_norm},
                      {"stationarity_tolerance", outcome.stationarity_tol},
                      {"min_curvature", outcome.min_curvature},
                      {"psd_warning", outcome.model.psd_warning},
                      {"k", outcome.model.k()},
                      {"n_graphs", ds->value.train.size()},
                      {"sigma", hyper.sigma},
                      {"alpha", hyper.alpha},
                      {"beta", hyper.beta},
                      {"h", hyper.h.coefficients()}};
      *report_json = copy_string(j.dump(2));
    }
    *model_out = new gl_model{outcome.model};
  });
}

gl_status gl_model_load(const char* path, gl_model** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new gl_model{graphlearn::load_model(path)};
  });
}

gl_status gl_model_save(const gl_model* model, const char* path) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(path, "path");
    graphlearn::save_model(model->value, path);
  });
}

gl_status gl_model_to_json(const gl_model* model, char** json_out) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(json_out, "json_out");
    *json_out = copy_string(graphlearn::model_to_json(model->value));
  });
}

size_t gl_model_k(const gl_model* model) { return model ? static_cast<size_t>(model->value.k()) : 0; }

gl_status gl_model_weights(const gl_model* model, double* out, size_t len) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(out, "out");
    const auto k = static_cast<size_t>(model->value.k());
    graphlearn::require(len >= k, ErrorCode::InvalidArgument, "output buffer is too small");
    for (size_t i = 0; i < k; ++i) out[i] = model->value.w(static_cast<graphlearn::Index>(i));
  });
}

void gl_model_free(gl_model* model) { delete model; }

namespace {

graphlearn::FeatureBlockMatrix prediction_features(const gl_model* model, const gl_matrix* signals, gl_matrix** out) {
  require_arg(model, "model");
  require_arg(signals, "signals");
  require_arg(out, "out");
  graphlearn::require(signals->value.cols() == model->value.k(), ErrorCode::DimensionMismatch,
                      "model has K = " + std::to_string(model->value.k()) + " but signals have " +
                          std::to_string(signals->value.cols()) + " columns");
  const graphlearn::SignalMatrix x(signals->value);
  return graphlearn::assemble_feature_matrix(x, model->value.sigma);
}

}  // namespace

gl_status gl_predict(const gl_model* model, const gl_matrix* signals, gl_matrix** out) {
  return guarded([&] {
    const auto phi_mat = prediction_features(model, signals, out);
    *out = new_matrix(graphlearn::predict_adjacency(phi_mat, model->value).adjacency());
  });
}

gl_status gl_predict_raw(const gl_model* model, const gl_matrix* signals, gl_matrix** out) {
  return guarded([&] {
    const auto phi_mat = prediction_features(model, signals, out);
    *out = new_matrix(graphlearn::raw_adjacency(phi_mat, model->value.w));
  });
}

gl_status gl_evaluate(const gl_model* model, const gl_dataset* ds, const char* options_json, char** report_json) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(ds, "dataset");
    require_arg(report_json, "report_json");
    const json options = parse_config(options_json);
    graphlearn::ThresholdRule rule;
    for (const auto& [key, value] : options.items()) {
      graphlearn::require(key == "threshold", ErrorCode::InvalidArgument, "unknown evaluation option '" + key + "'");
      if (!value.is_null()) rule.tau = value.get<double>();
    }
    graphlearn::require(rule.tau || !ds->value.train.empty(), ErrorCode::InvalidArgument,
                        "dataset has no training graphs to match edge counts against; pass a fixed threshold");
    const double reference = ds->value.train.empty() ? 0.0 : ds->value.train.mean_edge_count();
    const auto ev = graphlearn::evaluate_model(model->value, ds->value.test, rule, reference);
    json j = graphlearn::to_json(ev.report);
    j["nmse_thresholded"] = ev.nmse_thresholded;
    j["per_graph_f_score"] = ev.f_scores;
    j["threshold"] = rule.tau ? json(*rule.tau) : json("match-train-edge-count");
    *report_json = copy_string(j.dump(2));
  });
}

gl_status gl_experiment_run(const char* config_json, const char* output_dir, char** report_json) {
  return guarded([&] {
    const auto config = graphlearn::experiment_config_from_json(parse_config(config_json));
    const auto result = graphlearn::run_experiment(config);
    if (output_dir) graphlearn::write_experiment_outputs(result, output_dir);
    if (report_json) *report_json = copy_string(graphlearn::experiment_report_json(result).dump(2));
  });
}

}  // extern "C"

#include "graphlearn/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "graphlearn/error.hpp"
#include "graphlearn/matrix_io.hpp"

namespace graphlearn {

using nlohmann::json;

SignalMatrix::SignalMatrix(Matrix values) : values_(std::move(values)) {
  require(values_.rows() >= 1 && values_.cols() >= 1, ErrorCode::InvalidArgument,
          "signal matrix must be non-empty");
  require(values_.allFinite(), ErrorCode::InvalidArgument, "signal matrix has non-finite entries");
}

Matrix FeatureBlockMatrix::slice(Index k) const {
  Matrix out(n_nodes, n_nodes);
  for (Index j = 0; j < n_nodes; ++j) out.col(j) = values.col(j * feature_dim + k);
  return out;
}

Vector phi(const Eigen::Ref<const Vector>& xi, const Eigen::Ref<const Vector>& xj, double sigma,
           bool same_node) {
  require(sigma > 0.0, ErrorCode::InvalidArgument, fmt::format("sigma must be positive, got {}", sigma));
  require(xi.size() == xj.size(), ErrorCode::DimensionMismatch, "node rows differ in length");
  if (same_node) return Vector::Zero(xi.size());
  Vector out(xi.size());
  for (Index m = 0; m < xi.size(); ++m) {
    const double d = xi(m) - xj(m);
    out(m) = sigma / std::max(d * d, sigma);
  }
  return out;
}

FeatureBlockMatrix assemble_feature_matrix(const SignalMatrix& x, double sigma) {
  const Index n = x.n_nodes();
  const Index k = x.n_signals();
  require(n >= 2, ErrorCode::InvalidArgument, "feature matrix needs at least two nodes");
  require(sigma > 0.0, ErrorCode::InvalidArgument, fmt::format("sigma must be positive, got {}", sigma));
  FeatureBlockMatrix out{n, k, Matrix::Zero(n, n * k)};
  const Matrix rows = x.values().transpose();  // column i is x(i)
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const Vector f = phi(rows.col(i), rows.col(j), sigma, false);
      out.values.block(i, j * k, 1, k) = f.transpose();
      out.values.block(j, i * k, 1, k) = f.transpose();
    }
  }
  return out;
}

Matrix kron_replicate(const Vector& w, Index n) {
  const Index k = w.size();
  require(k >= 1 && n >= 1, ErrorCode::InvalidArgument, "kron_replicate needs K >= 1 and N >= 1");
  Matrix out = Matrix::Zero(n * k, n);
  for (Index j = 0; j < n; ++j) out.block(j * k, j, k, 1) = w;
  return out;
}

namespace {

void check_dims(const FeatureBlockMatrix& phi_mat, Index k) {
  require(phi_mat.feature_dim == k, ErrorCode::DimensionMismatch,
          fmt::format("model has K = {} coefficients but features have dimension {}", k,
                      phi_mat.feature_dim));
}

}  // namespace

Matrix raw_adjacency(const FeatureBlockMatrix& phi_mat, const Vector& w) {
  check_dims(phi_mat, w.size());
  // Same as Phi (I_N (x) w), but each pair is computed once so the result is
  // exactly symmetric; the diagonal blocks of Phi are zero.
  const Index n = phi_mat.n_nodes;
  const Index k = w.size();
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) a(i, j) = a(j, i) = phi_mat.values.row(i).segment(j * k, k).dot(w);
  return a;
}

WeightedGraph predict_adjacency(const FeatureBlockMatrix& phi_mat, const RegressionModel& model) {
  Matrix a = raw_adjacency(phi_mat, model.w).cwiseMax(0.0);
  a.diagonal().setZero();
  return WeightedGraph::from_adjacency(std::move(a));
}

Matrix estimate_laplacian(const FeatureBlockMatrix& phi_mat, const Vector& w) {
  return laplacian_of(raw_adjacency(phi_mat, w));
}

Matrix estimate_laplacian(const FeatureBlockMatrix& phi_mat, const RegressionModel& model) {
  return estimate_laplacian(phi_mat, model.w);
}

double default_sigma(std::span<const SignalMatrix> signals, double scale) {
  std::vector<double> diffs;
  for (const SignalMatrix& x : signals) {
    const Matrix& v = x.values();
    for (Index i = 0; i < v.rows(); ++i)
      for (Index j = i + 1; j < v.rows(); ++j)
        for (Index m = 0; m < v.cols(); ++m) {
          const double d = v(i, m) - v(j, m);
          diffs.push_back(d * d);
        }
  }
  if (diffs.empty()) return 1e-8;
  const auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  double median = *mid;
  if (diffs.size() % 2 == 0) {
    const double lower = *std::max_element(diffs.begin(), mid);
    median = 0.5 * (median + lower);
  }
  return std::max(scale * median, 1e-8);
}

std::string model_to_json(const RegressionModel& model) {
  const json j = {
      {"format_version", 1},
      {"k", model.k()},
      {"w", std::vector<double>(model.w.data(), model.w.data() + model.w.size())},
      {"sigma", model.sigma},
      {"alpha", model.alpha},
      {"beta", model.beta},
      {"h", model.h.coefficients()},
      {"psd_warning", model.psd_warning},
  };
  return j.dump(2) + "\n";
}

RegressionModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    require(version == 1, ErrorCode::Parse, fmt::format("unsupported model format_version {}", version));
    const auto w = j.at("w").get<std::vector<double>>();
    const auto k = j.at("k").get<Index>();
    require(k >= 1 && static_cast<Index>(w.size()) == k, ErrorCode::Parse,
            fmt::format("model declares k = {} but has {} coefficients", k, w.size()));
    const auto h = j.at("h").get<std::vector<double>>();
    RegressionModel model;
    model.w = Eigen::Map<const Vector>(w.data(), k);
    model.sigma = j.at("sigma").get<double>();
    model.alpha = j.at("alpha").get<double>();
    model.beta = j.at("beta").get<double>();
    model.h = SpectralPolynomial::from_coefficients(h);
    model.psd_warning = j.value("psd_warning", false);
    require(model.sigma > 0.0, ErrorCode::Parse, "model sigma must be positive");
    require(model.alpha >= 0.0 && model.beta >= 0.0, ErrorCode::Parse, "model alpha/beta must be nonnegative");
    require(model.w.allFinite(), ErrorCode::Parse, "model weights must be finite");
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("malformed model JSON: {}", e.what()));
  }
}

void save_model(const RegressionModel& model, const std::filesystem::path& path) {
  io::write_text(path, model_to_json(model));
}

RegressionModel load_model(const std::filesystem::path& path) { return model_from_json(io::read_text(path)); }

}  // namespace graphlearn

#include "graphlearn/regression_solver.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "graphlearn/error.hpp"
#include "graphlearn/logging.hpp"

namespace graphlearn {

TrainingSet::TrainingSet(std::vector<TrainingSample> samples) : samples_(std::move(samples)) {
  require(!samples_.empty(), ErrorCode::Degenerate, "training set has no graphs");
  n_nodes_ = samples_.front().graph.n_nodes();
  n_signals_ = samples_.front().signals.n_signals();
  require(n_nodes_ >= 2, ErrorCode::Degenerate, "training graphs need at least two nodes");
  for (std::size_t g = 0; g < samples_.size(); ++g) {
    const TrainingSample& s = samples_[g];
    require(s.graph.n_nodes() == n_nodes_, ErrorCode::DimensionMismatch,
            fmt::format("training graph {} has {} nodes, expected {} (all training graphs must share N)", g,
                        s.graph.n_nodes(), n_nodes_));
    require(s.signals.n_nodes() == n_nodes_, ErrorCode::DimensionMismatch,
            fmt::format("signals of graph {} have {} rows, expected {}", g, s.signals.n_nodes(), n_nodes_));
    require(s.signals.n_signals() == n_signals_, ErrorCode::DimensionMismatch,
            fmt::format("graph {} has {} signals, expected {}", g, s.signals.n_signals(), n_signals_));
  }
}

std::vector<SignalMatrix> TrainingSet::signal_matrices() const {
  std::vector<SignalMatrix> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.signals);
  return out;
}

double TrainingSet::mean_edge_count(double eps) const {
  if (samples_.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples_) total += static_cast<double>(s.graph.edge_count(eps));
  return total / static_cast<double>(samples_.size());
}

void Hyperparameters::validate() const {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::InvalidArgument,
          fmt::format("sigma must be positive, got {}", sigma));
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::InvalidArgument,
          fmt::format("alpha must be nonnegative, got {}", alpha));
  require(std::isfinite(beta) && beta >= 0.0, ErrorCode::InvalidArgument,
          fmt::format("beta must be nonnegative, got {}", beta));
}

std::vector<Index> omega_set(Index j, Index n_nodes, Index feature_dim) {
  std::vector<Index> out(static_cast<std::size_t>(feature_dim));
  for (Index t = 0; t < feature_dim; ++t) out[static_cast<std::size_t>(t)] = j * (n_nodes + 1) * feature_dim + t;
  return out;
}

namespace {

struct GraphTerms {
  FeatureBlockMatrix phi;
  Matrix gram;  // X X^T
  const Matrix* adjacency;
};

std::vector<GraphTerms> prepare(const TrainingSet& ts, const Hyperparameters& hyper) {
  hyper.validate();
  require(!ts.empty(), ErrorCode::Degenerate, "training set has no graphs");
  std::vector<GraphTerms> out;
  out.reserve(ts.size());
  for (const auto& s : ts.samples()) {
    out.push_back({assemble_feature_matrix(s.signals, hyper.sigma), s.signals.values() * s.signals.values().transpose(),
                   &s.graph.adjacency()});
  }
  return out;
}

// Runs fn(g) for every graph, on up to `threads` workers.
template <typename Fn>
void for_each_graph(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t g = 0; g < count; ++g) fn(g);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t g = t; g < count; g += workers) fn(g);
    });
  }
  for (auto& th : pool) th.join();
}

// Linear part of the W-gradient of one graph's cost terms, applied to the
// probe matrix E_k = I_N (x) e_k. Returns an (N K) x N matrix.
//
//   data:  2 Phi^T (Phi E_k)
//   h2:    alpha h2 Phi^T (t 1^T - T^T),  T = L_k S + S L_k,  t = diag(T)
//
// where L_k = diag(P_k 1) - P_k is the Laplacian of P_k = Phi E_k and
// S = X X^T. The h1 term is constant in W and lives in g.
Matrix probe_response(const GraphTerms& terms, Index k, const Hyperparameters& hyper) {
  const Matrix p = terms.phi.slice(k);
  Matrix r = 2.0 * p;
  const double curvature = hyper.alpha * hyper.h.h2;
  if (curvature != 0.0) {
    const Matrix lk = laplacian_of(p);
    const Matrix t = lk * terms.gram + terms.gram * lk;
    Matrix term = -t.transpose();
    term.colwise() += t.diagonal();
    r += curvature * term;
  }
  return terms.phi.values.transpose() * r;
}

// Constant part of one graph's W-gradient, negated:
//   2 Phi^T A - alpha h1 Phi^T (s 1^T - S),  s = diag(S).
Matrix g_contribution(const GraphTerms& terms, const Hyperparameters& hyper) {
  Matrix r = 2.0 * (*terms.adjacency);
  const double linear = hyper.alpha * hyper.h.h1;
  if (linear != 0.0) {
    Matrix term = -terms.gram;
    term.colwise() += terms.gram.diagonal();
    r -= linear * term;
  }
  return terms.phi.values.transpose() * r;
}

// Sums the Omega_j entries of a vectorised (N K) x N matrix: entry t is
// sum_j m(j K + t, j).
Vector reduce_over_omega(const Matrix& m, Index n, Index k) {
  Vector out = Vector::Zero(k);
  for (Index j = 0; j < n; ++j) out += m.block(j * k, j, k, 1);
  return out;
}

Matrix probe_matrix(Index n, Index k, Index index) {
  Vector e = Vector::Zero(k);
  e(index) = 1.0;
  return kron_replicate(e, n);
}

}  // namespace

double cost(const Vector& w, const TrainingSet& ts, const Hyperparameters& hyper) {
  hyper.validate();
  require(!ts.empty(), ErrorCode::Degenerate, "training set has no graphs");
  require(w.size() == ts.n_signals(), ErrorCode::DimensionMismatch,
          fmt::format("w has {} entries, training signals have M = {}", w.size(), ts.n_signals()));
  const Matrix weights = kron_replicate(w, ts.n_nodes());
  double total = hyper.beta * weights.squaredNorm();
  for (const auto& s : ts.samples()) {
    const FeatureBlockMatrix phi_mat = assemble_feature_matrix(s.signals, hyper.sigma);
    const Matrix a_hat = phi_mat.values * weights;
    total += (s.graph.adjacency() - a_hat).squaredNorm();
    if (hyper.alpha != 0.0) {
      const Matrix& x = s.signals.values();
      const Matrix h_of_l = apply_spectral_polynomial(laplacian_of(a_hat), hyper.h);
      total += hyper.alpha * (x.transpose() * h_of_l * x).trace();
    }
  }
  return total;
}

Vector assemble_g(const TrainingSet& ts, const Hyperparameters& hyper) {
  const auto terms = prepare(ts, hyper);
  const Index n = ts.n_nodes();
  const Index k = ts.n_signals();
  Matrix sum = Matrix::Zero(n * k, n);
  for (const auto& t : terms) sum += g_contribution(t, hyper);
  return Eigen::Map<const Vector>(sum.data(), sum.size());
}

Matrix projected_operator(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options) {
  const auto terms = prepare(ts, hyper);
  const Index n = ts.n_nodes();
  const Index k = ts.n_signals();
  std::vector<Matrix> per_graph(terms.size(), Matrix::Zero(k, n * n * k));
  for_each_graph(terms.size(), options.threads, [&](std::size_t g) {
    for (Index row = 0; row < k; ++row) {
      const Matrix response = probe_response(terms[g], row, hyper);
      per_graph[g].row(row) = Eigen::Map<const Vector>(response.data(), response.size()).transpose();
    }
  });
  Matrix out = Matrix::Zero(k, n * n * k);
  for (const auto& part : per_graph) out += part;
  // The Hessian of J in W is symmetric, so row k of rho_bar^T F equals
  // (F rho_k)^T, the vectorised response to the probe E_k.
  for (Index row = 0; row < k; ++row) {
    const Matrix ridge = 2.0 * hyper.beta * probe_matrix(n, k, row);
    out.row(row) += Eigen::Map<const Vector>(ridge.data(), ridge.size()).transpose();
  }
  return out;
}

NormalSystem assemble_reduced_system(const TrainingSet& ts, const Hyperparameters& hyper,
                                     const SolverOptions& options) {
  const auto terms = prepare(ts, hyper);
  const Index n = ts.n_nodes();
  const Index k = ts.n_signals();

  struct Part {
    Matrix f_bar;
    Vector rhs;
  };
  std::vector<Part> parts(terms.size());
  for_each_graph(terms.size(), options.threads, [&](std::size_t g) {
    Part& part = parts[g];
    part.f_bar.resize(k, k);
    for (Index row = 0; row < k; ++row) {
      // One row of this graph's rho_bar^T F, reduced over Omega_1..Omega_N.
      part.f_bar.row(row) = reduce_over_omega(probe_response(terms[g], row, hyper), n, k).transpose();
    }
    part.rhs = reduce_over_omega(g_contribution(terms[g], hyper), n, k);
  });

  NormalSystem sys;
  sys.f_bar = Matrix::Zero(k, k);
  sys.rhs = Vector::Zero(k);
  for (const auto& part : parts) {
    sys.f_bar += part.f_bar;
    sys.rhs += part.rhs;
  }
  // Ridge: 2 beta E_k contributes 2 beta on each of the N copies of w.
  sys.f_bar.diagonal().array() += 2.0 * hyper.beta * static_cast<double>(n);
  sys.selection.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) sys.selection.push_back(omega_set(j, n, k));
  return sys;
}

Vector pseudo_inverse_solve(const Matrix& a, const Vector& rhs) {
  require(a.rows() == a.cols() && a.rows() == rhs.size(), ErrorCode::DimensionMismatch,
          "pseudo-inverse solve: system dimensions disagree");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(rhs);
}

double stationarity_tolerance(const NormalSystem& system) { return 1e-6 * (1.0 + system.rhs.norm()); }

namespace {

// Compares the system residual F_bar w - rhs with a central difference of
// the cost along a fixed direction. The cost is exactly quadratic, so the
// difference is exact up to round-off. Returns the relative mismatch.
double sign_convention_check(const NormalSystem& sys, const TrainingSet& ts, const Hyperparameters& hyper) {
  const Index k = sys.rhs.size();
  Vector d(k);
  for (Index i = 0; i < k; ++i) d(i) = (i % 2 == 0 ? 1.0 : -0.5) / static_cast<double>(i + 1);
  d.normalize();
  const double step = 1.0;
  const double forward = cost(d + step * d, ts, hyper);
  const double backward = cost(d - step * d, ts, hyper);
  const double numeric = (forward - backward) / (2.0 * step);
  const double analytic = d.dot(sys.f_bar * d - sys.rhs);
  const double scale = 1.0 + std::abs(forward) + std::abs(backward) + std::abs(analytic);
  return std::abs(numeric - analytic) / scale;
}

}  // namespace

RegressionModel solve(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options,
                      SolveDiagnostics& diagnostics) {
  require(!ts.empty(), ErrorCode::Degenerate, "training set has no graphs");
  require(ts.n_nodes() >= 2, ErrorCode::Degenerate, "training graphs need at least two nodes");
  diagnostics.system = assemble_reduced_system(ts, hyper, options);
  const NormalSystem& sys = diagnostics.system;

  diagnostics.self_check_error = sign_convention_check(sys, ts, hyper);
  require(diagnostics.self_check_error < 1e-8, ErrorCode::Numeric,
          fmt::format("normal system disagrees with the cost gradient (relative error {:.3g})",
                      diagnostics.self_check_error));

  const Matrix q = 0.25 * (sys.f_bar + sys.f_bar.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  diagnostics.min_curvature = eig.eigenvalues().minCoeff();
  diagnostics.curvature_scale = eig.eigenvalues().cwiseAbs().maxCoeff();

  RegressionModel model;
  model.w = pseudo_inverse_solve(sys.f_bar, sys.rhs);
  model.sigma = hyper.sigma;
  model.h = hyper.h;
  model.alpha = hyper.alpha;
  model.beta = hyper.beta;
  model.psd_warning = diagnostics.min_curvature < -1e-8 * diagnostics.curvature_scale;
  if (model.psd_warning) {
    log::warn(fmt::format("training cost is not convex for these hyperparameters (min curvature {:.3g}); "
                          "the returned weights are a stationary point",
                          diagnostics.min_curvature));
  }
  return model;
}

RegressionModel solve(const TrainingSet& ts, const Hyperparameters& hyper, const SolverOptions& options) {
  SolveDiagnostics diagnostics;
  return solve(ts, hyper, options, diagnostics);
}

QuadraticForm quadratic_probe(const TrainingSet& ts, const Hyperparameters& hyper) {
  const Index k = ts.n_signals();
  QuadraticForm out{Matrix::Zero(k, k), Vector::Zero(k), 0.0};
  out.c = cost(Vector::Zero(k), ts, hyper);
  std::vector<double> single(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    Vector e = Vector::Zero(k);
    e(i) = 1.0;
    const double at_one = cost(e, ts, hyper);
    const double at_two = cost(2.0 * e, ts, hyper);
    out.q(i, i) = 0.5 * (at_two - 2.0 * at_one + out.c);
    out.b(i) = 0.5 * (out.c - at_one + out.q(i, i));
    single[static_cast<std::size_t>(i)] = at_one;
  }
  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      Vector e = Vector::Zero(k);
      e(i) = 1.0;
      e(j) = 1.0;
      const double pair = cost(e, ts, hyper);
      const double qij = 0.5 * (pair - out.c + 2.0 * out.b(i) + 2.0 * out.b(j) - out.q(i, i) - out.q(j, j));
      out.q(i, j) = qij;
      out.q(j, i) = qij;
    }
  }
  return out;
}

Vector finite_difference_gradient(const Vector& w, const TrainingSet& ts, const Hyperparameters& hyper,
                                  double step) {
  require(step > 0.0, ErrorCode::InvalidArgument, "finite-difference step must be positive");
  Vector grad(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    Vector plus = w;
    Vector minus = w;
    plus(i) += step;
    minus(i) -= step;
    grad(i) = (cost(plus, ts, hyper) - cost(minus, ts, hyper)) / (2.0 * step);
  }
  return grad;
}

}  // namespace graphlearn

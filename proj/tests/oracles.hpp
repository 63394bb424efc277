#pragma once

// Reference implementations used by the tests. They are written from the
// model definition with plain loops and share no code with the library.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "graphlearn/regression_solver.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double feature(double a, double b, double sigma) {
  const double d = (a - b) * (a - b);
  return sigma / std::max(d, sigma);
}

// a_hat(i, j) = sum_k w_k phi_k(x(i), x(j)), zero on the diagonal.
inline MatrixXd estimate(const MatrixXd& x, const VectorXd& w, double sigma) {
  const auto n = x.rows();
  MatrixXd a = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) s += w(k) * feature(x(i, k), x(j, k), sigma);
      a(i, j) = s;
    }
  return a;
}

inline MatrixXd laplacian(const MatrixXd& a) {
  MatrixXd l = -a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) l(i, i) += a.row(i).sum();
  return l;
}

struct Instance {
  std::vector<MatrixXd> signals;
  std::vector<MatrixXd> adjacency;
  double sigma = 1.0;
  double h0 = 0.0, h1 = 0.0, h2 = 0.0;
  double alpha = 0.0, beta = 0.0;
};

inline double cost(const Instance& in, const VectorXd& w) {
  double total = 0.0;
  for (std::size_t g = 0; g < in.signals.size(); ++g) {
    const MatrixXd& x = in.signals[g];
    const MatrixXd a_hat = estimate(x, w, in.sigma);
    const MatrixXd l = laplacian(a_hat);
    const auto n = x.rows();
    const MatrixXd h = in.h0 * MatrixXd::Identity(n, n) + in.h1 * l + in.h2 * l * l;
    total += (in.adjacency[g] - a_hat).squaredNorm();
    total += in.alpha * (x.transpose() * h * x).trace();
  }
  const auto n = in.signals.front().rows();
  return total + in.beta * static_cast<double>(n) * w.squaredNorm();
}

struct Quadratic {
  MatrixXd q;  // cost(w) = c - 2 b^T w + w^T q w
  VectorXd b;
  double c = 0.0;
};

// Symmetric probes at +-e_k and e_k + e_l.
inline Quadratic fit_quadratic(const Instance& in, Eigen::Index k_dim) {
  Quadratic out;
  const VectorXd zero = VectorXd::Zero(k_dim);
  out.c = cost(in, zero);
  out.q = MatrixXd::Zero(k_dim, k_dim);
  out.b = VectorXd::Zero(k_dim);
  std::vector<double> plus(static_cast<std::size_t>(k_dim));
  for (Eigen::Index k = 0; k < k_dim; ++k) {
    VectorXd e = zero;
    e(k) = 1.0;
    const double jp = cost(in, e);
    const double jm = cost(in, -e);
    plus[static_cast<std::size_t>(k)] = jp;
    out.q(k, k) = 0.5 * (jp + jm) - out.c;
    out.b(k) = 0.25 * (jm - jp);
  }
  for (Eigen::Index k = 0; k < k_dim; ++k)
    for (Eigen::Index l = k + 1; l < k_dim; ++l) {
      VectorXd e = zero;
      e(k) = 1.0;
      e(l) = 1.0;
      const double v = 0.5 * (cost(in, e) - plus[static_cast<std::size_t>(k)] - plus[static_cast<std::size_t>(l)] + out.c);
      out.q(k, l) = v;
      out.q(l, k) = v;
    }
  return out;
}

// Minimum-norm solution of q w = b.
inline VectorXd minimizer(const Quadratic& quad) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(quad.q);
  cod.setThreshold(1e-10);
  return cod.solve(quad.b);
}

inline double relative_error(const VectorXd& got, const VectorXd& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

// Seeded generator for random instances.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

  MatrixXd signals(int n, int k) {
    MatrixXd x(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) x(i, j) = normal();
    return x;
  }

  // Symmetric, nonnegative, zero diagonal; each pair present with probability p.
  MatrixXd adjacency(int n, double p) {
    MatrixXd a = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (uniform(0.0, 1.0) < p) a(i, j) = a(j, i) = uniform(0.0, 1.0);
    return a;
  }

 private:
  std::mt19937_64 engine_;
};

inline graphlearn::TrainingSet training_set(const Instance& in) {
  std::vector<graphlearn::TrainingSample> samples;
  for (std::size_t g = 0; g < in.signals.size(); ++g)
    samples.push_back({graphlearn::SignalMatrix(in.signals[g]), graphlearn::WeightedGraph::from_adjacency(in.adjacency[g])});
  return graphlearn::TrainingSet(std::move(samples));
}

inline graphlearn::Hyperparameters hyper(const Instance& in) {
  graphlearn::Hyperparameters h;
  h.sigma = in.sigma;
  h.h = {in.h0, in.h1, in.h2};
  h.alpha = in.alpha;
  h.beta = in.beta;
  return h;
}

// One random instance drawn from the ranges the solver is checked on.
inline Instance random_instance(Gen& gen, int& k_out) {
  Instance in;
  const int n = gen.integer(3, 6);
  const int k = gen.integer(1, 4);
  const int g = gen.integer(1, 3);
  for (int i = 0; i < g; ++i) {
    in.signals.push_back(gen.signals(n, k));
    in.adjacency.push_back(gen.adjacency(n, 0.5));
  }
  in.sigma = gen.uniform(0.2, 2.0);
  in.h0 = gen.uniform(-1.0, 1.0);
  in.h1 = gen.uniform(0.0, 1.0);
  in.h2 = gen.pick(std::vector<double>{0.0, 0.5, 1.0});
  in.alpha = gen.pick(std::vector<double>{0.0, 0.1});
  in.beta = gen.pick(std::vector<double>{0.0, 1.0});
  k_out = k;
  return in;
}

}  // namespace oracle

#include <doctest.h>

#include <numeric>

#include "graphlearn/error.hpp"
#include "graphlearn/metrics.hpp"
#include "oracles.hpp"

using namespace graphlearn;

namespace {

// Graph on n nodes with unit weight on the listed pairs.
WeightedGraph edges(Index n, std::initializer_list<std::pair<Index, Index>> pairs) {
  Matrix a = Matrix::Zero(n, n);
  for (auto [i, j] : pairs) a(i, j) = a(j, i) = 1.0;
  return WeightedGraph::from_adjacency(a);
}

}  // namespace

TEST_CASE("nmse examples") {
  oracle::Gen gen(51);
  std::vector<WeightedGraph> truth;
  std::vector<Matrix> same, zero, doubled;
  for (int g = 0; g < 3; ++g) {
    truth.push_back(WeightedGraph::from_adjacency(gen.adjacency(5, 0.5)));
    same.push_back(truth.back().adjacency());
    zero.push_back(Matrix::Zero(5, 5));
    doubled.push_back(2.0 * truth.back().adjacency());
  }
  CHECK(nmse(truth, same) == 0.0);
  CHECK(nmse(truth, zero) == doctest::Approx(1.0));
  CHECK(nmse(truth, doubled) == doctest::Approx(1.0));

  CHECK_THROWS_AS(nmse(std::vector<WeightedGraph>{}, std::vector<Matrix>{}), Error);
  CHECK_THROWS_AS(nmse(truth, std::span<const Matrix>(zero).first(2)), Error);
  std::vector<Matrix> wrong = zero;
  wrong[1] = Matrix::Zero(4, 4);
  CHECK_THROWS_AS(nmse(truth, wrong), Error);
}

TEST_CASE("nmse is invariant under node relabeling") {
  oracle::Gen gen(52);
  std::vector<WeightedGraph> truth, truth_p;
  std::vector<Matrix> est, est_p;
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[0], perm[4]);
  std::swap(perm[1], perm[5]);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(6);
  for (int i = 0; i < 6; ++i) p.indices()(i) = perm[static_cast<std::size_t>(i)];
  for (int g = 0; g < 4; ++g) {
    const Matrix a = gen.adjacency(6, 0.5);
    const Matrix e = gen.adjacency(6, 0.7);
    truth.push_back(WeightedGraph::from_adjacency(a));
    est.push_back(e);
    truth_p.push_back(WeightedGraph::from_adjacency(p * a * p.transpose()));
    est_p.push_back(p * e * p.transpose());
  }
  CHECK(nmse(truth, est) == doctest::Approx(nmse(truth_p, est_p)).epsilon(1e-14));
}

TEST_CASE("threshold examples") {
  const Matrix a{{0, 0.2, -0.4, 0.9}, {0.2, 0, 0.5, 0.1}, {-0.4, 0.5, 0, 0.45}, {0.9, 0.1, 0.45, 0}};
  const WeightedGraph clamp = threshold_sparsify(a, 0.0);
  CHECK(clamp.adjacency().isApprox(a.cwiseMax(0.0)));

  CHECK(threshold_sparsify(a, 1.0).adjacency().isZero(0.0));

  const WeightedGraph half = threshold_sparsify(a, 0.45);
  CHECK(half.edge_count() == 3);
  CHECK(half.adjacency()(0, 3) == 0.9);
  CHECK(half.adjacency()(1, 2) == 0.5);
  CHECK(half.adjacency()(2, 3) == 0.45);
  CHECK(half.adjacency()(0, 1) == 0.0);

  CHECK(threshold_sparsify(half.adjacency(), 0.45).adjacency() == half.adjacency());
  CHECK_THROWS_AS(threshold_sparsify(a, -0.1), Error);

  // a self loop in the estimate never survives
  Matrix loop = a;
  loop(1, 1) = 3.0;
  CHECK(threshold_sparsify(loop, 0.0).adjacency()(1, 1) == 0.0);
}

TEST_CASE("threshold keeps round-off pairs together") {
  Matrix a{{0, 0.3, 0.1}, {0.3, 0, 0.2}, {0.1, 0.2, 0}};
  a(1, 0) = std::nextafter(0.3, 0.0);
  const double tau = count_matching_threshold(a, 1);
  const WeightedGraph g = threshold_sparsify(a, tau);
  CHECK(g.edge_count() == 1);
  CHECK(g.adjacency()(0, 1) > 0.0);
}

TEST_CASE("count matching threshold") {
  const Matrix a{{0, 0.2, -0.4, 0.9}, {0.2, 0, 0.5, 0.1}, {-0.4, 0.5, 0, 0.45}, {0.9, 0.1, 0.45, 0}};
  CHECK(count_matching_threshold(a, 1) == 0.9);
  CHECK(count_matching_threshold(a, 3) == 0.45);
  CHECK(threshold_sparsify(a, count_matching_threshold(a, 2)).edge_count() == 2);
  CHECK(std::isinf(count_matching_threshold(a, 0)));
  CHECK(threshold_sparsify(a, count_matching_threshold(a, 0)).edge_count() == 0);
  CHECK(count_matching_threshold(a, 100) == 0.0);
}

TEST_CASE("f score examples") {
  const WeightedGraph truth = edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(f_score(truth, truth) == 1.0);
  CHECK(f_score(truth, WeightedGraph::empty(5)) == 0.0);
  CHECK(f_score(WeightedGraph::empty(5), WeightedGraph::empty(5)) == 1.0);
  CHECK(f_score(WeightedGraph::empty(5), truth) == 0.0);

  const WeightedGraph half = edges(5, {{0, 1}, {1, 2}, {0, 4}, {1, 3}});
  const EdgeCounts c = edge_counts(truth, half, kEdgeEpsilon);
  CHECK(c.true_positive == 2);
  CHECK(c.false_positive == 2);
  CHECK(c.false_negative == 2);
  CHECK(f_score(truth, half) == doctest::Approx(0.5));

  // P = 1, R = 0.5
  CHECK(f_score(truth, edges(5, {{0, 1}, {3, 4}})) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(f_score(truth, WeightedGraph::empty(4)), Error);

  // weights below the cutoff are not edges
  Matrix faint = truth.adjacency() * 1e-13;
  CHECK(f_score(truth, WeightedGraph::from_adjacency(faint)) == 0.0);
  CHECK(f_score(truth, WeightedGraph::from_adjacency(faint), 1e-14) == 1.0);
}

TEST_CASE("f score range on random graphs") {
  oracle::Gen gen(53);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(2, 8);
    const WeightedGraph a = WeightedGraph::from_adjacency(gen.adjacency(n, gen.uniform(0, 1)));
    const WeightedGraph b = WeightedGraph::from_adjacency(gen.adjacency(n, gen.uniform(0, 1)));
    const double f = f_score(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(f == f_score(b, a));
    if (a.edge_count() > 0) CHECK(f_score(a, a) == 1.0);
  }
}

TEST_CASE("eval report") {
  EvalReport r;
  r.nmse = 0.5;
  r.f_score = 0.7;
  r.n_graphs = 16;
  r.n_runs = 3;
  r.per_m[10] = {0.6, 0.71};
  CHECK_NOTHROW(r.validate());
  const auto j = to_json(r);
  CHECK(j.at("nmse").get<double>() == 0.5);
  CHECK(j.at("per_m").at("10").at("f_score").get<double>() == 0.71);
  r.f_score = 1.5;
  CHECK_THROWS_AS(r.validate(), Error);
  r.f_score = 0.5;
  r.nmse = -1.0;
  CHECK_THROWS_AS(r.validate(), Error);
}

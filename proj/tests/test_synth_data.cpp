#include <doctest.h>

#include <filesystem>
#include <set>

#include <json.hpp>

#include "graphlearn/error.hpp"
#include "graphlearn/synth_data.hpp"
#include "oracles.hpp"

using namespace graphlearn;

namespace {

bool valid_adjacency(const Matrix& a) {
  return (a - a.transpose()).norm() == 0.0 && a.diagonal().isZero(0.0) && a.minCoeff() >= 0.0;
}

WeightedGraph fixed_five_node() {
  Matrix a = Matrix::Zero(5, 5);
  const double w[][3] = {{0, 1, 0.9}, {1, 2, 0.4}, {2, 3, 0.7}, {3, 4, 0.5}, {0, 4, 0.3}, {1, 3, 0.8}};
  for (const auto& e : w) {
    a(static_cast<Index>(e[0]), static_cast<Index>(e[1])) = e[2];
    a(static_cast<Index>(e[1]), static_cast<Index>(e[0])) = e[2];
  }
  return WeightedGraph::from_adjacency(a);
}

}  // namespace

TEST_CASE("rng streams are reproducible and independent") {
  Rng a = Rng::stream(5, "graph", {3});
  Rng b = Rng::stream(5, "graph", {3});
  Rng c = Rng::stream(5, "graph", {4});
  Rng d = Rng::stream(5, "signals", {3});
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());

  Rng r(9);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK_UNARY(u > 0.0 && u < 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  for (int i = 0; i < 1000; ++i) CHECK(r.uniform_index(7) < 7);
}

TEST_CASE("base graph examples") {
  Rng rng(1);
  const WeightedGraph full = gen_base_graph(6, 1.0, rng);
  CHECK(full.edge_count() == 15);
  CHECK(full.adjacency().maxCoeff() < 1.0);

  const WeightedGraph pair = gen_base_graph(2, 1.0, rng);
  CHECK(pair.edge_count() == 1);
  CHECK(pair.adjacency()(0, 1) > 0.0);
  CHECK(pair.adjacency()(0, 1) < 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    const WeightedGraph g = gen_base_graph(10, 0.4, rng);
    CHECK(g.edge_count() == 18);
    CHECK(is_connected(g));
    CHECK(valid_adjacency(g.adjacency()));
  }
  CHECK_THROWS_AS(gen_base_graph(10, 0.1, rng), Error);
  CHECK_THROWS_AS(gen_base_graph(10, 0.0, rng), Error);
}

TEST_CASE("perturbation") {
  Rng rng(2);
  const WeightedGraph base = gen_base_graph(10, 0.4, rng);
  const WeightedGraph same = perturb_graph(base, 0.0, rng);
  CHECK(same.adjacency().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.adjacency().isApprox(base.adjacency() / base.adjacency().norm()));

  const WeightedGraph redrawn = perturb_graph(base, 1.0, rng);
  CHECK(redrawn.edge_count() == 45);
  CHECK(redrawn.adjacency().norm() == doctest::Approx(1.0).epsilon(1e-12));

  for (int trial = 0; trial < 20; ++trial) {
    const WeightedGraph p = perturb_graph(base, 0.1, rng);
    CHECK(valid_adjacency(p.adjacency()));
    CHECK(std::abs(p.adjacency().norm() - 1.0) < 1e-12);
    // untouched pairs keep their ratio to the base; at most round(0.1 * 45) = 5 change
    std::vector<double> ratios;
    for (Index j = 1; j < 10; ++j)
      for (Index i = 0; i < j; ++i)
        if (base.adjacency()(i, j) > 0.0) ratios.push_back(p.adjacency()(i, j) / base.adjacency()(i, j));
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    const double r = ratios[ratios.size() / 2];
    Index changed = 0;
    for (Index j = 1; j < 10; ++j)
      for (Index i = 0; i < j; ++i)
        if (std::abs(p.adjacency()(i, j) - r * base.adjacency()(i, j)) > 1e-12) ++changed;
    CHECK(changed <= 5);
  }
}

TEST_CASE("erdos renyi family") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const WeightedGraph g = gen_erdos_renyi(8, 0.3, rng);
    CHECK(valid_adjacency(g.adjacency()));
    CHECK(g.edge_count() >= 1);
    CHECK(g.adjacency().norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(gen_erdos_renyi(6, 1.0, rng).edge_count() == 15);
}

TEST_CASE("smooth signal covariance is the laplacian pseudo-inverse") {
  const WeightedGraph g = fixed_five_node();
  Rng rng(4);
  const SignalMatrix x = sample_signals(g, 100000, SignalProfile::Smooth, rng);
  const Matrix cov = x.values() * x.values().transpose() / static_cast<double>(x.n_signals());
  const Matrix target = laplacian_pseudoinverse(laplacian(g));
  CHECK((cov - target).norm() / target.norm() < 0.05);

  const SignalMatrix y = sample_signals(g, 100000, SignalProfile::HighFrequency, rng);
  const Matrix cov_h = y.values() * y.values().transpose() / static_cast<double>(y.n_signals());
  const Matrix l = laplacian(g);
  CHECK((cov_h - l * l).norm() / (l * l).norm() < 0.05);
}

TEST_CASE("smooth signals have no constant component") {
  const WeightedGraph g = fixed_five_node();
  Rng rng(5);
  const SignalMatrix x = sample_signals(g, 50, SignalProfile::Smooth, rng);
  const Vector ones = Vector::Ones(5) / std::sqrt(5.0);
  for (Index m = 0; m < 50; ++m) CHECK(std::abs(ones.dot(x.values().col(m))) < 1e-12);
}

TEST_CASE("smooth signals are smoother than high-frequency ones") {
  const WeightedGraph g = fixed_five_node();
  const Matrix l = laplacian(g);
  Rng rng(6);
  const SignalMatrix s = sample_signals(g, 1000, SignalProfile::Smooth, rng);
  const SignalMatrix h = sample_signals(g, 1000, SignalProfile::HighFrequency, rng);
  double ms = 0.0, mh = 0.0;
  for (Index m = 0; m < 1000; ++m) {
    ms += smoothness(s.values().col(m), l);
    mh += smoothness(h.values().col(m), l);
  }
  CHECK(ms < mh);
}

TEST_CASE("mixed signals") {
  const WeightedGraph g = fixed_five_node();
  const Matrix l = laplacian(g);
  Rng rng(7);
  std::vector<Index> odd;
  for (Index m = 1; m < 2000; m += 2) odd.push_back(m);
  const SignalMatrix x = sample_mixed_signals(g, 2000, odd, rng);
  double smooth = 0.0, high = 0.0;
  for (Index m = 0; m < 2000; ++m) (m % 2 ? high : smooth) += smoothness(x.values().col(m), l);
  CHECK(smooth < high);
}

TEST_CASE("outlier index choice") {
  Rng rng(8);
  const auto idx = choose_outlier_indices(10, 3, rng);
  CHECK(idx.size() == 3);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(std::set<Index>(idx.begin(), idx.end()).size() == 3);
  for (Index i : idx) CHECK((i >= 0 && i < 10));
  CHECK(choose_outlier_indices(5, 0, rng).empty());
  CHECK(choose_outlier_indices(5, 5, rng).size() == 5);
  CHECK_THROWS_AS(choose_outlier_indices(5, 6, rng), Error);
}

TEST_CASE("default dataset") {
  const SynthConfig cfg;
  const Dataset ds = build_dataset(cfg);
  CHECK(ds.train.size() == 16);
  CHECK(ds.test.size() == 16);
  CHECK(ds.outlier_indices.size() == 1);
  for (const auto* set : {&ds.train, &ds.test})
    for (const auto& s : set->samples()) {
      CHECK(valid_adjacency(s.graph.adjacency()));
      CHECK(std::abs(s.graph.adjacency().norm() - 1.0) < 1e-12);
      CHECK(s.signals.n_nodes() == 10);
      CHECK(s.signals.n_signals() == 10);
    }

  SynthConfig many = cfg;
  many.n_signals = 40;
  many.outlier_fraction = 0.25;
  CHECK(build_dataset(many).outlier_indices.size() == 10);

  SynthConfig none = cfg;
  none.outlier_fraction = 0.0;
  const Dataset clean = build_dataset(none);
  CHECK(clean.outlier_indices.empty());
  // every column is smooth: orthogonal to the constant vector
  for (const auto& s : clean.train.samples())
    CHECK((Vector::Ones(10).transpose() * s.signals.values()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("datasets are deterministic in the seed") {
  SynthConfig cfg;
  cfg.n_graphs_train = 4;
  cfg.n_graphs_test = 2;
  const Dataset a = build_dataset(cfg);
  const Dataset b = build_dataset(cfg);
  for (std::size_t g = 0; g < a.train.size(); ++g) {
    CHECK(a.train.samples()[g].graph.adjacency() == b.train.samples()[g].graph.adjacency());
    CHECK(a.train.samples()[g].signals.values() == b.train.samples()[g].signals.values());
  }
  CHECK(a.outlier_indices == b.outlier_indices);

  cfg.seed = 2;
  const Dataset c = build_dataset(cfg);
  CHECK(c.train.samples()[0].graph.adjacency() != a.train.samples()[0].graph.adjacency());
}

TEST_CASE("explicit outlier indices") {
  SynthConfig cfg;
  cfg.n_signals = 6;
  cfg.n_graphs_train = 2;
  cfg.n_graphs_test = 1;
  const Dataset ds = build_dataset(cfg, {4, 1});
  CHECK(ds.outlier_indices == std::vector<Index>{1, 4});
  CHECK_THROWS_AS(build_dataset(cfg, {6}), Error);
}

TEST_CASE("config validation and json") {
  SynthConfig cfg;
  cfg.outlier_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.outlier_fraction = 0.1;
  cfg.n_nodes = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);

  SynthConfig full;
  full.n_nodes = 7;
  full.graph_family = GraphFamily::ErdosRenyi;
  full.seed = 12345678901234ULL;
  const SynthConfig back = synth_config_from_json(synth_config_to_json(full));
  CHECK(back.n_nodes == 7);
  CHECK(back.graph_family == GraphFamily::ErdosRenyi);
  CHECK(back.seed == full.seed);
  CHECK(graph_family_from_string(to_string(GraphFamily::PerturbedBase)) == GraphFamily::PerturbedBase);
  CHECK_THROWS_AS(graph_family_from_string("lattice"), Error);
  CHECK_THROWS_AS(synth_config_from_json(nlohmann::json{{"n_nodez", 3}}), Error);
  CHECK_THROWS_AS(synth_config_from_json(nlohmann::json{{"outlier_fraction", 1.5}}), Error);
}

TEST_CASE("dataset export and import") {
  SynthConfig cfg;
  cfg.n_graphs_train = 3;
  cfg.n_graphs_test = 2;
  cfg.n_signals = 5;
  cfg.outlier_fraction = 0.4;
  const Dataset ds = build_dataset(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "graphlearn_dataset_roundtrip";
  std::filesystem::remove_all(dir);
  export_dataset(ds, dir);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "A_0.csv"));
  CHECK(std::filesystem::exists(dir / "X_4.csv"));

  const Dataset back = import_dataset(dir);
  CHECK(back.outlier_indices == ds.outlier_indices);
  CHECK(back.config.seed == ds.config.seed);
  REQUIRE(back.train.size() == 3);
  REQUIRE(back.test.size() == 2);
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK((back.train.samples()[g].graph.adjacency() - ds.train.samples()[g].graph.adjacency()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.train.samples()[g].signals.values() - ds.train.samples()[g].signals.values()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(import_dataset(dir), Error);
}

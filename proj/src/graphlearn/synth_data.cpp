#include "graphlearn/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "graphlearn/error.hpp"
#include "graphlearn/matrix_io.hpp"

namespace graphlearn {

using nlohmann::json;

namespace {

bool is_fraction(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

struct Pair {
  Index i;
  Index j;
};

std::vector<Pair> upper_pairs(Index n) {
  std::vector<Pair> out;
  out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) out.push_back({i, j});
  return out;
}

// First `count` entries of `items` become a uniform random subset.
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count && i + 1 < items.size(); ++i) {
    const std::size_t pick = i + static_cast<std::size_t>(rng.uniform_index(items.size() - i));
    std::swap(items[i], items[pick]);
  }
}

}  // namespace

void SynthConfig::validate() const {
  require(n_nodes >= 2, ErrorCode::InvalidArgument, fmt::format("n_nodes must be >= 2, got {}", n_nodes));
  require(n_signals >= 1, ErrorCode::InvalidArgument, fmt::format("n_signals must be >= 1, got {}", n_signals));
  require(n_graphs_train >= 0 && n_graphs_test >= 0, ErrorCode::InvalidArgument,
          "graph counts must be nonnegative");
  require(is_fraction(base_density) && base_density > 0.0, ErrorCode::InvalidArgument,
          fmt::format("base_density must be in (0, 1], got {}", base_density));
  require(is_fraction(perturb_fraction), ErrorCode::InvalidArgument,
          fmt::format("perturb_fraction must be in [0, 1], got {}", perturb_fraction));
  require(is_fraction(outlier_fraction), ErrorCode::InvalidArgument,
          fmt::format("outlier_fraction must be in [0, 1], got {}", outlier_fraction));
  require(is_fraction(er_edge_probability) && er_edge_probability > 0.0, ErrorCode::InvalidArgument,
          fmt::format("er_edge_probability must be in (0, 1], got {}", er_edge_probability));
}

Index SynthConfig::n_outliers() const {
  return std::max<Index>(0, static_cast<Index>(std::lround(outlier_fraction * static_cast<double>(n_signals))));
}

Index pair_count(Index n_nodes, double fraction) {
  return static_cast<Index>(std::lround(fraction * static_cast<double>(n_nodes * (n_nodes - 1) / 2)));
}

WeightedGraph normalize_frobenius(const WeightedGraph& graph) {
  const double norm = graph.adjacency().norm();
  require(norm > 0.0, ErrorCode::Degenerate, "cannot normalize a graph without edges");
  return WeightedGraph::from_adjacency(graph.adjacency() / norm);
}

WeightedGraph gen_base_graph(Index n_nodes, double density, Rng& rng) {
  require(n_nodes >= 2, ErrorCode::InvalidArgument, "base graph needs at least two nodes");
  require(density > 0.0 && density <= 1.0, ErrorCode::InvalidArgument,
          fmt::format("density must be in (0, 1], got {}", density));
  const Index edges = pair_count(n_nodes, density);
  constexpr int kMaxRetries = 1000;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    auto pairs = upper_pairs(n_nodes);
    partial_shuffle(pairs, static_cast<std::size_t>(edges), rng);
    Matrix a = Matrix::Zero(n_nodes, n_nodes);
    for (Index e = 0; e < edges; ++e) {
      const auto [i, j] = pairs[static_cast<std::size_t>(e)];
      a(i, j) = a(j, i) = rng.uniform();
    }
    WeightedGraph g = WeightedGraph::from_adjacency(std::move(a));
    if (is_connected(g)) return g;
  }
  fail(ErrorCode::Degenerate,
       fmt::format("no connected graph with {} edges on {} nodes after {} attempts; density {} is too low",
                   edges, n_nodes, kMaxRetries, density));
}

WeightedGraph perturb_graph(const WeightedGraph& base, double fraction, Rng& rng) {
  require(is_fraction(fraction), ErrorCode::InvalidArgument,
          fmt::format("perturbation fraction must be in [0, 1], got {}", fraction));
  const Index n = base.n_nodes();
  const Index count = pair_count(n, fraction);
  auto pairs = upper_pairs(n);
  partial_shuffle(pairs, static_cast<std::size_t>(count), rng);
  Matrix a = base.adjacency();
  for (Index e = 0; e < count; ++e) {
    const auto [i, j] = pairs[static_cast<std::size_t>(e)];
    a(i, j) = a(j, i) = rng.uniform();
  }
  return normalize_frobenius(WeightedGraph::from_adjacency(std::move(a)));
}

WeightedGraph gen_erdos_renyi(Index n_nodes, double edge_probability, Rng& rng) {
  require(n_nodes >= 2, ErrorCode::InvalidArgument, "graph needs at least two nodes");
  require(edge_probability > 0.0 && edge_probability <= 1.0, ErrorCode::InvalidArgument,
          fmt::format("edge probability must be in (0, 1], got {}", edge_probability));
  constexpr int kMaxRetries = 1000;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    Matrix a = Matrix::Zero(n_nodes, n_nodes);
    for (const auto& [i, j] : upper_pairs(n_nodes)) {
      const double keep = rng.uniform();
      const double weight = rng.uniform();
      if (keep < edge_probability) a(i, j) = a(j, i) = weight;
    }
    if (a.norm() > 0.0) return normalize_frobenius(WeightedGraph::from_adjacency(std::move(a)));
  }
  fail(ErrorCode::Degenerate, "Erdos-Renyi generator produced only empty graphs");
}

namespace {

// Per-eigenvector scale whose square is the covariance spectrum.
Vector spectral_scale(const LaplacianDecomposition& d, SignalProfile profile) {
  const double tol = eigenvalue_zero_tolerance(d.eigenvalues);
  Vector scale(d.eigenvalues.size());
  for (Index i = 0; i < scale.size(); ++i) {
    const double lambda = d.eigenvalues(i);
    if (profile == SignalProfile::Smooth)
      scale(i) = std::abs(lambda) < tol ? 0.0 : 1.0 / std::sqrt(lambda);
    else
      scale(i) = lambda;
  }
  return scale;
}

Vector draw_signal(const LaplacianDecomposition& d, const Vector& scale, Rng& rng) {
  Vector z(scale.size());
  for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return d.eigenvectors * scale.cwiseProduct(z);
}

}  // namespace

SignalMatrix sample_signals(const WeightedGraph& graph, Index n_signals, SignalProfile profile, Rng& rng) {
  require(n_signals >= 1, ErrorCode::InvalidArgument, "need at least one signal");
  const LaplacianDecomposition d = gft(laplacian(graph));
  const Vector scale = spectral_scale(d, profile);
  Matrix x(graph.n_nodes(), n_signals);
  for (Index m = 0; m < n_signals; ++m) x.col(m) = draw_signal(d, scale, rng);
  return SignalMatrix(std::move(x));
}

SignalMatrix sample_mixed_signals(const WeightedGraph& graph, Index n_signals,
                                  const std::vector<Index>& outlier_indices, Rng& rng) {
  require(n_signals >= 1, ErrorCode::InvalidArgument, "need at least one signal");
  const LaplacianDecomposition d = gft(laplacian(graph));
  const Vector smooth = spectral_scale(d, SignalProfile::Smooth);
  const Vector high = spectral_scale(d, SignalProfile::HighFrequency);
  const std::set<Index> outliers(outlier_indices.begin(), outlier_indices.end());
  Matrix x(graph.n_nodes(), n_signals);
  for (Index m = 0; m < n_signals; ++m) x.col(m) = draw_signal(d, outliers.count(m) ? high : smooth, rng);
  return SignalMatrix(std::move(x));
}

std::vector<Index> choose_outlier_indices(Index n_signals, Index n_outliers, Rng& rng) {
  require(n_outliers >= 0 && n_outliers <= n_signals, ErrorCode::InvalidArgument,
          "outlier count exceeds the number of signals");
  std::vector<Index> all(static_cast<std::size_t>(n_signals));
  for (Index m = 0; m < n_signals; ++m) all[static_cast<std::size_t>(m)] = m;
  partial_shuffle(all, static_cast<std::size_t>(n_outliers), rng);
  std::vector<Index> out(all.begin(), all.begin() + n_outliers);
  std::sort(out.begin(), out.end());
  return out;
}

Dataset build_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Rng outlier_rng = Rng::stream(cfg.seed, "outliers");
  return build_dataset(cfg, choose_outlier_indices(cfg.n_signals, cfg.n_outliers(), outlier_rng));
}

Dataset build_dataset(const SynthConfig& cfg, std::vector<Index> outlier_indices) {
  cfg.validate();
  std::sort(outlier_indices.begin(), outlier_indices.end());
  outlier_indices.erase(std::unique(outlier_indices.begin(), outlier_indices.end()), outlier_indices.end());
  for (Index m : outlier_indices)
    require(m >= 0 && m < cfg.n_signals, ErrorCode::InvalidArgument,
            fmt::format("outlier index {} is outside [0, {})", m, cfg.n_signals));
  Dataset ds;
  ds.config = cfg;
  ds.outlier_indices = std::move(outlier_indices);

  WeightedGraph base;
  if (cfg.graph_family == GraphFamily::PerturbedBase) {
    Rng base_rng = Rng::stream(cfg.seed, "base");
    base = gen_base_graph(cfg.n_nodes, cfg.base_density, base_rng);
  }

  const Index total = cfg.n_graphs_train + cfg.n_graphs_test;
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> test;
  for (Index g = 0; g < total; ++g) {
    Rng graph_rng = Rng::stream(cfg.seed, "graph", {static_cast<std::uint64_t>(g)});
    Rng signal_rng = Rng::stream(cfg.seed, "signals", {static_cast<std::uint64_t>(g)});
    WeightedGraph graph = cfg.graph_family == GraphFamily::PerturbedBase
                              ? perturb_graph(base, cfg.perturb_fraction, graph_rng)
                              : gen_erdos_renyi(cfg.n_nodes, cfg.er_edge_probability, graph_rng);
    SignalMatrix x = sample_mixed_signals(graph, cfg.n_signals, ds.outlier_indices, signal_rng);
    (g < cfg.n_graphs_train ? train : test).push_back({std::move(x), std::move(graph)});
  }
  if (!train.empty()) ds.train = TrainingSet(std::move(train));
  if (!test.empty()) ds.test = TrainingSet(std::move(test));
  return ds;
}

std::string to_string(GraphFamily family) {
  return family == GraphFamily::PerturbedBase ? "perturbed-base" : "erdos-renyi";
}

GraphFamily graph_family_from_string(const std::string& name) {
  if (name == "perturbed-base") return GraphFamily::PerturbedBase;
  if (name == "erdos-renyi") return GraphFamily::ErdosRenyi;
  fail(ErrorCode::InvalidArgument,
       fmt::format("unknown graph_family '{}' (expected perturbed-base or erdos-renyi)", name));
}

json synth_config_to_json(const SynthConfig& cfg) {
  return {
      {"n_nodes", cfg.n_nodes},
      {"n_graphs_train", cfg.n_graphs_train},
      {"n_graphs_test", cfg.n_graphs_test},
      {"base_density", cfg.base_density},
      {"perturb_fraction", cfg.perturb_fraction},
      {"n_signals", cfg.n_signals},
      {"outlier_fraction", cfg.outlier_fraction},
      {"seed", cfg.seed},
      {"graph_family", to_string(cfg.graph_family)},
      {"er_edge_probability", cfg.er_edge_probability},
  };
}

SynthConfig synth_config_from_json(const json& j) {
  require(j.is_object(), ErrorCode::InvalidArgument, "synth config must be a JSON object");
  SynthConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_nodes") cfg.n_nodes = value.get<Index>();
      else if (key == "n_graphs_train") cfg.n_graphs_train = value.get<Index>();
      else if (key == "n_graphs_test") cfg.n_graphs_test = value.get<Index>();
      else if (key == "base_density") cfg.base_density = value.get<double>();
      else if (key == "perturb_fraction") cfg.perturb_fraction = value.get<double>();
      else if (key == "n_signals") cfg.n_signals = value.get<Index>();
      else if (key == "outlier_fraction") cfg.outlier_fraction = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "graph_family") cfg.graph_family = graph_family_from_string(value.get<std::string>());
      else if (key == "er_edge_probability") cfg.er_edge_probability = value.get<double>();
      else fail(ErrorCode::InvalidArgument, fmt::format("unknown synth config key '{}'", key));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, fmt::format("invalid synth config: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

void export_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::Io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  json graphs = json::array();
  Index g = 0;
  auto write_split = [&](const TrainingSet& set, const char* split) {
    for (const auto& s : set.samples()) {
      const std::string a_name = fmt::format("A_{}.csv", g);
      const std::string x_name = fmt::format("X_{}.csv", g);
      io::write_csv(s.graph.adjacency(), dir / a_name);
      io::write_csv(s.signals.values(), dir / x_name);
      graphs.push_back({{"index", g}, {"split", split}, {"adjacency", a_name}, {"signals", x_name}});
      ++g;
    }
  };
  write_split(dataset.train, "train");
  write_split(dataset.test, "test");
  const json manifest = {
      {"format_version", 1},
      {"config", synth_config_to_json(dataset.config)},
      {"outlier_indices", dataset.outlier_indices},
      {"files", std::move(graphs)},
  };
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset import_dataset(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(io::read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("{}: {}", (dir / "manifest.json").string(), e.what()));
  }
  Dataset ds;
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> test;
  try {
    if (manifest.contains("config")) ds.config = synth_config_from_json(manifest.at("config"));
    ds.outlier_indices = manifest.value("outlier_indices", std::vector<Index>{});
    for (const auto& entry : manifest.at("files")) {
      const std::string split = entry.at("split").get<std::string>();
      require(split == "train" || split == "test", ErrorCode::Parse,
              fmt::format("unknown split '{}' in manifest", split));
      TrainingSample sample{SignalMatrix(io::read_csv(dir / entry.at("signals").get<std::string>())),
                            WeightedGraph::from_adjacency(io::read_csv(dir / entry.at("adjacency").get<std::string>()))};
      require(sample.signals.n_nodes() == sample.graph.n_nodes(), ErrorCode::DimensionMismatch,
              fmt::format("graph {}: signals have {} rows but adjacency has {} nodes",
                          entry.value("index", Index{-1}), sample.signals.n_nodes(), sample.graph.n_nodes()));
      (split == "train" ? train : test).push_back(std::move(sample));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("malformed manifest in '{}': {}", dir.string(), e.what()));
  }
  ds.config.n_graphs_train = static_cast<Index>(train.size());
  ds.config.n_graphs_test = static_cast<Index>(test.size());
  if (!train.empty()) ds.train = TrainingSet(std::move(train));
  if (!test.empty()) ds.test = TrainingSet(std::move(test));
  return ds;
}

}  // namespace graphlearn

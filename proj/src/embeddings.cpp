#include "coarsekit/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace coarsekit {

HilbertEmbedding::HilbertEmbedding(DiscreteMetricSpace space,
                                   Eigen::MatrixXd coords,
                                   double truncation_error)
    : space_(std::move(space)),
      coords_(std::move(coords)),
      truncation_error_(truncation_error) {
  if (coords_.rows() != space_.size()) {
    throw PreconditionError("embedding: coordinate rows do not match space");
  }
  if (!coords_.allFinite()) {
    throw PreconditionError("embedding: non-finite coordinate");
  }
}

EmbeddingError::EmbeddingError(const std::string& msg,
                               std::optional<ClassificationReport> r)
    : Error(msg), nt_report(std::move(r)) {}

HilbertEmbedding embedding_from_negative_type(const Kernel& h, Index basepoint,
                                              std::optional<Index> top_k,
                                              double tol) {
  Eigen::MatrixXd m = h.real_values();
  const Index n = m.rows();
  if (basepoint < 0 || basepoint >= n) {
    throw PreconditionError("embedding: basepoint out of range");
  }
  const double scale = n ? m.cwiseAbs().maxCoeff() : 0.0;
  // Cheap sanity on the kernel shape before the expensive factorization.
  for (Index i = 0; i < n; ++i) {
    if (std::abs(m(i, i)) > tol * std::max(scale, 1.0)) {
      throw EmbeddingError("embedding: kernel diagonal is not zero",
                           check_negative_type(h, tol));
    }
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol * std::max(scale, 1.0)) {
        throw EmbeddingError("embedding: kernel is not symmetric",
                             check_negative_type(h, tol));
      }
    }
  }

  Eigen::MatrixXd g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      g(i, j) = 0.5 * (m(i, basepoint) + m(j, basepoint) - m(i, j));
    }
  }
  g = (g + g.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double clamp = 1e-9 * double(n) * scale;
  if (ev(0) < -clamp) {
    std::ostringstream os;
    os << "embedding: Gram matrix has eigenvalue " << ev(0)
       << " below the clamp window " << -clamp
       << "; input is not negative type";
    throw EmbeddingError(os.str(), check_negative_type(h, tol));
  }

  // Columns ordered by descending eigenvalue; only strictly positive
  // eigenvalues carry coordinates.
  std::vector<Index> order(size_t(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return ev(a) > ev(b); });
  std::vector<Index> kept;
  for (Index c : order) {
    if (ev(c) > 0.0) kept.push_back(c);
  }
  double truncation_error = 0.0;
  if (top_k) {
    if (*top_k < 1) throw PreconditionError("embedding: top_k must be >= 1");
    if (Index(kept.size()) > *top_k) {
      double dropped = 0.0;
      for (size_t i = size_t(*top_k); i < kept.size(); ++i) {
        dropped += ev(kept[i]) * ev(kept[i]);
      }
      truncation_error = std::sqrt(dropped);
      kept.resize(size_t(*top_k));
    }
  }
  const Index dim = std::max<Index>(1, Index(kept.size()));
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, dim);
  for (size_t c = 0; c < kept.size(); ++c) {
    coords.col(Index(c)) =
        es.eigenvectors().col(kept[c]) * std::sqrt(ev(kept[c]));
  }
  // Exact zero at the basepoint; differences are unchanged.
  Eigen::RowVectorXd base = coords.row(basepoint);
  coords.rowwise() -= base;
  coords.row(basepoint).setZero();
  return HilbertEmbedding(h.space(), std::move(coords), truncation_error);
}

Kernel negative_type_from_embedding(const HilbertEmbedding& f) {
  const Index n = f.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = (f.coords().row(i) - f.coords().row(j)).squaredNorm();
      h(i, j) = h(j, i) = v;
    }
  }
  return Kernel::real(f.space(), std::move(h));
}

// ---------------------------------------------------------------------------
// Compression envelopes

CompressionProfile compression_bounds(const HilbertEmbedding& f) {
  CompressionProfile out;
  const DiscreteMetricSpace& space = f.space();
  out.radii = space.distance_grid();
  const size_t g = out.radii.size();
  const Index n = f.size();
  std::vector<double> bucket_min(g, std::numeric_limits<double>::infinity());
  std::vector<double> bucket_max(g, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double d = space.distance(i, j);
      auto it = std::upper_bound(out.radii.begin(), out.radii.end(), d);
      size_t b = size_t(std::distance(out.radii.begin(), it)) - 1;
      const double v = f.pair_distance(i, j);
      bucket_min[b] = std::min(bucket_min[b], v);
      bucket_max[b] = std::max(bucket_max[b], v);
    }
  }
  out.rho_minus.assign(g, 0.0);
  out.rho_plus.assign(g, 0.0);
  double running_min = std::numeric_limits<double>::infinity();
  for (size_t b = g; b-- > 0;) {
    running_min = std::min(running_min, bucket_min[b]);
    out.rho_minus[b] = running_min;
  }
  double running_max = 0.0;
  for (size_t b = 0; b < g; ++b) {
    running_max = std::max(running_max, bucket_max[b]);
    out.rho_plus[b] = running_max;
  }
  return out;
}

double CompressionProfile::rho_minus_at(double r) const {
  auto it = std::lower_bound(radii.begin(), radii.end(), r);
  if (it == radii.end()) return std::numeric_limits<double>::infinity();
  return rho_minus[size_t(std::distance(radii.begin(), it))];
}

double CompressionProfile::rho_plus_at(double r) const {
  // max over d <= r: the largest grid radius <= r.
  auto it = std::upper_bound(radii.begin(), radii.end(), r);
  if (it == radii.begin()) return 0.0;
  return rho_plus[size_t(std::distance(radii.begin(), it)) - 1];
}

// ---------------------------------------------------------------------------
// Expander obstruction

namespace {

std::vector<std::pair<Index, Index>> unit_distance_edges(
    const DiscreteMetricSpace& space) {
  std::vector<std::pair<Index, Index>> edges;
  const Index n = space.size();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (space.distance(i, j) == 1.0) edges.emplace_back(i, j);
    }
  }
  return edges;
}

}  // namespace

ExpanderCertificate expander_obstruction(const DiscreteMetricSpace& graph_space,
                                         const HilbertEmbedding& f) {
  if (!graph_space.same_as(f.space())) {
    throw PreconditionError(
        "expander_obstruction: embedding is not on the given graph space");
  }
  const Index n = graph_space.size();
  if (n < 2) {
    throw PreconditionError("expander_obstruction: need at least two vertices");
  }
  auto edges = unit_distance_edges(graph_space);
  if (edges.empty()) {
    throw PreconditionError("expander_obstruction: no unit-distance edges");
  }

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  std::vector<Index> degree(size_t(n), 0);
  for (const auto& [u, v] : edges) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
    ++degree[size_t(u)];
    ++degree[size_t(v)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  const double lambda1 = es.eigenvalues()(1);
  if (lambda1 <= 1e-9 * double(n)) {
    throw PreconditionError(
        "expander_obstruction: graph is disconnected (lambda1 = 0)");
  }

  ExpanderCertificate cert;
  cert.n = n;
  cert.degree = *std::max_element(degree.begin(), degree.end());
  cert.regular =
      *std::min_element(degree.begin(), degree.end()) == cert.degree;
  cert.lambda1 = lambda1;

  double spread = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      spread += (f.coords().row(i) - f.coords().row(j)).squaredNorm();
    }
  }
  cert.lhs = spread / double(n) / double(n);
  double edge_energy = 0.0;
  for (const auto& [u, v] : edges) {
    edge_energy += (f.coords().row(u) - f.coords().row(v)).squaredNorm();
  }
  cert.rhs = 2.0 * edge_energy / (double(n) * lambda1);
  if (cert.lhs > cert.rhs * (1.0 + 1e-9)) {
    // Spectral theorem consequence; cannot fail for a genuine Laplacian.
    throw Error("expander_obstruction: Poincare inequality violated");
  }

  std::vector<double> dists;
  dists.reserve(size_t(n) * size_t(n - 1) / 2);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      dists.push_back(graph_space.distance(i, j));
    }
  }
  std::sort(dists.begin(), dists.end());
  cert.median_distance = dists[dists.size() / 2];

  CompressionProfile rho = compression_bounds(f);
  cert.rho_plus_edge = rho.rho_plus_at(1.0);
  cert.rho_minus_median = rho.rho_minus_at(cert.median_distance);
  cert.bound = double(cert.degree) * cert.rho_plus_edge * cert.rho_plus_edge /
               lambda1;
  if (cert.rho_minus_median > 0.0) {
    cert.obstruction_strength = cert.median_distance * cert.rho_plus_edge *
                                cert.rho_plus_edge /
                                (cert.rho_minus_median * cert.rho_minus_median);
  } else {
    cert.obstruction_strength = std::numeric_limits<double>::infinity();
  }

  std::ostringstream os;
  if (cert.obstruction_strength > 2.0) {
    os << "obstruction: pairs at the median distance " << cert.median_distance
       << " are pinched to rho-(median)^2 = "
       << cert.rho_minus_median * cert.rho_minus_median
       << " while the edge bound allows at most "
       << 2.0 * cert.bound << " (strength "
       << cert.obstruction_strength << ")";
  } else {
    os << "no obstruction (bound is loose): rho-(median)^2 = "
       << cert.rho_minus_median * cert.rho_minus_median
       << " against allowance " << 2.0 * cert.bound;
  }
  cert.verdict = os.str();
  return cert;
}

// ---------------------------------------------------------------------------
// Seeded regular graphs and the resistance kernel

DiscreteMetricSpace random_regular_graph(Index n, Index degree,
                                         std::uint64_t seed) {
  if (n < 2 || degree < 1 || degree >= n) {
    throw PreconditionError("random_regular_graph: need 1 <= degree < n");
  }
  if ((n * degree) % 2 != 0) {
    throw PreconditionError("random_regular_graph: n * degree must be even");
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Index> stubs;
    stubs.reserve(size_t(n * degree));
    for (Index v = 0; v < n; ++v) {
      for (Index k = 0; k < degree; ++k) stubs.push_back(v);
    }
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<Index, Index>> edge_set;
    bool ok = true;
    for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
      Index a = stubs[i], b = stubs[i + 1];
      if (a == b) {
        ok = false;
        break;
      }
      auto e = std::minmax(a, b);
      if (!edge_set.emplace(e.first, e.second).second) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<std::pair<Index, Index>> edges(edge_set.begin(),
                                               edge_set.end());
    try {
      return graph_metric(n, edges);
    } catch (const PreconditionError&) {
      continue;  // disconnected sample, redraw
    }
  }
  throw ResourceError(
      "random_regular_graph: no simple connected sample in 10000 attempts");
}

Kernel resistance_kernel(const DiscreteMetricSpace& graph_space) {
  const Index n = graph_space.size();
  auto edges = unit_distance_edges(graph_space);
  if (edges.empty()) {
    throw PreconditionError("resistance_kernel: no unit-distance edges");
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [u, v] : edges) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = 1e-12 * double(n) * std::max(ev(n - 1), 1.0);
  if (n > 1 && ev(1) <= cut) {
    throw PreconditionError("resistance_kernel: graph is disconnected");
  }
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
  for (Index c = 0; c < n; ++c) {
    if (ev(c) > cut) {
      pinv += es.eigenvectors().col(c) * es.eigenvectors().col(c).transpose() /
              ev(c);
    }
  }
  Eigen::MatrixXd res = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
      res(i, j) = res(j, i) = std::max(v, 0.0);
    }
  }
  return Kernel::real(graph_space, std::move(res));
}

}  // namespace coarsekit

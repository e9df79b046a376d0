#pragma once

// Finite discrete metric spaces: explicit matrices, graph metrics and
// word-metric balls of groups. Everything downstream runs on these.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarsekit/errors.hpp"

namespace coarsekit {

using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Metric validation

struct MetricViolation {
  enum class Axiom {
    NonFinite,
    Asymmetry,
    NegativeEntry,
    NonzeroDiagonal,
    ZeroOffDiagonal,
    Triangle,
  };
  Axiom axiom;
  Index i = -1, j = -1, k = -1;  // witness indices; k used by Triangle only
  double value = 0.0;            // the offending quantity
  double bound = 0.0;            // what it had to satisfy (Triangle: d(i,j)+d(j,k))
  std::string describe() const;
};

struct MetricCheck {
  bool ok = false;
  std::vector<MetricViolation> violations;
};

/// Checks the metric axioms entry by entry and names each violation with
/// witness indices. Never throws on axiom failures; returns them.
MetricCheck validate_metric(const Eigen::MatrixXd& m);

struct MetricError : Error {
  std::vector<MetricViolation> violations;
  explicit MetricError(std::vector<MetricViolation> v);
};

// ---------------------------------------------------------------------------
// DiscreteMetricSpace — immutable, cheap to copy (shared state).

class DiscreteMetricSpace {
 public:
  DiscreteMetricSpace() = default;

  /// Validating constructor; throws MetricError listing every violation.
  static DiscreteMetricSpace from_matrix(std::vector<std::string> labels,
                                         Eigen::MatrixXd d);

  /// Constructor for metrics that hold by construction (graph BFS, word
  /// metrics, subspaces). Skips the O(n^3) triangle scan.
  static DiscreteMetricSpace unchecked(std::vector<std::string> labels,
                                       Eigen::MatrixXd d);

  Index size() const { return impl_ ? Index(impl_->labels.size()) : 0; }
  const std::vector<std::string>& labels() const { return impl_->labels; }
  const std::string& label(Index i) const { return impl_->labels[size_t(i)]; }
  const Eigen::MatrixXd& d() const { return impl_->d; }
  double distance(Index i, Index j) const { return impl_->d(i, j); }

  /// Sorted unique realized distances (including 0 when the space is
  /// nonempty); the grid every envelope in this library is tabulated on.
  const std::vector<double>& distance_grid() const { return impl_->grid; }
  double max_distance() const { return impl_->maxd; }

  DiscreteMetricSpace subspace(const std::vector<Index>& points) const;

  /// Identity of the shared state; kernels and embeddings use this to
  /// check they were built over the same space instance.
  bool same_as(const DiscreteMetricSpace& o) const { return impl_ == o.impl_; }
  bool empty() const { return size() == 0; }

 private:
  struct Impl {
    std::vector<std::string> labels;
    Eigen::MatrixXd d;
    std::vector<double> grid;
    double maxd = 0.0;
  };
  std::shared_ptr<const Impl> impl_;
  static DiscreteMetricSpace wrap(std::vector<std::string> labels,
                                  Eigen::MatrixXd d);
};

/// Shortest-path metric of a simple undirected connected graph with unit
/// edge weights. Throws PreconditionError naming a stranded vertex when
/// the graph is disconnected.
DiscreteMetricSpace graph_metric(Index n_vertices,
                                 const std::vector<std::pair<Index, Index>>& edges);

// ---------------------------------------------------------------------------
// B_delta(R): the pair set {(x,y) : d(x,y) < R}.

struct DiagonalNeighborhood {
  double radius = 0.0;
  std::vector<std::pair<Index, Index>> pairs;  // ordered pairs, diagonal included
};

DiagonalNeighborhood diagonal_neighborhood(const DiscreteMetricSpace& space,
                                           double radius);

// ---------------------------------------------------------------------------
// Groups and word-metric balls

struct GroupSpec {
  enum class Kind { Free, Zn, Table };
  Kind kind = Kind::Free;
  int rank = 1;  // Free: rank; Zn: dimension

  // Table groups
  std::vector<std::string> elements;
  std::vector<std::vector<int>> table;  // table[i][j] = index of elements[i]*elements[j]
  std::vector<int> generators;          // indices; inverses added automatically

  static GroupSpec free_group(int rank);
  static GroupSpec integer_lattice(int dim);
  static GroupSpec finite_table(std::vector<std::string> elements,
                                std::vector<std::vector<int>> table,
                                std::vector<int> generators);
};

struct BallOptions {
  int margin = 0;
  std::size_t max_elements = 200000;
};

/// The ball of a group, enumerated to radius + margin. Elements are
/// ordered by word length (ties broken canonically), so the interior
/// ball is always the index prefix [0, interior_size).
///
/// Products that would leave the enumerated set are rejected (nullopt);
/// distances l(s t^{-1}) are exact for every enumerated pair regardless
/// of the margin, computed from normal forms.
class GroupBall {
 public:
  GroupBall() = default;

  Index size() const;           // all enumerated elements (radius + margin)
  Index interior_size() const;  // word length <= radius
  int radius() const;
  int margin() const;
  const GroupSpec& spec() const;

  const std::string& label(Index i) const;
  int length(Index i) const;
  Index identity() const { return 0; }

  std::optional<Index> product(Index a, Index b) const;
  Index inverse(Index a) const;
  int distance(Index s, Index t) const;  // l(s t^{-1})
  std::optional<Index> find(const std::string& label) const;

  /// Word metric as a DiscreteMetricSpace over all enumerated elements /
  /// over the interior only. Materialized lazily and cached, so repeated
  /// calls return the same shared space (same_as compatible).
  DiscreteMetricSpace metric_space() const;
  DiscreteMetricSpace interior_space() const;

  bool same_as(const GroupBall& o) const { return impl_ == o.impl_; }
  bool empty() const { return impl_ == nullptr; }

  struct Impl;  // defined in spaces.cpp

 private:
  friend GroupBall cayley_ball(const GroupSpec&, int, const BallOptions&);
  std::shared_ptr<Impl> impl_;
};

/// Enumerates the ball of radius `radius` (plus options.margin) of the
/// given group with exact normal forms. Supported specs: free groups,
/// Z^n, finite groups by multiplication table.
GroupBall cayley_ball(const GroupSpec& spec, int radius,
                      const BallOptions& options = {});

}  // namespace coarsekit

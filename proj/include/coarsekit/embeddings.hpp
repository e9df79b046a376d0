#pragma once

// Hilbert-space realizations of negative-type kernels, compression
// envelopes rho-/rho+, and the spectral (Poincare) obstruction for
// expander families.

#include <cstdint>
#include <optional>
#include <string>

#include "coarsekit/kernels.hpp"

namespace coarsekit {

class HilbertEmbedding {
 public:
  HilbertEmbedding() = default;
  /// coords: one row of length dim per point.
  HilbertEmbedding(DiscreteMetricSpace space, Eigen::MatrixXd coords,
                   double truncation_error = 0.0);

  const DiscreteMetricSpace& space() const { return space_; }
  const Eigen::MatrixXd& coords() const { return coords_; }
  Index size() const { return coords_.rows(); }
  Index dim() const { return coords_.cols(); }
  double truncation_error() const { return truncation_error_; }
  double pair_distance(Index i, Index j) const {
    return (coords_.row(i) - coords_.row(j)).norm();
  }

 private:
  DiscreteMetricSpace space_;
  Eigen::MatrixXd coords_;
  double truncation_error_ = 0.0;
};

struct EmbeddingError : Error {
  std::optional<ClassificationReport> nt_report;
  EmbeddingError(const std::string& msg, std::optional<ClassificationReport> r);
};

/// Factors the basepoint Gram matrix
///   G(i,j) = (h(x_i,x_0) + h(x_j,x_0) - h(x_i,x_j)) / 2
/// by symmetric eigendecomposition. Eigenvalues in [-1e-9 n max|h|, 0)
/// are clamped to zero; anything lower throws EmbeddingError with a
/// negative-type cross-check attached. Guarantees f(basepoint) = 0
/// exactly and ||f(x)-f(y)||^2 = h(x,y) up to factorization error.
/// top_k keeps only the k largest eigenvalues and records the Frobenius
/// error of the dropped part on the embedding.
HilbertEmbedding embedding_from_negative_type(
    const Kernel& h, Index basepoint = 0,
    std::optional<Index> top_k = std::nullopt, double tol = kDefaultTol);

/// h(x,y) = ||f(x) - f(y)||^2. Always negative type.
Kernel negative_type_from_embedding(const HilbertEmbedding& f);

struct CompressionProfile {
  std::vector<double> radii;      // realized distances
  std::vector<double> rho_minus;  // min ||f(x)-f(y)|| over d >= r
  std::vector<double> rho_plus;   // max ||f(x)-f(y)|| over d <= r
  double rho_minus_at(double r) const;  // direct envelope lookups
  double rho_plus_at(double r) const;
};

CompressionProfile compression_bounds(const HilbertEmbedding& f);

struct ExpanderCertificate {
  Index n = 0;
  Index degree = 0;  // max degree; equals the common degree when regular
  bool regular = false;
  double lambda1 = 0.0;  // second-smallest Laplacian eigenvalue
  double lhs = 0.0;      // (1/n^2) sum_{x,y} ||f(x)-f(y)||^2
  double rhs = 0.0;      // (2/(n lambda1)) sum_{edges} ||f(u)-f(v)||^2
  double bound = 0.0;    // degree rho+(1)^2 / lambda1
  double median_distance = 0.0;
  double rho_plus_edge = 0.0;
  double rho_minus_median = 0.0;
  double obstruction_strength = 0.0;
  std::string verdict;
};

/// Reads the graph off the unit-distance pairs of the space, computes
/// the Laplacian gap and asserts the Poincare inequality lhs <= rhs for
/// the given embedding. obstruction_strength compares the separation an
/// isometry-like embedding would need at the median distance against
/// what the edge bound leaves available:
///   median * rho+(1)^2 / rho-(median)^2.
ExpanderCertificate expander_obstruction(const DiscreteMetricSpace& graph_space,
                                         const HilbertEmbedding& f);

/// Seeded configuration-model regular graph; disconnected and degenerate
/// pairings are rejected and redrawn deterministically.
DiscreteMetricSpace random_regular_graph(Index n, Index degree,
                                         std::uint64_t seed);

/// Effective-resistance kernel of a connected graph: always negative
/// type, with unit-distance pairs bounded by edge resistance <= 1.
Kernel resistance_kernel(const DiscreteMetricSpace& graph_space);

}  // namespace coarsekit

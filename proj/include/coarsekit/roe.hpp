#pragma once

// Finite-width operators on truncated balls, the left regular
// representation, Schur-multiplier and finite-rank map specs, and the
// operator -> kernel correspondence u(s,t) = <delta_s, T(s t^-1) delta_t>.
//
// Margin policy: operators live on the full enumerated ball B(N+W), but
// every product and inner product is only trusted on the interior B(N).
// Constructions that would need entries beyond the boundary shell throw
// TruncationError.

#include <Eigen/SparseCore>

#include <utility>
#include <vector>

#include "coarsekit/kernels.hpp"

namespace coarsekit {

using SparseComplex = Eigen::SparseMatrix<Complex>;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

class BandOperator {
 public:
  BandOperator() = default;
  /// Prunes explicit zeros and recomputes width and bound from the
  /// entries, so the metadata can never go stale.
  BandOperator(GroupBall ball, SparseComplex values);
  static BandOperator from_triplets(
      GroupBall ball, const std::vector<Eigen::Triplet<Complex>>& entries);

  const GroupBall& ball() const { return ball_; }
  const SparseComplex& values() const { return values_; }
  /// Max d(s,t) over nonzero entries; 0 for the zero operator.
  int width() const { return width_; }
  /// Max |A(s,t)|.
  double bound() const { return bound_; }
  Complex entry(Index s, Index t) const { return values_.coeff(s, t); }

  Eigen::MatrixXcd interior_block() const;
  /// Largest singular value of the interior block.
  double interior_norm() const;

 private:
  GroupBall ball_;
  SparseComplex values_;
  int width_ = 0;
  double bound_ = 0.0;
};

/// Translation matrix A(s,r) = 1 iff s = t r. Requires l(t) <= margin so
/// the interior block is an exact truncation of the group translation.
BandOperator left_regular(const GroupBall& ball, Index t);

/// Matrix product. Requires width(A) + width(B) <= margin; the interior
/// block of the result then agrees with the untruncated product.
BandOperator band_compose(const BandOperator& a, const BandOperator& b);

BandOperator band_adjoint(const BandOperator& a);

BandOperator band_add(const BandOperator& a, const BandOperator& b);
BandOperator band_scale(const BandOperator& a, Complex factor);

// ---------------------------------------------------------------------------
// CP map specifications

/// a |-> sum_k weight_k * <delta_row_k, a delta_col_k>.
struct MatrixCoefficientFunctional {
  struct Term {
    Index row = 0, col = 0;
    Complex weight{1.0, 0.0};
  };
  std::vector<Term> terms;
  /// Sum of |weight|, an upper bound for the functional norm.
  double norm_bound() const;
  Complex operator()(const BandOperator& a) const;
};

class CPMapSpec {
 public:
  enum class Type { Identity, SchurMultiplier, FiniteRank };
  using RankOneTerm = std::pair<MatrixCoefficientFunctional, BandOperator>;

  CPMapSpec() = default;
  static CPMapSpec identity(GroupBall ball);
  /// k must pass check_positive_definite and have unit diagonal; this is
  /// what certifies the Schur multiplier as unital completely positive.
  static CPMapSpec schur_multiplier(GroupBall ball, Kernel k,
                                    double tol = kDefaultTol);
  static CPMapSpec finite_rank(GroupBall ball, std::vector<RankOneTerm> terms);

  Type type() const { return type_; }
  const GroupBall& ball() const { return ball_; }
  const Kernel& schur_kernel() const;
  const std::vector<RankOneTerm>& terms() const;
  int max_term_width() const;
  bool is_ucp() const { return type_ != Type::FiniteRank; }

 private:
  Type type_ = Type::Identity;
  GroupBall ball_;
  Kernel schur_kernel_;
  std::vector<RankOneTerm> terms_;
};

/// T applied to the group element g (through its translation operator):
/// Identity -> lambda_g; SchurMultiplier(k) -> k .* lambda_g;
/// FiniteRank -> sum_i f_i(lambda_g) S_i.
BandOperator apply_cp_map(const CPMapSpec& map, Index g);

// ---------------------------------------------------------------------------
// Induced kernels

struct InducedKernel {
  Kernel kernel;       // on the interior ball; undefined entries are 0
  BoolMatrix defined;  // pair evaluated iff l(s t^-1) <= margin
  std::string provenance;

  bool fully_defined() const;
  /// The kernel when every interior pair was evaluable; otherwise throws
  /// TruncationError (margin exhaustion).
  Kernel dense() const;
};

/// u(s,t) = <delta_s, T(s t^-1) delta_t> over interior pairs whose
/// product stays within the margin.
InducedKernel induced_kernel(const CPMapSpec& map, const GroupBall& ball);

// ---------------------------------------------------------------------------
// Properties (i)-(iii) of the correspondence

struct PropertyIReport {
  ClassificationReport block;    // positivity of [T(s_i s_j^-1)] on the sum space
  ClassificationReport induced;  // positive definiteness of u on the sample
  bool verdict = false;
};

/// Builds the block matrix [T(s_i s_j^-1)] compressed to the interior
/// ball and eigenchecks it, alongside the scalar check of u on the
/// sample. Requires 2 max l(s_i) <= margin.
PropertyIReport verify_property_i(const CPMapSpec& map,
                                  const std::vector<Index>& sample,
                                  double tol = kDefaultTol);

struct PropertyIIReport {
  PropernessProfile profile;        // decay envelope of |u|
  std::vector<double> bound;        // sum_i ||f_i|| eps_i(r) per grid radius
  int max_width = 0;
  bool zero_beyond_width = false;   // M(r) = 0 exactly for r > max width
  bool bounded = false;             // M(r) <= bound(r) on the whole grid
  bool verdict = false;
};

/// Finite-rank maps only: the induced kernel must vanish (exactly, at
/// finite truncation) beyond the largest operator width.
PropertyIIReport verify_property_ii(const CPMapSpec& map);

struct ConvergenceRow {
  int k = 0;          // schedule position
  double radius = 0;  // R
  double sup_dev = 0; // sup over {d < R} of |u_k - 1|
  double op_dev = 0;  // max over l(g) < R of ||T_k(lambda_g) - lambda_g||
  bool bounded = false;  // sup_dev <= op_dev
};

/// One row per schedule entry at the given radius; asserts the paper
/// bound |u(s,t) - 1| <= ||T(s t^-1) - lambda_{s t^-1}|| rowwise.
std::vector<ConvergenceRow> verify_property_iii(
    const std::vector<CPMapSpec>& schedule, double radius);

}  // namespace coarsekit

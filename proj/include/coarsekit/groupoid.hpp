#pragma once

// Functions on the transformation groupoid of a group acting on its own
// Stone-Cech-style boundary, sampled on the dense orbit: the pullbacks
// alpha*(f)(x,t) = f(x, x t) and beta*(g)(s,t) = g(s, s^-1 t), the
// groupoid positive-definite / negative-type checks, and Haagerup
// certificates.

#include "coarsekit/roe.hpp"

namespace coarsekit {

/// phi(base x, arrow t), defined where x t stays enumerated.
class GroupoidKernel {
 public:
  GroupoidKernel() = default;
  GroupoidKernel(GroupBall ball, Eigen::MatrixXcd values, BoolMatrix defined);

  const GroupBall& ball() const { return ball_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  const BoolMatrix& defined() const { return defined_; }
  bool is_defined(Index base, Index arrow) const {
    return defined_(base, arrow);
  }
  /// Throws TruncationError when the pair is outside the margin-safe domain.
  Complex at(Index base, Index arrow) const;
  bool is_real() const;

 private:
  GroupBall ball_;
  Eigen::MatrixXcd values_;
  BoolMatrix defined_;
};

/// alpha*(f)(x,t) = f(x, x t); entries copied verbatim, so the pullback
/// is exact wherever x t is enumerated.
GroupoidKernel alpha_star(const Kernel& f, const GroupBall& ball);

struct MaskedKernel {
  Kernel kernel;
  BoolMatrix defined;
};

/// beta*(g)(s,t) = g(s, s^-1 t); the inverse pullback, defined where
/// s^-1 t is enumerated and g is defined there.
MaskedKernel beta_star(const GroupoidKernel& g);

struct GroupoidReport {
  ClassificationReport report;  // aggregated verdict over the sampled bases
  std::optional<Index> failing_base;
  std::vector<std::pair<Index, double>> per_base_extremal;
};

/// For each sampled base x, eigencheck of [phi(x s_i, s_i^-1 s_j)] over
/// the arrow sample; the verdict is the conjunction.
GroupoidReport check_groupoid_pd(const GroupoidKernel& phi,
                                 const std::vector<Index>& bases,
                                 const std::vector<Index>& arrows,
                                 double tol = kDefaultTol);

/// Conditions: (i) psi(x,e) = 0, (ii) psi(x s, s^-1 t) = psi(x t, t^-1 s),
/// (iii) the mean-zero quadratic form per base is nonpositive.
GroupoidReport check_groupoid_nt(const GroupoidKernel& psi,
                                 const std::vector<Index>& bases,
                                 const std::vector<Index>& arrows,
                                 double tol = kDefaultTol);

/// Bases: the whole interior ball. Arrows: lengths small enough that every
/// product appearing in the checks stays enumerated.
std::vector<Index> default_bases(const GroupBall& ball);
std::vector<Index> default_arrows(const GroupBall& ball);

/// Decay/growth envelopes in the arrow-length variable l(t), uniform over
/// the sampled bases.
struct ArrowProfile {
  std::vector<int> lengths;
  std::vector<double> lower;  // min |phi(x,t)| over l(t) >= l
  std::vector<double> upper;  // max |phi(x,t)| over l(t) >= l
};

ArrowProfile arrow_profile(const GroupoidKernel& phi,
                           const std::vector<Index>& bases);

struct HaagerupCertificate {
  GroupoidReport nt;
  ArrowProfile profile;
  std::vector<Index> sampled_bases;
  bool proper = false;  // lower envelope positive at the largest length
};

/// psi = alpha*(h) for a negative-type h; bundles the groupoid
/// negative-type verdict with the arrow-length properness profile.
/// A failed groupoid check contradicts preservation under alpha* and is
/// reported as an internal consistency failure.
HaagerupCertificate haagerup_certificate(const Kernel& h, const GroupBall& ball,
                                         double tol = kDefaultTol);

}  // namespace coarsekit

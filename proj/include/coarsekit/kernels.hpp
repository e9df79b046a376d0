#pragma once

// Kernels on X x X and the positive-definite / negative-type calculus:
// verification with witnesses, the exp(-t h) transform, approximate
// units off the diagonal, and the weighted-series synthesis of a proper
// negative-type kernel from an approximate unit.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "coarsekit/spaces.hpp"

namespace coarsekit {

using Complex = std::complex<double>;

inline constexpr double kDefaultTol = 1e-9;

class Kernel {
 public:
  Kernel() = default;
  Kernel(DiscreteMetricSpace space, Eigen::MatrixXcd values);

  static Kernel real(DiscreteMetricSpace space, Eigen::MatrixXd values);
  static Kernel constant(DiscreteMetricSpace space, double value);
  /// k(x,y) = d(x,y).
  static Kernel from_metric(DiscreteMetricSpace space);

  const DiscreteMetricSpace& space() const { return space_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  Index size() const { return values_.rows(); }
  bool is_real() const;
  /// Throws PreconditionError when any entry has a nonzero imaginary part.
  Eigen::MatrixXd real_values() const;

 private:
  DiscreteMetricSpace space_;
  Eigen::MatrixXcd values_;
};

// ---------------------------------------------------------------------------
// Classification reports

struct Witness {
  std::vector<Index> points;
  Eigen::VectorXcd coefficients;
};

struct ClassificationReport {
  std::string check;
  bool verdict = false;
  std::string detail;  // "ok" or the violated condition
  double extremal_eigenvalue = 0.0;
  double tolerance = 0.0;
  std::optional<Witness> witness;
};

struct KernelCheckError : Error {
  ClassificationReport report;
  KernelCheckError(const std::string& msg, ClassificationReport r);
};

/// Hermitian within tol, and min eigenvalue >= -tol * n * max|diag|.
/// On failure the witness is an eigenvector of the offending eigenvalue.
ClassificationReport check_positive_definite(const Kernel& k,
                                             double tol = kDefaultTol);

/// Real, zero diagonal, symmetric, and the quadratic form is <= 0 on
/// mean-zero coefficient vectors (checked by projecting onto the
/// mean-zero subspace and eigendecomposing).
ClassificationReport check_negative_type(const Kernel& h,
                                         double tol = kDefaultTol);

/// h negative type, t > 0  ->  exp(-t h), positive definite with unit
/// diagonal. Throws KernelCheckError when h fails the negative-type check.
Kernel schoenberg_transform(const Kernel& h, double t, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Properness / decay envelopes on the realized-distance grid

struct PropernessProfile {
  std::vector<double> radii;  // the space's realized distances
  std::vector<double> lower;  // m(r) = min{|k(x,y)| : d(x,y) >= r}
  std::vector<double> upper;  // M(r) = max{|k(x,y)| : d(x,y) >= r}

  /// Smallest realized r with M(r) <= eps, if any.
  std::optional<double> decay_radius(double eps) const;
  double lower_at(double r) const;
  double upper_at(double r) const;
};

PropernessProfile properness_profile(const Kernel& k);

// ---------------------------------------------------------------------------
// Approximate units for C0 off the diagonal

struct ApproximateUnit {
  std::vector<Kernel> members;
  std::vector<double> schedule;  // t per member when Schoenberg-built

  // Recorded tables (empirical, never assumed):
  std::vector<double> radius_grid;  // R values: positive realized distances
  // sup over {d < R} of |1 - u| per member and R
  std::vector<std::vector<double>> sup_off_unit;
  std::vector<double> eps_grid;
  // decay radius R(member, eps): min realized r with max_{d>=r}|u| <= eps;
  // NaN when unattained on this truncation
  std::vector<std::vector<double>> decay_radii;
  std::vector<Eigen::VectorXd> diagonals;

  /// Set when the family shows no decay at the coarsest eps: the family is
  /// flagged as not witnessing membership in C0 off the diagonal.
  bool c0_flagged = false;
};

std::vector<double> default_eps_grid();

/// Builds {exp(-t h)} along the schedule from a negative-type h and
/// records the decay/approach tables. The schedule must be positive and
/// strictly decreasing. h failing the negative-type check throws.
ApproximateUnit approximate_unit_from_proper(
    const Kernel& h, const std::vector<double>& t_schedule,
    std::vector<double> eps_grid = default_eps_grid(), double tol = kDefaultTol);

/// Wraps an existing family (for example kernels induced from a schedule
/// of maps) and records the same tables.
ApproximateUnit approximate_unit_from_members(
    std::vector<Kernel> members,
    std::vector<double> eps_grid = default_eps_grid());

struct SelectionError : Error {
  int failing_term = 0;
  SelectionError(const std::string& msg, int n);
};

struct AkemannWalterResult {
  Kernel kernel;
  std::vector<Index> selected;  // member index chosen for each term
};

/// Selects members lambda_1 < ... < lambda_N by the first index whose
/// sup over {d < n} of |1 - u| is <= 4^-n, then returns
///   h_N(x,y) = sum_n 2^n Re(1 - u_{lambda_n}(x,y))
/// after renormalizing each member to unit diagonal. The output has zero
/// diagonal, is symmetric and passes check_negative_type.
AkemannWalterResult akemann_walter_synthesize(const ApproximateUnit& au,
                                              int terms,
                                              double tol = kDefaultTol);

/// sup over pairs with d(x,y) < R of |1 - u(x,y)|.
double sup_off_unit_below(const Kernel& u, double R);

}  // namespace coarsekit

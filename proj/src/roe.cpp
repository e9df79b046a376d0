#include "coarsekit/roe.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace coarsekit {

BandOperator::BandOperator(GroupBall ball, SparseComplex values)
    : ball_(std::move(ball)), values_(std::move(values)) {
  const Index n = ball_.size();
  if (values_.rows() != n || values_.cols() != n) {
    throw PreconditionError("band operator: matrix shape does not match ball");
  }
  values_.prune([](Index, Index, const Complex& v) { return v != Complex(0.0, 0.0); });
  width_ = 0;
  bound_ = 0.0;
  for (Index col = 0; col < values_.outerSize(); ++col) {
    for (SparseComplex::InnerIterator it(values_, col); it; ++it) {
      width_ = std::max(width_, ball_.distance(it.row(), it.col()));
      bound_ = std::max(bound_, std::abs(it.value()));
    }
  }
}

BandOperator BandOperator::from_triplets(
    GroupBall ball, const std::vector<Eigen::Triplet<Complex>>& entries) {
  SparseComplex m(ball.size(), ball.size());
  m.setFromTriplets(entries.begin(), entries.end());
  return BandOperator(std::move(ball), std::move(m));
}

Eigen::MatrixXcd BandOperator::interior_block() const {
  const Index n = ball_.interior_size();
  return Eigen::MatrixXcd(values_.topLeftCorner(n, n));
}

double BandOperator::interior_norm() const {
  Eigen::MatrixXcd block = interior_block();
  if (block.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
  return svd.singularValues()(0);
}

BandOperator left_regular(const GroupBall& ball, Index t) {
  if (t < 0 || t >= ball.size()) {
    throw PreconditionError("left_regular: element index out of range");
  }
  if (ball.length(t) > ball.margin()) {
    std::ostringstream os;
    os << "left_regular: l(" << ball.label(t) << ") = " << ball.length(t)
       << " exceeds margin " << ball.margin();
    throw TruncationError(os.str());
  }
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(size_t(ball.size()));
  for (Index r = 0; r < ball.size(); ++r) {
    if (auto s = ball.product(t, r)) {
      trip.emplace_back(*s, r, Complex(1.0, 0.0));
    }
  }
  return BandOperator::from_triplets(ball, trip);
}

BandOperator band_compose(const BandOperator& a, const BandOperator& b) {
  if (!a.ball().same_as(b.ball())) {
    throw PreconditionError("band_compose: operators on different balls");
  }
  const int total = a.width() + b.width();
  if (total > a.ball().margin()) {
    const int shell = a.ball().radius() + a.ball().margin() - b.width();
    std::ostringstream os;
    os << "band_compose: widths " << a.width() << "+" << b.width()
       << " exceed margin " << a.ball().margin()
       << "; entries past the boundary shell l > " << shell
       << " would be truncated";
    throw TruncationError(os.str());
  }
  SparseComplex prod = a.values() * b.values();
  return BandOperator(a.ball(), std::move(prod));
}

BandOperator band_adjoint(const BandOperator& a) {
  SparseComplex adj = a.values().adjoint();
  return BandOperator(a.ball(), std::move(adj));
}

BandOperator band_add(const BandOperator& a, const BandOperator& b) {
  if (!a.ball().same_as(b.ball())) {
    throw PreconditionError("band_add: operators on different balls");
  }
  SparseComplex sum = a.values() + b.values();
  return BandOperator(a.ball(), std::move(sum));
}

BandOperator band_scale(const BandOperator& a, Complex factor) {
  SparseComplex scaled = a.values() * factor;
  return BandOperator(a.ball(), std::move(scaled));
}

// ---------------------------------------------------------------------------
// CP map specifications

double MatrixCoefficientFunctional::norm_bound() const {
  double acc = 0.0;
  for (const Term& t : terms) acc += std::abs(t.weight);
  return acc;
}

Complex MatrixCoefficientFunctional::operator()(const BandOperator& a) const {
  Complex acc(0.0, 0.0);
  for (const Term& t : terms) {
    if (t.row < 0 || t.row >= a.ball().size() || t.col < 0 ||
        t.col >= a.ball().size()) {
      throw PreconditionError(
          "matrix coefficient functional: point outside ball");
    }
    acc += t.weight * a.entry(t.row, t.col);
  }
  return acc;
}

CPMapSpec CPMapSpec::identity(GroupBall ball) {
  CPMapSpec spec;
  spec.type_ = Type::Identity;
  spec.ball_ = std::move(ball);
  return spec;
}

CPMapSpec CPMapSpec::schur_multiplier(GroupBall ball, Kernel k, double tol) {
  if (!k.space().same_as(ball.metric_space())) {
    throw PreconditionError(
        "schur_multiplier: kernel must live on the ball's full metric space");
  }
  ClassificationReport pd = check_positive_definite(k, tol);
  if (!pd.verdict) {
    throw KernelCheckError(
        "schur_multiplier: kernel is not positive definite", std::move(pd));
  }
  for (Index i = 0; i < k.size(); ++i) {
    if (std::abs(k.values()(i, i) - Complex(1.0, 0.0)) >
        tol * double(k.size())) {
      throw PreconditionError("schur_multiplier: kernel diagonal is not 1");
    }
  }
  CPMapSpec spec;
  spec.type_ = Type::SchurMultiplier;
  spec.ball_ = std::move(ball);
  spec.schur_kernel_ = std::move(k);
  return spec;
}

CPMapSpec CPMapSpec::finite_rank(GroupBall ball,
                                 std::vector<RankOneTerm> terms) {
  if (terms.empty()) {
    throw PreconditionError("finite_rank: term list must be nonempty");
  }
  for (const auto& [f, s] : terms) {
    if (f.terms.empty()) {
      throw PreconditionError("finite_rank: empty functional");
    }
    if (!s.ball().same_as(ball)) {
      throw PreconditionError("finite_rank: operator on a different ball");
    }
    for (const auto& t : f.terms) {
      if (t.row < 0 || t.row >= ball.size() || t.col < 0 ||
          t.col >= ball.size()) {
        throw PreconditionError("finite_rank: functional point outside ball");
      }
    }
  }
  CPMapSpec spec;
  spec.type_ = Type::FiniteRank;
  spec.ball_ = std::move(ball);
  spec.terms_ = std::move(terms);
  return spec;
}

const Kernel& CPMapSpec::schur_kernel() const {
  if (type_ != Type::SchurMultiplier) {
    throw PreconditionError("CPMapSpec: not a Schur multiplier");
  }
  return schur_kernel_;
}

const std::vector<CPMapSpec::RankOneTerm>& CPMapSpec::terms() const {
  if (type_ != Type::FiniteRank) {
    throw PreconditionError("CPMapSpec: not a finite-rank map");
  }
  return terms_;
}

int CPMapSpec::max_term_width() const {
  int w = 0;
  for (const auto& [f, s] : terms()) w = std::max(w, s.width());
  return w;
}

BandOperator apply_cp_map(const CPMapSpec& map, Index g) {
  const GroupBall& ball = map.ball();
  if (g < 0 || g >= ball.size()) {
    throw PreconditionError("apply_cp_map: element index out of range");
  }
  switch (map.type()) {
    case CPMapSpec::Type::Identity:
      return left_regular(ball, g);
    case CPMapSpec::Type::SchurMultiplier: {
      if (ball.length(g) > ball.margin()) {
        throw TruncationError("apply_cp_map: element outside margin");
      }
      const Eigen::MatrixXcd& k = map.schur_kernel().values();
      std::vector<Eigen::Triplet<Complex>> trip;
      trip.reserve(size_t(ball.size()));
      for (Index r = 0; r < ball.size(); ++r) {
        if (auto s = ball.product(g, r)) {
          trip.emplace_back(*s, r, k(*s, r));
        }
      }
      return BandOperator::from_triplets(ball, trip);
    }
    case CPMapSpec::Type::FiniteRank: {
      BandOperator lambda = left_regular(ball, g);
      SparseComplex acc(ball.size(), ball.size());
      for (const auto& [f, s] : map.terms()) {
        acc += f(lambda) * s.values();
      }
      return BandOperator(ball, std::move(acc));
    }
  }
  throw Error("apply_cp_map: unreachable");
}

// ---------------------------------------------------------------------------
// Induced kernels

bool InducedKernel::fully_defined() const {
  for (Index i = 0; i < defined.rows(); ++i) {
    for (Index j = 0; j < defined.cols(); ++j) {
      if (!defined(i, j)) return false;
    }
  }
  return true;
}

Kernel InducedKernel::dense() const {
  if (!fully_defined()) {
    throw TruncationError(
        "induced kernel: margin exhausted, some interior pairs have "
        "l(s t^-1) beyond the margin");
  }
  return kernel;
}

InducedKernel induced_kernel(const CPMapSpec& map, const GroupBall& ball) {
  if (!map.ball().same_as(ball)) {
    throw PreconditionError("induced_kernel: map lives on a different ball");
  }
  const Index n = ball.interior_size();
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(n, n);
  BoolMatrix defined = BoolMatrix::Constant(n, n, false);

  // Group evaluation pairs by g = s t^-1 so each T(g) is materialized once.
  std::map<Index, std::vector<std::pair<Index, Index>>> by_product;
  for (Index s = 0; s < n; ++s) {
    for (Index t = 0; t < n; ++t) {
      if (ball.distance(s, t) > ball.margin()) continue;
      auto g = ball.product(s, ball.inverse(t));
      if (!g) continue;
      by_product[*g].emplace_back(s, t);
    }
  }
  for (const auto& [g, pairs] : by_product) {
    BandOperator tg = apply_cp_map(map, g);
    for (const auto& [s, t] : pairs) {
      values(s, t) = tg.entry(s, t);
      defined(s, t) = true;
    }
  }
  InducedKernel out;
  out.kernel = Kernel(ball.interior_space(), std::move(values));
  out.defined = std::move(defined);
  switch (map.type()) {
    case CPMapSpec::Type::Identity:
      out.provenance = "identity";
      break;
    case CPMapSpec::Type::SchurMultiplier:
      out.provenance = "schur-multiplier";
      break;
    case CPMapSpec::Type::FiniteRank:
      out.provenance = "finite-rank";
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Property (i): UCP maps induce positive definite kernels

PropertyIReport verify_property_i(const CPMapSpec& map,
                                  const std::vector<Index>& sample,
                                  double tol) {
  if (!map.is_ucp()) {
    throw PreconditionError(
        "verify_property_i: only Identity and SchurMultiplier specs are "
        "certified unital completely positive");
  }
  const GroupBall& ball = map.ball();
  if (sample.empty()) {
    throw PreconditionError("verify_property_i: empty sample");
  }
  int lmax = 0;
  for (Index s : sample) {
    if (s < 0 || s >= ball.size()) {
      throw PreconditionError("verify_property_i: sample element outside ball");
    }
    lmax = std::max(lmax, ball.length(s));
  }
  if (2 * lmax > ball.margin()) {
    throw TruncationError(
        "verify_property_i: sample needs 2 max length <= margin");
  }

  const Index m = Index(sample.size());
  const Index nin = ball.interior_size();
  Eigen::MatrixXcd block(m * nin, m * nin);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      Index g = *ball.product(sample[size_t(i)],
                              ball.inverse(sample[size_t(j)]));
      BandOperator tg = apply_cp_map(map, g);
      block.block(i * nin, j * nin, nin, nin) = tg.interior_block();
    }
  }

  PropertyIReport out;
  {
    ClassificationReport rep;
    rep.check = "block-positivity";
    rep.tolerance = tol;
    Eigen::MatrixXcd herm = (block + block.adjoint()) / 2.0;
    double herm_dev = (block - block.adjoint()).cwiseAbs().maxCoeff() / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    rep.extremal_eigenvalue = es.eigenvalues()(0);
    double max_diag = 0.0;
    for (Index i = 0; i < herm.rows(); ++i) {
      max_diag = std::max(max_diag, std::abs(herm(i, i)));
    }
    const double threshold = tol * double(herm.rows()) * std::max(max_diag, 1.0);
    rep.verdict =
        herm_dev <= threshold && rep.extremal_eigenvalue >= -threshold;
    rep.detail = rep.verdict ? "ok" : "block matrix not positive";
    out.block = std::move(rep);
  }

  InducedKernel u = induced_kernel(map, ball);
  std::vector<Index> sample_in_interior;
  for (Index s : sample) {
    if (s >= ball.interior_size()) {
      throw TruncationError(
          "verify_property_i: sample element outside the interior ball");
    }
    sample_in_interior.push_back(s);
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (!u.defined(sample_in_interior[size_t(i)],
                     sample_in_interior[size_t(j)])) {
        throw TruncationError("verify_property_i: induced pair undefined");
      }
    }
  }
  Eigen::MatrixXcd usub(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      usub(i, j) = u.kernel.values()(sample_in_interior[size_t(i)],
                                     sample_in_interior[size_t(j)]);
    }
  }
  DiscreteMetricSpace subspace =
      ball.interior_space().subspace(sample_in_interior);
  out.induced = check_positive_definite(Kernel(subspace, usub), tol);
  out.verdict = out.block.verdict && out.induced.verdict;
  return out;
}

// ---------------------------------------------------------------------------
// Property (ii): finite rank forces decay off the diagonal

PropertyIIReport verify_property_ii(const CPMapSpec& map) {
  if (map.type() != CPMapSpec::Type::FiniteRank) {
    throw PreconditionError("verify_property_ii: finite-rank maps only");
  }
  const GroupBall& ball = map.ball();
  InducedKernel u = induced_kernel(map, ball);

  PropertyIIReport out;
  out.max_width = map.max_term_width();

  // Envelope of |u| restricted to evaluated pairs.
  const DiscreteMetricSpace space = ball.interior_space();
  std::vector<double> grid;
  for (double r : space.distance_grid()) {
    if (r <= ball.margin()) grid.push_back(r);
  }
  out.profile.radii = grid;
  out.profile.lower.assign(grid.size(),
                           std::numeric_limits<double>::infinity());
  out.profile.upper.assign(grid.size(), 0.0);
  std::vector<double> bucket_min(grid.size(),
                                 std::numeric_limits<double>::infinity());
  std::vector<double> bucket_max(grid.size(), 0.0);
  for (Index i = 0; i < space.size(); ++i) {
    for (Index j = 0; j < space.size(); ++j) {
      if (!u.defined(i, j)) continue;
      const double d = space.distance(i, j);
      auto it = std::upper_bound(grid.begin(), grid.end(), d);
      size_t b = size_t(std::distance(grid.begin(), it)) - 1;
      const double v = std::abs(u.kernel.values()(i, j));
      bucket_min[b] = std::min(bucket_min[b], v);
      bucket_max[b] = std::max(bucket_max[b], v);
    }
  }
  double running_min = std::numeric_limits<double>::infinity();
  double running_max = 0.0;
  for (size_t b = grid.size(); b-- > 0;) {
    running_min = std::min(running_min, bucket_min[b]);
    running_max = std::max(running_max, bucket_max[b]);
    out.profile.lower[b] = running_min;
    out.profile.upper[b] = running_max;
  }

  // Per-term entry envelopes eps_i(r) against the functional norm bounds.
  std::vector<PropernessProfile> term_profiles;
  std::vector<double> term_norms;
  for (const auto& [f, s] : map.terms()) {
    Eigen::MatrixXcd dense(s.values());
    term_profiles.push_back(
        properness_profile(Kernel(ball.metric_space(), dense)));
    term_norms.push_back(f.norm_bound());
  }
  out.bound.assign(grid.size(), 0.0);
  for (size_t b = 0; b < grid.size(); ++b) {
    double acc = 0.0;
    for (size_t i = 0; i < term_profiles.size(); ++i) {
      acc += term_norms[i] * term_profiles[i].upper_at(grid[b]);
    }
    out.bound[b] = acc;
  }

  out.zero_beyond_width = true;
  out.bounded = true;
  for (size_t b = 0; b < grid.size(); ++b) {
    if (grid[b] > out.max_width && out.profile.upper[b] != 0.0) {
      out.zero_beyond_width = false;
    }
    if (out.profile.upper[b] > out.bound[b] * (1.0 + 1e-12) + 1e-300) {
      out.bounded = false;
    }
  }
  out.verdict = out.zero_beyond_width && out.bounded;
  return out;
}

// ---------------------------------------------------------------------------
// Property (iii): pointwise convergence dominates kernel convergence

std::vector<ConvergenceRow> verify_property_iii(
    const std::vector<CPMapSpec>& schedule, double radius) {
  if (schedule.empty()) {
    throw PreconditionError("verify_property_iii: empty schedule");
  }
  const GroupBall& ball = schedule.front().ball();
  if (radius - 1.0 > double(ball.margin())) {
    throw TruncationError(
        "verify_property_iii: radius exceeds what the margin can evaluate");
  }
  std::vector<Index> small_elements;
  for (Index g = 0; g < ball.size(); ++g) {
    if (double(ball.length(g)) < radius) small_elements.push_back(g);
  }
  std::vector<ConvergenceRow> rows;
  int k = 0;
  for (const CPMapSpec& map : schedule) {
    if (!map.ball().same_as(ball)) {
      throw PreconditionError(
          "verify_property_iii: schedule maps on different balls");
    }
    ConvergenceRow row;
    row.k = ++k;
    row.radius = radius;

    InducedKernel u = induced_kernel(map, ball);
    const DiscreteMetricSpace space = ball.interior_space();
    double sup = 0.0;
    for (Index s = 0; s < space.size(); ++s) {
      for (Index t = 0; t < space.size(); ++t) {
        if (space.distance(s, t) < radius) {
          if (!u.defined(s, t)) {
            throw TruncationError(
                "verify_property_iii: pair below radius not evaluable");
          }
          sup = std::max(sup,
                         std::abs(Complex(1.0, 0.0) - u.kernel.values()(s, t)));
        }
      }
    }
    row.sup_dev = sup;

    double dev = 0.0;
    for (Index g : small_elements) {
      BandOperator tg = apply_cp_map(map, g);
      BandOperator lg = left_regular(ball, g);
      Eigen::MatrixXcd diff = tg.interior_block() - lg.interior_block();
      if (diff.rows() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(diff);
        dev = std::max(dev, svd.singularValues()(0));
      }
    }
    row.op_dev = dev;
    row.bounded = row.sup_dev <= row.op_dev * (1.0 + 1e-12) + 1e-300;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace coarsekit

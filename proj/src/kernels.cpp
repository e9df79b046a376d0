#include "coarsekit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coarsekit {

Kernel::Kernel(DiscreteMetricSpace space, Eigen::MatrixXcd values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() != space_.size()) {
    throw PreconditionError("kernel: value matrix shape does not match space");
  }
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      if (!std::isfinite(values_(i, j).real()) ||
          !std::isfinite(values_(i, j).imag())) {
        throw PreconditionError("kernel: non-finite entry");
      }
    }
  }
}

Kernel Kernel::real(DiscreteMetricSpace space, Eigen::MatrixXd values) {
  return Kernel(std::move(space), values.cast<Complex>());
}

Kernel Kernel::constant(DiscreteMetricSpace space, double value) {
  const Index n = space.size();
  return Kernel(std::move(space),
                Eigen::MatrixXcd::Constant(n, n, Complex(value, 0.0)));
}

Kernel Kernel::from_metric(DiscreteMetricSpace space) {
  Eigen::MatrixXd d = space.d();
  return Kernel(std::move(space), d.cast<Complex>());
}

bool Kernel::is_real() const {
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      if (values_(i, j).imag() != 0.0) return false;
    }
  }
  return true;
}

Eigen::MatrixXd Kernel::real_values() const {
  if (!is_real()) {
    throw PreconditionError("kernel: complex-valued where real required");
  }
  return values_.real();
}

KernelCheckError::KernelCheckError(const std::string& msg,
                                   ClassificationReport r)
    : Error(msg + " [" + r.check + ": " + r.detail + "]"),
      report(std::move(r)) {}

// ---------------------------------------------------------------------------
// check_positive_definite

ClassificationReport check_positive_definite(const Kernel& k, double tol) {
  if (tol < 0) throw PreconditionError("check: tolerance must be >= 0");
  ClassificationReport rep;
  rep.check = "positive-definite";
  rep.tolerance = tol;
  const Eigen::MatrixXcd& a = k.values();
  const Index n = a.rows();
  if (n == 0) {
    rep.verdict = true;
    rep.detail = "ok";
    return rep;
  }

  const double max_abs = a.cwiseAbs().maxCoeff();
  double max_diag = 0.0;
  for (Index i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));

  // Hermitian part test.
  double herm_dev = 0.0;
  Index hi = 0, hj = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double dev = std::abs(a(i, j) - std::conj(a(j, i)));
      if (dev > herm_dev) {
        herm_dev = dev;
        hi = i;
        hj = j;
      }
    }
  }
  if (herm_dev > tol * double(n) * std::max(max_abs, 1.0)) {
    rep.verdict = false;
    rep.detail = "not hermitian";
    rep.extremal_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    Witness w;
    w.points = {hi, hj};
    rep.witness = std::move(w);
    return rep;
  }

  const double threshold = tol * double(n) * max_diag;
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXcd bottom_vector;
  if (k.is_real()) {
    Eigen::MatrixXd h = (a.real() + a.real().transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    eigenvalues = es.eigenvalues();
    bottom_vector = es.eigenvectors().col(0).cast<Complex>();
  } else {
    Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    eigenvalues = es.eigenvalues();
    bottom_vector = es.eigenvectors().col(0);
  }
  rep.extremal_eigenvalue = eigenvalues(0);
  if (eigenvalues(0) >= -threshold) {
    rep.verdict = true;
    rep.detail = "ok";
  } else {
    rep.verdict = false;
    rep.detail = "negative eigenvalue";
    Witness w;
    w.points.resize(size_t(n));
    for (Index i = 0; i < n; ++i) w.points[size_t(i)] = i;
    w.coefficients = bottom_vector;
    rep.witness = std::move(w);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// check_negative_type

ClassificationReport check_negative_type(const Kernel& h, double tol) {
  if (tol < 0) throw PreconditionError("check: tolerance must be >= 0");
  ClassificationReport rep;
  rep.check = "negative-type";
  rep.tolerance = tol;
  Eigen::MatrixXd m = h.real_values();  // throws on complex input
  const Index n = m.rows();
  if (n == 0) {
    rep.verdict = true;
    rep.detail = "ok";
    return rep;
  }
  const double scale = m.cwiseAbs().maxCoeff();

  // (i) zero diagonal
  for (Index i = 0; i < n; ++i) {
    if (std::abs(m(i, i)) > tol * std::max(scale, 1.0)) {
      rep.verdict = false;
      rep.detail = "nonzero diagonal";
      rep.extremal_eigenvalue = m(i, i);
      Witness w;
      w.points = {i};
      rep.witness = std::move(w);
      return rep;
    }
  }
  // (ii) symmetry
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol * std::max(scale, 1.0)) {
        rep.verdict = false;
        rep.detail = "not symmetric";
        rep.extremal_eigenvalue = m(i, j) - m(j, i);
        Witness w;
        w.points = {i, j};
        rep.witness = std::move(w);
        return rep;
      }
    }
  }
  // (iii) quadratic form on mean-zero vectors: max eig of P H P <= tol n s
  Eigen::MatrixXd sym = (m + m.transpose()) / 2.0;
  Eigen::MatrixXd p =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  Eigen::MatrixXd php = p * sym * p;
  php = (php + php.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(php);
  const double top = es.eigenvalues()(n - 1);
  rep.extremal_eigenvalue = top;
  if (top <= tol * double(n) * scale) {
    rep.verdict = true;
    rep.detail = "ok";
  } else {
    rep.verdict = false;
    rep.detail = "positive quadratic form on mean-zero vector";
    Eigen::VectorXd a = es.eigenvectors().col(n - 1);
    a.array() -= a.mean();  // exactly mean-zero up to rounding
    Witness w;
    w.points.resize(size_t(n));
    for (Index i = 0; i < n; ++i) w.points[size_t(i)] = i;
    w.coefficients = a.cast<Complex>();
    rep.witness = std::move(w);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Schoenberg transform

Kernel schoenberg_transform(const Kernel& h, double t, double tol) {
  if (t <= 0) throw PreconditionError("schoenberg_transform: t must be > 0");
  ClassificationReport nt = check_negative_type(h, tol);
  if (!nt.verdict) {
    throw KernelCheckError("schoenberg_transform: input is not negative type",
                           std::move(nt));
  }
  Eigen::MatrixXd m = h.real_values();
  const Index n = m.rows();
  Eigen::MatrixXcd out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      out(i, j) = Complex(i == j ? 1.0 : std::exp(-t * m(i, j)), 0.0);
    }
  }
  return Kernel(h.space(), std::move(out));
}

// ---------------------------------------------------------------------------
// Properness profile

PropernessProfile properness_profile(const Kernel& k) {
  PropernessProfile out;
  const DiscreteMetricSpace& space = k.space();
  out.radii = space.distance_grid();
  const size_t g = out.radii.size();
  out.lower.assign(g, std::numeric_limits<double>::infinity());
  out.upper.assign(g, 0.0);
  const Index n = k.size();
  // One pass: bucket each pair into the largest grid radius <= d, then
  // sweep from the far end so entry r aggregates all pairs with d >= r.
  std::vector<double> bucket_min(g, std::numeric_limits<double>::infinity());
  std::vector<double> bucket_max(g, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double d = space.distance(i, j);
      auto it = std::upper_bound(out.radii.begin(), out.radii.end(), d);
      size_t b = size_t(std::distance(out.radii.begin(), it)) - 1;
      const double v = std::abs(k.values()(i, j));
      bucket_min[b] = std::min(bucket_min[b], v);
      bucket_max[b] = std::max(bucket_max[b], v);
    }
  }
  double running_min = std::numeric_limits<double>::infinity();
  double running_max = 0.0;
  for (size_t b = g; b-- > 0;) {
    running_min = std::min(running_min, bucket_min[b]);
    running_max = std::max(running_max, bucket_max[b]);
    out.lower[b] = running_min;
    out.upper[b] = running_max;
  }
  return out;
}

std::optional<double> PropernessProfile::decay_radius(double eps) const {
  for (size_t i = 0; i < radii.size(); ++i) {
    if (upper[i] <= eps) return radii[i];
  }
  return std::nullopt;
}

double PropernessProfile::lower_at(double r) const {
  // min over d >= r equals the table entry at the smallest grid radius >= r.
  auto it = std::lower_bound(radii.begin(), radii.end(), r);
  if (it == radii.end()) return std::numeric_limits<double>::infinity();
  return lower[size_t(std::distance(radii.begin(), it))];
}

double PropernessProfile::upper_at(double r) const {
  auto it = std::lower_bound(radii.begin(), radii.end(), r);
  if (it == radii.end()) return 0.0;
  return upper[size_t(std::distance(radii.begin(), it))];
}

// ---------------------------------------------------------------------------
// Approximate units

std::vector<double> default_eps_grid() {
  return {0.5, 0.1, 0.01, 1e-3, 1e-4, 1e-5};
}

double sup_off_unit_below(const Kernel& u, double R) {
  const DiscreteMetricSpace& space = u.space();
  const Index n = u.size();
  double sup = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (space.distance(i, j) < R) {
        sup = std::max(sup, std::abs(Complex(1.0, 0.0) - u.values()(i, j)));
      }
    }
  }
  return sup;
}

namespace {

void record_tables(ApproximateUnit& au) {
  if (au.members.empty()) return;
  const DiscreteMetricSpace& space = au.members.front().space();
  au.radius_grid.clear();
  for (double r : space.distance_grid()) {
    if (r > 0) au.radius_grid.push_back(r);
  }
  au.radius_grid.push_back(space.max_distance() + 1.0);
  au.sup_off_unit.clear();
  au.decay_radii.clear();
  au.diagonals.clear();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Kernel& u : au.members) {
    if (!u.space().same_as(space)) {
      throw PreconditionError("approximate unit: members on different spaces");
    }
    std::vector<double> sups;
    for (double r : au.radius_grid) sups.push_back(sup_off_unit_below(u, r));
    au.sup_off_unit.push_back(std::move(sups));
    PropernessProfile prof = properness_profile(u);
    std::vector<double> radii;
    for (double eps : au.eps_grid) {
      auto r = prof.decay_radius(eps);
      radii.push_back(r ? *r : nan);
    }
    au.decay_radii.push_back(std::move(radii));
    au.diagonals.push_back(u.values().diagonal().real());
  }
  // Flag families with no visible decay at the coarsest eps.
  double eps_max = *std::max_element(au.eps_grid.begin(), au.eps_grid.end());
  bool any_decay = false;
  for (const Kernel& u : au.members) {
    PropernessProfile prof = properness_profile(u);
    if (prof.decay_radius(eps_max)) {
      any_decay = true;
      break;
    }
  }
  if (!any_decay) au.c0_flagged = true;
}

}  // namespace

ApproximateUnit approximate_unit_from_proper(
    const Kernel& h, const std::vector<double>& t_schedule,
    std::vector<double> eps_grid, double tol) {
  if (t_schedule.empty()) {
    throw PreconditionError("approximate_unit_from_proper: empty schedule");
  }
  for (size_t i = 0; i < t_schedule.size(); ++i) {
    if (t_schedule[i] <= 0) {
      throw PreconditionError("approximate_unit_from_proper: t must be > 0");
    }
    if (i > 0 && t_schedule[i] >= t_schedule[i - 1]) {
      throw PreconditionError(
          "approximate_unit_from_proper: schedule must be strictly decreasing");
    }
  }
  ClassificationReport nt = check_negative_type(h, tol);
  if (!nt.verdict) {
    throw KernelCheckError(
        "approximate_unit_from_proper: input is not negative type",
        std::move(nt));
  }
  ApproximateUnit au;
  au.eps_grid = std::move(eps_grid);
  au.schedule = t_schedule;
  for (double t : t_schedule) {
    au.members.push_back(schoenberg_transform(h, t, tol));
  }
  record_tables(au);
  // A base kernel without a strictly positive far-field cannot decay.
  PropernessProfile base = properness_profile(h);
  if (!base.lower.empty() && base.lower.back() <= 0.0 && h.size() > 1) {
    au.c0_flagged = true;
  }
  return au;
}

ApproximateUnit approximate_unit_from_members(std::vector<Kernel> members,
                                              std::vector<double> eps_grid) {
  if (members.empty()) {
    throw PreconditionError("approximate unit: no members");
  }
  ApproximateUnit au;
  au.eps_grid = std::move(eps_grid);
  au.members = std::move(members);
  record_tables(au);
  return au;
}

// ---------------------------------------------------------------------------
// Akemann-Walter synthesis

SelectionError::SelectionError(const std::string& msg, int n)
    : Error(msg), failing_term(n) {}

namespace {

// u(x,y) / sqrt(u(x,x) u(y,y)) with the diagonal forced to exactly 1.
Eigen::MatrixXcd renormalize_unit_diagonal(const Eigen::MatrixXcd& u) {
  const Index n = u.rows();
  Eigen::VectorXd diag(n);
  for (Index i = 0; i < n; ++i) {
    diag(i) = u(i, i).real();
    if (diag(i) < 1e-12) {
      throw PreconditionError(
          "akemann_walter_synthesize: member diagonal entry below 1e-12, "
          "cannot renormalize");
    }
  }
  Eigen::MatrixXcd out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      out(i, j) = i == j ? Complex(1.0, 0.0)
                         : u(i, j) / std::sqrt(diag(i) * diag(j));
    }
  }
  return out;
}

}  // namespace

AkemannWalterResult akemann_walter_synthesize(const ApproximateUnit& au,
                                              int terms, double tol) {
  if (terms < 1) {
    throw PreconditionError("akemann_walter_synthesize: terms must be >= 1");
  }
  if (au.members.empty()) {
    throw PreconditionError("akemann_walter_synthesize: empty family");
  }
  const DiscreteMetricSpace& space = au.members.front().space();
  const Index n = space.size();

  std::vector<Eigen::MatrixXcd> unit;
  unit.reserve(au.members.size());
  for (size_t i = 0; i < au.members.size(); ++i) {
    ClassificationReport pd = check_positive_definite(au.members[i], tol);
    if (!pd.verdict) {
      throw KernelCheckError(
          "akemann_walter_synthesize: member " + std::to_string(i) +
              " is not positive definite",
          std::move(pd));
    }
    unit.push_back(renormalize_unit_diagonal(au.members[i].values()));
  }

  std::vector<Index> selected;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  Index prev = -1;
  for (int term = 1; term <= terms; ++term) {
    const double target = std::pow(4.0, -term);
    Index chosen = -1;
    for (Index cand = prev + 1; cand < Index(unit.size()); ++cand) {
      Kernel u(space, unit[size_t(cand)]);
      if (sup_off_unit_below(u, double(term)) <= target) {
        chosen = cand;
        break;
      }
    }
    if (chosen < 0) {
      throw SelectionError(
          "akemann_walter_synthesize: no member satisfies the 4^-n rule at "
          "term " + std::to_string(term),
          term);
    }
    selected.push_back(chosen);
    prev = chosen;
    const double weight = std::pow(2.0, term);
    const Eigen::MatrixXcd& u = unit[size_t(chosen)];
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        // Re(1-u) of the hermitian part keeps the sum exactly symmetric.
        double re = 1.0 - (u(i, j).real() + u(j, i).real()) / 2.0;
        if (i == j) re = 0.0;
        h(i, j) += weight * re;
      }
    }
  }
  AkemannWalterResult out;
  out.kernel = Kernel::real(space, std::move(h));
  out.selected = std::move(selected);
  return out;
}

}  // namespace coarsekit

#include "coarsekit/groupoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace coarsekit {

GroupoidKernel::GroupoidKernel(GroupBall ball, Eigen::MatrixXcd values,
                               BoolMatrix defined)
    : ball_(std::move(ball)),
      values_(std::move(values)),
      defined_(std::move(defined)) {
  const Index n = ball_.size();
  if (values_.rows() != n || values_.cols() != n || defined_.rows() != n ||
      defined_.cols() != n) {
    throw PreconditionError("groupoid kernel: shape does not match ball");
  }
}

Complex GroupoidKernel::at(Index base, Index arrow) const {
  if (!defined_(base, arrow)) {
    throw TruncationError("groupoid kernel: pair outside margin-safe domain");
  }
  return values_(base, arrow);
}

bool GroupoidKernel::is_real() const {
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      if (defined_(i, j) && values_(i, j).imag() != 0.0) return false;
    }
  }
  return true;
}

GroupoidKernel alpha_star(const Kernel& f, const GroupBall& ball) {
  if (!f.space().same_as(ball.metric_space())) {
    throw PreconditionError(
        "alpha_star: kernel must live on the ball's full metric space");
  }
  const Index n = ball.size();
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(n, n);
  BoolMatrix defined = BoolMatrix::Constant(n, n, false);
  for (Index x = 0; x < n; ++x) {
    for (Index t = 0; t < n; ++t) {
      if (auto xt = ball.product(x, t)) {
        values(x, t) = f.values()(x, *xt);
        defined(x, t) = true;
      }
    }
  }
  return GroupoidKernel(ball, std::move(values), std::move(defined));
}

MaskedKernel beta_star(const GroupoidKernel& g) {
  const GroupBall& ball = g.ball();
  const Index n = ball.size();
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(n, n);
  BoolMatrix defined = BoolMatrix::Constant(n, n, false);
  for (Index s = 0; s < n; ++s) {
    const Index sinv = ball.inverse(s);
    for (Index t = 0; t < n; ++t) {
      if (auto arrow = ball.product(sinv, t)) {
        if (g.is_defined(s, *arrow)) {
          values(s, t) = g.values()(s, *arrow);
          defined(s, t) = true;
        }
      }
    }
  }
  MaskedKernel out;
  out.kernel = Kernel(ball.metric_space(), std::move(values));
  out.defined = std::move(defined);
  return out;
}

// ---------------------------------------------------------------------------
// Sampled checks

namespace {

void validate_samples(const GroupBall& ball, const std::vector<Index>& bases,
                      const std::vector<Index>& arrows) {
  if (bases.empty() || arrows.empty()) {
    throw PreconditionError("groupoid check: empty base or arrow sample");
  }
  for (Index x : bases) {
    if (x < 0 || x >= ball.size()) {
      throw PreconditionError("groupoid check: base outside ball");
    }
  }
  for (Index s : arrows) {
    if (s < 0 || s >= ball.size()) {
      throw PreconditionError("groupoid check: arrow outside ball");
    }
  }
}

// The matrix [phi(x s_i, s_i^-1 s_j)] for one base; throws TruncationError
// when a needed product leaves the enumerated set.
Eigen::MatrixXcd base_matrix(const GroupoidKernel& phi,
                             const std::vector<Index>& arrows, Index x) {
  const GroupBall& ball = phi.ball();
  const Index m = Index(arrows.size());
  Eigen::MatrixXcd out(m, m);
  for (Index i = 0; i < m; ++i) {
    auto xs = ball.product(x, arrows[size_t(i)]);
    if (!xs) {
      throw TruncationError("groupoid check: base translate leaves the ball");
    }
    const Index si_inv = ball.inverse(arrows[size_t(i)]);
    for (Index j = 0; j < m; ++j) {
      auto arrow = ball.product(si_inv, arrows[size_t(j)]);
      if (!arrow) {
        throw TruncationError("groupoid check: arrow product leaves the ball");
      }
      out(i, j) = phi.at(*xs, *arrow);
    }
  }
  return out;
}

}  // namespace

std::vector<Index> default_bases(const GroupBall& ball) {
  std::vector<Index> out;
  for (Index x = 0; x < ball.interior_size(); ++x) out.push_back(x);
  return out;
}

std::vector<Index> default_arrows(const GroupBall& ball) {
  // Constraints for every check: l(x s) <= N+W needs l(s) <= W for interior
  // bases; l(s^-1 t) <= N+W needs 2 l <= N+W.
  const int cap =
      std::min(ball.margin(), (ball.radius() + ball.margin()) / 2);
  std::vector<Index> out;
  for (Index s = 0; s < ball.size(); ++s) {
    if (ball.length(s) <= cap) out.push_back(s);
  }
  return out;
}

GroupoidReport check_groupoid_pd(const GroupoidKernel& phi,
                                 const std::vector<Index>& bases,
                                 const std::vector<Index>& arrows,
                                 double tol) {
  validate_samples(phi.ball(), bases, arrows);
  GroupoidReport out;
  out.report.check = "groupoid-positive-definite";
  out.report.tolerance = tol;
  out.report.verdict = true;
  out.report.detail = "ok";
  double extremal = std::numeric_limits<double>::infinity();
  DiscreteMetricSpace stub = phi.ball().metric_space().subspace(arrows);
  for (Index x : bases) {
    Eigen::MatrixXcd m = base_matrix(phi, arrows, x);
    ClassificationReport rep =
        check_positive_definite(Kernel(stub, std::move(m)), tol);
    out.per_base_extremal.emplace_back(x, rep.extremal_eigenvalue);
    if (std::isfinite(rep.extremal_eigenvalue)) {
      extremal = std::min(extremal, rep.extremal_eigenvalue);
    }
    if (!rep.verdict && out.report.verdict) {
      out.report.verdict = false;
      out.report.detail =
          "base " + phi.ball().label(x) + ": " + rep.detail;
      out.failing_base = x;
      out.report.witness = rep.witness;
    }
  }
  out.report.extremal_eigenvalue =
      std::isfinite(extremal) ? extremal : 0.0;
  return out;
}

GroupoidReport check_groupoid_nt(const GroupoidKernel& psi,
                                 const std::vector<Index>& bases,
                                 const std::vector<Index>& arrows,
                                 double tol) {
  const GroupBall& ball = psi.ball();
  validate_samples(ball, bases, arrows);
  if (!psi.is_real()) {
    throw PreconditionError("check_groupoid_nt: complex-valued input");
  }
  GroupoidReport out;
  out.report.check = "groupoid-negative-type";
  out.report.tolerance = tol;
  out.report.verdict = true;
  out.report.detail = "ok";

  double scale = 0.0;
  for (Index i = 0; i < ball.size(); ++i) {
    for (Index j = 0; j < ball.size(); ++j) {
      if (psi.defined()(i, j)) {
        scale = std::max(scale, std::abs(psi.values()(i, j)));
      }
    }
  }
  const double thr = tol * std::max(scale, 1.0);

  // (i) psi(x, e) = 0
  for (Index x : bases) {
    const double v = std::abs(psi.at(x, ball.identity()));
    if (v > thr) {
      out.report.verdict = false;
      out.report.detail = "psi(x,e) != 0 at base " + ball.label(x);
      out.report.extremal_eigenvalue = v;
      out.failing_base = x;
      return out;
    }
  }
  // (ii) psi(x s, s^-1 t) = psi(x t, t^-1 s)
  for (Index x : bases) {
    for (Index s : arrows) {
      for (Index t : arrows) {
        auto xs = ball.product(x, s);
        auto xt = ball.product(x, t);
        auto st = ball.product(ball.inverse(s), t);
        auto ts = ball.product(ball.inverse(t), s);
        if (!xs || !xt || !st || !ts) {
          throw TruncationError(
              "check_groupoid_nt: symmetry sample leaves the ball");
        }
        const double dev =
            std::abs(psi.at(*xs, *st) - psi.at(*xt, *ts));
        if (dev > thr) {
          out.report.verdict = false;
          out.report.detail = "symmetry fails at base " + ball.label(x) +
                              ", arrows (" + ball.label(s) + ", " +
                              ball.label(t) + ")";
          out.report.extremal_eigenvalue = dev;
          out.failing_base = x;
          return out;
        }
      }
    }
  }
  // (iii) per-base quadratic form on mean-zero vectors
  double extremal = -std::numeric_limits<double>::infinity();
  DiscreteMetricSpace stub = ball.metric_space().subspace(arrows);
  for (Index x : bases) {
    Eigen::MatrixXcd m = base_matrix(psi, arrows, x);
    // The base matrix of a groupoid NT candidate has zero diagonal by (i)
    // applied at the translated bases; run the scalar NT check on it.
    ClassificationReport rep =
        check_negative_type(Kernel(stub, std::move(m)), tol);
    out.per_base_extremal.emplace_back(x, rep.extremal_eigenvalue);
    extremal = std::max(extremal, rep.extremal_eigenvalue);
    if (!rep.verdict && out.report.verdict) {
      out.report.verdict = false;
      out.report.detail = "base " + ball.label(x) + ": " + rep.detail;
      out.failing_base = x;
      out.report.witness = rep.witness;
    }
  }
  if (std::isfinite(extremal)) out.report.extremal_eigenvalue = extremal;
  return out;
}

// ---------------------------------------------------------------------------
// Arrow-length profiles and Haagerup certificates

ArrowProfile arrow_profile(const GroupoidKernel& phi,
                           const std::vector<Index>& bases) {
  const GroupBall& ball = phi.ball();
  std::set<int> lengths;
  for (Index t = 0; t < ball.size(); ++t) lengths.insert(ball.length(t));
  ArrowProfile out;
  out.lengths.assign(lengths.begin(), lengths.end());
  const size_t g = out.lengths.size();
  std::vector<double> bucket_min(g, std::numeric_limits<double>::infinity());
  std::vector<double> bucket_max(g, 0.0);
  for (Index x : bases) {
    for (Index t = 0; t < ball.size(); ++t) {
      if (!phi.is_defined(x, t)) continue;
      const int l = ball.length(t);
      size_t b = size_t(std::distance(
          out.lengths.begin(),
          std::lower_bound(out.lengths.begin(), out.lengths.end(), l)));
      const double v = std::abs(phi.values()(x, t));
      bucket_min[b] = std::min(bucket_min[b], v);
      bucket_max[b] = std::max(bucket_max[b], v);
    }
  }
  out.lower.assign(g, std::numeric_limits<double>::infinity());
  out.upper.assign(g, 0.0);
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

HaagerupCertificate haagerup_certificate(const Kernel& h, const GroupBall& ball,
                                         double tol) {
  ClassificationReport nt = check_negative_type(h, tol);
  if (!nt.verdict) {
    throw KernelCheckError("haagerup_certificate: input is not negative type",
                           std::move(nt));
  }
  GroupoidKernel psi = alpha_star(h, ball);
  HaagerupCertificate cert;
  cert.sampled_bases = default_bases(ball);
  cert.nt = check_groupoid_nt(psi, cert.sampled_bases, default_arrows(ball),
                              tol);
  if (!cert.nt.report.verdict) {
    // alpha* preserves negative type; reaching this contradicts the
    // scalar check above.
    throw Error(
        "haagerup_certificate: internal consistency failure, alpha*(h) "
        "failed the groupoid negative-type check (" +
        cert.nt.report.detail + ")");
  }
  cert.profile = arrow_profile(psi, cert.sampled_bases);
  cert.proper = !cert.profile.lower.empty() &&
                cert.profile.lower.back() > 0.0;
  return cert;
}

}  // namespace coarsekit

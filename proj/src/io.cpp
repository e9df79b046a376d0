#include "coarsekit/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace coarsekit::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

double as_number(const json& j, const char* what) {
  if (!j.is_number()) fail(std::string("expected number for ") + what);
  return j.get<double>();
}

Complex as_complex(const json& j, const char* what) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  fail(std::string("expected real number or [re,im] for ") + what);
}

json complex_to_json(const Complex& v) {
  if (v.imag() == 0.0) return json(v.real());
  return json::array({v.real(), v.imag()});
}

Eigen::MatrixXcd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(std::string("expected matrix for ") + what);
  const Index n = Index(j.size());
  Eigen::MatrixXcd m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = j[size_t(i)];
    if (!row.is_array() || Index(row.size()) != n) {
      fail(std::string("matrix rows must all have the outer length in ") +
           what);
    }
    for (Index c = 0; c < n; ++c) {
      m(i, c) = as_complex(row[size_t(c)], what);
    }
  }
  return m;
}

}  // namespace

LoadedSpace space_from_json(const json& j, const LoadOptions& opts) {
  if (j.is_string()) {
    return space_from_json(parse_file(j.get<std::string>()), opts);
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail("space: missing \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  LoadedSpace out;
  out.echo = j;

  if (kind == "explicit") {
    if (!j.contains("d")) fail("explicit space: missing \"d\"");
    Eigen::MatrixXcd values = matrix_from_json(j["d"], "d");
    Eigen::MatrixXd d = values.real();
    if (values.imag().cwiseAbs().maxCoeff() != 0.0) {
      fail("explicit space: distances must be real");
    }
    std::vector<std::string> labels;
    if (j.contains("points")) {
      for (const auto& p : j["points"]) {
        labels.push_back(p.is_string() ? p.get<std::string>() : p.dump());
      }
    } else {
      for (Index i = 0; i < d.rows(); ++i) {
        labels.push_back("p" + std::to_string(i));
      }
    }
    out.space = DiscreteMetricSpace::from_matrix(std::move(labels),
                                                 std::move(d));
    return out;
  }
  if (kind == "graph") {
    if (!j.contains("n")) fail("graph space: missing \"n\"");
    const Index n = Index(as_number(j["n"], "n"));
    std::vector<std::pair<Index, Index>> edges;
    for (const auto& e : j.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 2) fail("graph space: bad edge");
      edges.emplace_back(Index(as_number(e[0], "edge")),
                         Index(as_number(e[1], "edge")));
    }
    out.space = graph_metric(n, edges);
    return out;
  }

  GroupSpec spec;
  if (kind == "free") {
    spec = GroupSpec::free_group(int(as_number(j.value("rank", json(1)), "rank")));
  } else if (kind == "zn") {
    spec = GroupSpec::integer_lattice(int(as_number(j.value("n", json(1)), "n")));
  } else if (kind == "table") {
    if (!j.contains("elements") || !j.contains("mul") ||
        !j.contains("generators")) {
      fail("table space: need \"elements\", \"mul\", \"generators\"");
    }
    std::vector<std::string> elements;
    for (const auto& e : j["elements"]) {
      elements.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    }
    std::vector<std::vector<int>> table;
    for (const auto& row : j["mul"]) {
      std::vector<int> r;
      for (const auto& v : row) r.push_back(int(as_number(v, "mul")));
      table.push_back(std::move(r));
    }
    std::vector<int> generators;
    for (const auto& g : j["generators"]) {
      if (g.is_number()) {
        generators.push_back(g.get<int>());
      } else if (g.is_string()) {
        auto it = std::find(elements.begin(), elements.end(),
                            g.get<std::string>());
        if (it == elements.end()) fail("table space: unknown generator label");
        generators.push_back(int(std::distance(elements.begin(), it)));
      } else {
        fail("table space: generator must be an index or a label");
      }
    }
    spec = GroupSpec::finite_table(std::move(elements), std::move(table),
                                   std::move(generators));
  } else {
    fail("space: unknown kind \"" + kind + "\"");
  }

  if (!j.contains("radius")) fail("group space: missing \"radius\"");
  const int radius = int(as_number(j["radius"], "radius"));
  BallOptions ball_opts;
  ball_opts.margin = opts.margin.value_or(int(as_number(
      j.value("margin", json(0)), "margin")));
  if (opts.max_elements) ball_opts.max_elements = *opts.max_elements;
  out.ball = cayley_ball(spec, radius, ball_opts);
  out.space = out.ball->metric_space();
  return out;
}

LoadedKernel kernel_from_json(const json& j, const LoadOptions& opts) {
  if (!j.is_object() || !j.contains("space") || !j.contains("values")) {
    fail("kernel: need \"space\" and \"values\"");
  }
  LoadedKernel out;
  out.host = space_from_json(j["space"], opts);
  Eigen::MatrixXcd values = matrix_from_json(j["values"], "values");
  if (values.rows() != out.host.space.size()) {
    fail("kernel: values shape does not match space size");
  }
  out.kernel = Kernel(out.host.space, std::move(values));
  return out;
}

LoadedGroupoidKernel groupoid_kernel_from_json(const json& j,
                                               const LoadOptions& opts) {
  if (!j.is_object() || !j.contains("ball") || !j.contains("values")) {
    fail("groupoid kernel: need \"ball\" and \"values\"");
  }
  LoadedGroupoidKernel out;
  out.host = space_from_json(j["ball"], opts);
  if (!out.host.ball) fail("groupoid kernel: host must be a group ball");
  const GroupBall& ball = *out.host.ball;
  Eigen::MatrixXcd values = matrix_from_json(j["values"], "values");
  if (values.rows() != ball.size()) {
    fail("groupoid kernel: values shape does not match ball size");
  }
  BoolMatrix defined(ball.size(), ball.size());
  for (Index x = 0; x < ball.size(); ++x) {
    for (Index t = 0; t < ball.size(); ++t) {
      defined(x, t) = ball.product(x, t).has_value();
    }
  }
  out.kernel = GroupoidKernel(ball, std::move(values), std::move(defined));
  return out;
}

json kernel_to_json(const Kernel& k, const json& space_echo) {
  json values = json::array();
  for (Index i = 0; i < k.size(); ++i) {
    json row = json::array();
    for (Index j2 = 0; j2 < k.size(); ++j2) {
      row.push_back(complex_to_json(k.values()(i, j2)));
    }
    values.push_back(std::move(row));
  }
  return json{{"space", space_echo}, {"values", std::move(values)}};
}

json report_to_json(const ClassificationReport& r) {
  json w;
  if (r.witness) {
    w = json::object();
    w["points"] = r.witness->points;
    if (r.witness->coefficients.size() > 0) {
      json coeffs = json::array();
      for (Index i = 0; i < r.witness->coefficients.size(); ++i) {
        coeffs.push_back(complex_to_json(r.witness->coefficients(i)));
      }
      w["coefficients"] = std::move(coeffs);
    }
  }
  return json{{"check", r.check},
              {"verdict", r.verdict},
              {"detail", r.detail},
              {"extremal_eigenvalue", r.extremal_eigenvalue},
              {"tolerance", r.tolerance},
              {"witness", std::move(w)}};
}

json groupoid_report_to_json(const GroupoidReport& r, const GroupBall& ball) {
  json out = report_to_json(r.report);
  if (r.failing_base) {
    out["failing_base"] = ball.label(*r.failing_base);
  }
  return out;
}

json embedding_to_json(const HilbertEmbedding& f, const json& space_echo) {
  json coords = json::array();
  for (Index i = 0; i < f.size(); ++i) {
    json row = json::array();
    for (Index c = 0; c < f.dim(); ++c) row.push_back(f.coords()(i, c));
    coords.push_back(std::move(row));
  }
  json out{{"space", space_echo},
           {"dim", f.dim()},
           {"coords", std::move(coords)}};
  if (f.truncation_error() != 0.0) {
    out["truncation_error"] = f.truncation_error();
  }
  return out;
}

json certificate_to_json(const ExpanderCertificate& c) {
  return json{{"n", c.n},
              {"degree", c.degree},
              {"regular", c.regular},
              {"lambda1", c.lambda1},
              {"lhs", c.lhs},
              {"rhs", c.rhs},
              {"bound", c.bound},
              {"median_distance", c.median_distance},
              {"rho_plus_edge", c.rho_plus_edge},
              {"rho_minus_median", c.rho_minus_median},
              {"obstruction_strength", c.obstruction_strength},
              {"verdict", c.verdict}};
}

json haagerup_to_json(const HaagerupCertificate& c, const GroupBall& ball) {
  json profile{{"lengths", c.profile.lengths},
               {"lower", c.profile.lower},
               {"upper", c.profile.upper}};
  json bases = json::array();
  for (Index b : c.sampled_bases) bases.push_back(ball.label(b));
  return json{{"nt_verdict", c.nt.report.verdict},
              {"nt_report", groupoid_report_to_json(c.nt, ball)},
              {"properness_profile", std::move(profile)},
              {"proper", c.proper},
              {"sampled_bases", std::move(bases)}};
}

json profile_to_json(const PropernessProfile& p) {
  return json{{"radii", p.radii}, {"lower", p.lower}, {"upper", p.upper}};
}

std::string compression_csv(const CompressionProfile& p) {
  std::ostringstream os;
  os << "r,rho_minus,rho_plus\n";
  os << std::setprecision(17);
  for (size_t i = 0; i < p.radii.size(); ++i) {
    os << p.radii[i] << "," << p.rho_minus[i] << "," << p.rho_plus[i] << "\n";
  }
  return os.str();
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "k,R,sup_dev,op_dev\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.k << "," << r.radius << "," << r.sup_dev << "," << r.op_dev
       << "\n";
  }
  return os.str();
}

LoadedBandOperator band_from_json(const json& j, const LoadOptions& opts) {
  if (!j.is_object() || !j.contains("ball") || !j.contains("entries")) {
    fail("band operator: need \"ball\" and \"entries\"");
  }
  LoadedBandOperator out;
  out.host = space_from_json(j["ball"], opts);
  if (!out.host.ball) fail("band operator: host must be a group ball");
  std::vector<Eigen::Triplet<Complex>> trip;
  for (const auto& e : j["entries"]) {
    if (!e.is_array() || e.size() != 3) {
      fail("band operator: entries are [s,t,value] triplets");
    }
    trip.emplace_back(Index(as_number(e[0], "entry s")),
                      Index(as_number(e[1], "entry t")),
                      as_complex(e[2], "entry value"));
  }
  out.op = BandOperator::from_triplets(*out.host.ball, trip);
  return out;
}

json band_to_json(const BandOperator& op, const json& ball_echo) {
  json entries = json::array();
  const SparseComplex& m = op.values();
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseComplex::InnerIterator it(m, col); it; ++it) {
      entries.push_back(json::array(
          {it.row(), it.col(),
           json::array({it.value().real(), it.value().imag()})}));
    }
  }
  return json{{"ball", ball_echo}, {"entries", std::move(entries)}};
}

LoadedCPMap cp_map_from_json(const json& j, const LoadOptions& opts) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    fail("cp map: missing \"type\"");
  }
  if (!j.contains("ball")) fail("cp map: missing \"ball\"");
  LoadedCPMap out;
  out.host = space_from_json(j["ball"], opts);
  if (!out.host.ball) fail("cp map: host must be a group ball");
  const GroupBall& ball = *out.host.ball;
  const std::string type = j["type"].get<std::string>();
  if (type == "identity") {
    out.map = CPMapSpec::identity(ball);
    return out;
  }
  if (type == "schur") {
    if (!j.contains("kernel")) fail("schur map: missing \"kernel\"");
    const json& kj = j["kernel"];
    if (!kj.is_object() || !kj.contains("values")) {
      fail("schur map: kernel needs \"values\"");
    }
    Eigen::MatrixXcd values = matrix_from_json(kj["values"], "values");
    if (values.rows() != ball.size()) {
      fail("schur map: kernel shape does not match ball size");
    }
    out.map = CPMapSpec::schur_multiplier(ball,
                                          Kernel(ball.metric_space(), values));
    return out;
  }
  if (type == "finite-rank") {
    std::vector<CPMapSpec::RankOneTerm> terms;
    for (const auto& tj : j.value("terms", json::array())) {
      if (!tj.is_object() || !tj.contains("functional") ||
          !tj.contains("operator")) {
        fail("finite-rank map: terms need \"functional\" and \"operator\"");
      }
      MatrixCoefficientFunctional f;
      for (const auto& c : tj["functional"]) {
        if (!c.is_array() || c.size() != 3) {
          fail("finite-rank map: functional entries are [x,y,weight]");
        }
        f.terms.push_back({Index(as_number(c[0], "functional x")),
                           Index(as_number(c[1], "functional y")),
                           as_complex(c[2], "functional weight")});
      }
      const json& oj = tj["operator"];
      if (!oj.is_object() || !oj.contains("entries")) {
        fail("finite-rank map: operator needs \"entries\"");
      }
      std::vector<Eigen::Triplet<Complex>> trip;
      for (const auto& e : oj["entries"]) {
        if (!e.is_array() || e.size() != 3) {
          fail("finite-rank map: operator entries are [s,t,value]");
        }
        trip.emplace_back(Index(as_number(e[0], "entry s")),
                          Index(as_number(e[1], "entry t")),
                          as_complex(e[2], "entry value"));
      }
      terms.emplace_back(std::move(f),
                         BandOperator::from_triplets(ball, trip));
    }
    out.map = CPMapSpec::finite_rank(ball, std::move(terms));
    return out;
  }
  fail("cp map: unknown type \"" + type + "\"");
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(bytes);
  return os.str();
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail("malformed JSON in " + path);
  return j;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << contents;
}

}  // namespace coarsekit::io

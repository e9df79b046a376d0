#include "coarsekit/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace coarsekit {

// ---------------------------------------------------------------------------
// Metric validation

std::string MetricViolation::describe() const {
  std::ostringstream os;
  switch (axiom) {
    case Axiom::NonFinite:
      os << "non-finite entry at (" << i << "," << j << ")";
      break;
    case Axiom::Asymmetry:
      os << "asymmetry at (" << i << "," << j << "): " << value
         << " != " << bound;
      break;
    case Axiom::NegativeEntry:
      os << "negative entry at (" << i << "," << j << "): " << value;
      break;
    case Axiom::NonzeroDiagonal:
      os << "nonzero diagonal at (" << i << "," << i << "): " << value;
      break;
    case Axiom::ZeroOffDiagonal:
      os << "zero distance between distinct points (" << i << "," << j << ")";
      break;
    case Axiom::Triangle:
      os << "triangle violation (" << i << "," << j << "," << k
         << "): d(i,k)=" << value << " > d(i,j)+d(j,k)=" << bound;
      break;
  }
  return os.str();
}

MetricCheck validate_metric(const Eigen::MatrixXd& m) {
  MetricCheck out;
  const Index n = m.rows();
  if (m.cols() != n) {
    throw PreconditionError("validate_metric: matrix is not square");
  }
  auto& v = out.violations;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (!std::isfinite(m(i, j))) {
        v.push_back({MetricViolation::Axiom::NonFinite, i, j, -1, m(i, j), 0});
      }
    }
  }
  if (!v.empty()) {
    out.ok = false;
    return out;
  }
  for (Index i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) {
      v.push_back(
          {MetricViolation::Axiom::NonzeroDiagonal, i, i, -1, m(i, i), 0});
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (m(i, j) != m(j, i)) {
        v.push_back(
            {MetricViolation::Axiom::Asymmetry, i, j, -1, m(i, j), m(j, i)});
      }
      if (m(i, j) < 0.0) {
        v.push_back(
            {MetricViolation::Axiom::NegativeEntry, i, j, -1, m(i, j), 0});
      } else if (m(i, j) == 0.0 && m(j, i) == 0.0) {
        v.push_back(
            {MetricViolation::Axiom::ZeroOffDiagonal, i, j, -1, 0.0, 0});
      }
    }
  }
  // Triangle scan only once the cheap axioms hold; a broken symmetric part
  // makes triangle witnesses meaningless.
  if (v.empty()) {
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < n; ++k) {
        for (Index j = 0; j < n; ++j) {
          const double lhs = m(i, k);
          const double rhs = m(i, j) + m(j, k);
          if (lhs > rhs) {
            v.push_back({MetricViolation::Axiom::Triangle, i, j, k, lhs, rhs});
          }
        }
      }
    }
  }
  out.ok = v.empty();
  return out;
}

namespace {
std::string join_violations(const std::vector<MetricViolation>& v) {
  std::ostringstream os;
  os << "metric validation failed:";
  for (const auto& w : v) os << " [" << w.describe() << "]";
  return os.str();
}
}  // namespace

MetricError::MetricError(std::vector<MetricViolation> v)
    : Error(join_violations(v)), violations(std::move(v)) {}

// ---------------------------------------------------------------------------
// DiscreteMetricSpace

DiscreteMetricSpace DiscreteMetricSpace::wrap(std::vector<std::string> labels,
                                              Eigen::MatrixXd d) {
  auto impl = std::make_shared<Impl>();
  impl->labels = std::move(labels);
  impl->d = std::move(d);
  std::set<double> grid;
  for (Index i = 0; i < impl->d.rows(); ++i) {
    for (Index j = i; j < impl->d.cols(); ++j) grid.insert(impl->d(i, j));
  }
  impl->grid.assign(grid.begin(), grid.end());
  impl->maxd = impl->grid.empty() ? 0.0 : impl->grid.back();
  DiscreteMetricSpace s;
  s.impl_ = std::move(impl);
  return s;
}

DiscreteMetricSpace DiscreteMetricSpace::from_matrix(
    std::vector<std::string> labels, Eigen::MatrixXd d) {
  if (Index(labels.size()) != d.rows()) {
    throw PreconditionError("space: label count does not match matrix size");
  }
  MetricCheck check = validate_metric(d);
  if (!check.ok) throw MetricError(std::move(check.violations));
  return wrap(std::move(labels), std::move(d));
}

DiscreteMetricSpace DiscreteMetricSpace::unchecked(
    std::vector<std::string> labels, Eigen::MatrixXd d) {
  if (Index(labels.size()) != d.rows() || d.rows() != d.cols()) {
    throw PreconditionError("space: label count does not match matrix size");
  }
  return wrap(std::move(labels), std::move(d));
}

DiscreteMetricSpace DiscreteMetricSpace::subspace(
    const std::vector<Index>& points) const {
  const Index m = Index(points.size());
  std::vector<std::string> labels(size_t(m));
  Eigen::MatrixXd d(m, m);
  for (Index a = 0; a < m; ++a) {
    if (points[size_t(a)] < 0 || points[size_t(a)] >= size()) {
      throw PreconditionError("subspace: point index out of range");
    }
    labels[size_t(a)] = label(points[size_t(a)]);
    for (Index b = 0; b < m; ++b) {
      d(a, b) = distance(points[size_t(a)], points[size_t(b)]);
    }
  }
  return unchecked(std::move(labels), std::move(d));
}

// ---------------------------------------------------------------------------
// Graph metric

DiscreteMetricSpace graph_metric(
    Index n, const std::vector<std::pair<Index, Index>>& edges) {
  if (n <= 0) throw PreconditionError("graph_metric: need at least one vertex");
  std::vector<std::vector<Index>> adj(size_t(n));
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw PreconditionError("graph_metric: edge endpoint out of range");
    }
    if (a == b) throw PreconditionError("graph_metric: self-loop rejected");
    adj[size_t(a)].push_back(b);
    adj[size_t(b)].push_back(a);
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, -1.0);
  std::deque<Index> queue;
  for (Index s = 0; s < n; ++s) {
    d(s, s) = 0.0;
    queue.clear();
    queue.push_back(s);
    while (!queue.empty()) {
      Index u = queue.front();
      queue.pop_front();
      for (Index w : adj[size_t(u)]) {
        if (d(s, w) < 0.0) {
          d(s, w) = d(s, u) + 1.0;
          queue.push_back(w);
        }
      }
    }
    for (Index t = 0; t < n; ++t) {
      if (d(s, t) < 0.0) {
        std::ostringstream os;
        os << "graph_metric: graph is disconnected, vertex " << t
           << " unreachable from " << s;
        throw PreconditionError(os.str());
      }
    }
  }
  std::vector<std::string> labels(size_t(n));
  for (Index i = 0; i < n; ++i) labels[size_t(i)] = "v" + std::to_string(i);
  return DiscreteMetricSpace::unchecked(std::move(labels), std::move(d));
}

DiagonalNeighborhood diagonal_neighborhood(const DiscreteMetricSpace& space,
                                           double radius) {
  DiagonalNeighborhood out;
  out.radius = radius;
  const Index n = space.size();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (space.distance(i, j) < radius) out.pairs.emplace_back(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Groups

GroupSpec GroupSpec::free_group(int rank) {
  if (rank < 1 || rank > 26) {
    throw PreconditionError("free_group: rank must be in [1, 26]");
  }
  GroupSpec s;
  s.kind = Kind::Free;
  s.rank = rank;
  return s;
}

GroupSpec GroupSpec::integer_lattice(int dim) {
  if (dim < 1) throw PreconditionError("integer_lattice: dimension must be >= 1");
  GroupSpec s;
  s.kind = Kind::Zn;
  s.rank = dim;
  return s;
}

GroupSpec GroupSpec::finite_table(std::vector<std::string> elements,
                                  std::vector<std::vector<int>> table,
                                  std::vector<int> generators) {
  GroupSpec s;
  s.kind = Kind::Table;
  s.elements = std::move(elements);
  s.table = std::move(table);
  s.generators = std::move(generators);
  return s;
}

namespace {

using Word = std::vector<int>;  // reduced word; letters +-(1..rank)

Word reduce_concat(const Word& a, const Word& b) {
  Word out = a;
  for (int x : b) {
    if (!out.empty() && out.back() == -x) {
      out.pop_back();
    } else {
      out.push_back(x);
    }
  }
  return out;
}

Word word_inverse(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& x : out) x = -x;
  return out;
}

std::string word_label(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (int x : w) {
    s += char((x > 0 ? 'a' : 'A') + std::abs(x) - 1);
  }
  return s;
}

// letter order used for canonical enumeration: a < A < b < B < ...
int letter_rank(int x) { return 2 * (std::abs(x) - 1) + (x < 0 ? 1 : 0); }

std::string zn_label(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string zn_key(const std::vector<int>& v) { return zn_label(v); }

}  // namespace

struct GroupBall::Impl {
  GroupSpec spec;
  int radius = 0;
  int margin = 0;
  Index interior_size = 0;

  std::vector<std::string> labels;
  std::vector<int> lengths;

  // Free groups
  std::vector<Word> words;
  std::unordered_map<std::string, Index> word_index;

  // Zn
  std::vector<std::vector<int>> coords;
  std::unordered_map<std::string, Index> coord_index;

  // Table groups
  std::vector<int> ids;             // enumerated index -> table id
  std::vector<Index> index_by_id;   // table id -> enumerated index or -1
  std::vector<int> length_by_id;    // full-group word lengths (-1 unreachable)
  std::vector<int> inverse_by_id;

  mutable std::mutex cache_mutex;
  mutable DiscreteMetricSpace full_space;
  mutable DiscreteMetricSpace inner_space;

  int dist(Index s, Index t) const;
  std::optional<Index> mul(Index a, Index b) const;
  Index inv(Index a) const;
};

int GroupBall::Impl::dist(Index s, Index t) const {
  switch (spec.kind) {
    case GroupSpec::Kind::Free: {
      // l(s t^{-1}) from reduced words, independent of enumeration.
      Word st = reduce_concat(words[size_t(s)], word_inverse(words[size_t(t)]));
      return int(st.size());
    }
    case GroupSpec::Kind::Zn: {
      const auto& a = coords[size_t(s)];
      const auto& b = coords[size_t(t)];
      int acc = 0;
      for (size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    }
    case GroupSpec::Kind::Table: {
      int id = spec.table[size_t(ids[size_t(s)])]
                         [size_t(inverse_by_id[size_t(ids[size_t(t)])])];
      return length_by_id[size_t(id)];
    }
  }
  return 0;
}

std::optional<Index> GroupBall::Impl::mul(Index a, Index b) const {
  switch (spec.kind) {
    case GroupSpec::Kind::Free: {
      Word w = reduce_concat(words[size_t(a)], words[size_t(b)]);
      auto it = word_index.find(word_label(w));
      if (it == word_index.end()) return std::nullopt;
      return it->second;
    }
    case GroupSpec::Kind::Zn: {
      std::vector<int> v = coords[size_t(a)];
      const auto& u = coords[size_t(b)];
      for (size_t i = 0; i < v.size(); ++i) v[i] += u[i];
      auto it = coord_index.find(zn_key(v));
      if (it == coord_index.end()) return std::nullopt;
      return it->second;
    }
    case GroupSpec::Kind::Table: {
      int id = spec.table[size_t(ids[size_t(a)])][size_t(ids[size_t(b)])];
      Index idx = index_by_id[size_t(id)];
      if (idx < 0) return std::nullopt;
      return idx;
    }
  }
  return std::nullopt;
}

Index GroupBall::Impl::inv(Index a) const {
  switch (spec.kind) {
    case GroupSpec::Kind::Free: {
      Word w = word_inverse(words[size_t(a)]);
      return word_index.at(word_label(w));
    }
    case GroupSpec::Kind::Zn: {
      std::vector<int> v = coords[size_t(a)];
      for (int& x : v) x = -x;
      return coord_index.at(zn_key(v));
    }
    case GroupSpec::Kind::Table:
      return index_by_id[size_t(inverse_by_id[size_t(ids[size_t(a)])])];
  }
  return 0;
}

Index GroupBall::size() const { return Index(impl_->labels.size()); }
Index GroupBall::interior_size() const { return impl_->interior_size; }
int GroupBall::radius() const { return impl_->radius; }
int GroupBall::margin() const { return impl_->margin; }
const GroupSpec& GroupBall::spec() const { return impl_->spec; }
const std::string& GroupBall::label(Index i) const {
  return impl_->labels[size_t(i)];
}
int GroupBall::length(Index i) const { return impl_->lengths[size_t(i)]; }

std::optional<Index> GroupBall::product(Index a, Index b) const {
  return impl_->mul(a, b);
}
Index GroupBall::inverse(Index a) const { return impl_->inv(a); }
int GroupBall::distance(Index s, Index t) const { return impl_->dist(s, t); }

std::optional<Index> GroupBall::find(const std::string& label) const {
  for (Index i = 0; i < size(); ++i) {
    if (impl_->labels[size_t(i)] == label) return i;
  }
  return std::nullopt;
}

namespace {
constexpr Index kDenseMetricCap = 5000;
}

DiscreteMetricSpace GroupBall::metric_space() const {
  std::lock_guard<std::mutex> lock(impl_->cache_mutex);
  if (impl_->full_space.empty()) {
    const Index n = size();
    if (n > kDenseMetricCap) {
      throw ResourceError(
          "metric_space: dense materialization over cap; use a smaller ball");
    }
    Eigen::MatrixXd d(n, n);
    for (Index i = 0; i < n; ++i) {
      d(i, i) = 0.0;
      for (Index j = i + 1; j < n; ++j) {
        d(i, j) = d(j, i) = double(impl_->dist(i, j));
      }
    }
    std::vector<std::string> labels = impl_->labels;
    impl_->full_space =
        DiscreteMetricSpace::unchecked(std::move(labels), std::move(d));
  }
  return impl_->full_space;
}

DiscreteMetricSpace GroupBall::interior_space() const {
  std::lock_guard<std::mutex> lock(impl_->cache_mutex);
  if (impl_->inner_space.empty()) {
    const Index n = interior_size();
    if (n > kDenseMetricCap) {
      throw ResourceError(
          "interior_space: dense materialization over cap; use a smaller ball");
    }
    Eigen::MatrixXd d(n, n);
    for (Index i = 0; i < n; ++i) {
      d(i, i) = 0.0;
      for (Index j = i + 1; j < n; ++j) {
        d(i, j) = d(j, i) = double(impl_->dist(i, j));
      }
    }
    std::vector<std::string> labels(impl_->labels.begin(),
                                    impl_->labels.begin() + n);
    impl_->inner_space =
        DiscreteMetricSpace::unchecked(std::move(labels), std::move(d));
  }
  return impl_->inner_space;
}

namespace {

void enumerate_free(GroupBall::Impl& impl, int total, std::size_t cap) {
  const int rank = impl.spec.rank;
  std::vector<int> letters;
  for (int g = 1; g <= rank; ++g) {
    letters.push_back(g);
    letters.push_back(-g);
  }
  std::sort(letters.begin(), letters.end(),
            [](int a, int b) { return letter_rank(a) < letter_rank(b); });

  impl.words.push_back({});
  std::size_t layer_begin = 0;
  for (int len = 1; len <= total; ++len) {
    std::size_t layer_end = impl.words.size();
    for (std::size_t p = layer_begin; p < layer_end; ++p) {
      for (int x : letters) {
        const Word& w = impl.words[p];
        if (!w.empty() && w.back() == -x) continue;  // stays reduced
        Word nw = w;
        nw.push_back(x);
        impl.words.push_back(std::move(nw));
        if (impl.words.size() > cap) {
          throw ResourceError(
              "cayley_ball: enumeration exceeds max_elements cap");
        }
      }
    }
    layer_begin = layer_end;
  }
  for (const Word& w : impl.words) {
    impl.labels.push_back(word_label(w));
    impl.lengths.push_back(int(w.size()));
  }
  for (Index i = 0; i < Index(impl.words.size()); ++i) {
    impl.word_index.emplace(impl.labels[size_t(i)], i);
  }
}

void enumerate_zn(GroupBall::Impl& impl, int total, std::size_t cap) {
  const int dim = impl.spec.rank;
  std::map<std::vector<int>, bool> seen;
  std::vector<int> zero(size_t(dim), 0);
  seen[zero] = true;
  impl.coords.push_back(zero);
  std::size_t layer_begin = 0;
  for (int len = 1; len <= total; ++len) {
    std::size_t layer_end = impl.coords.size();
    std::set<std::vector<int>> layer;
    for (std::size_t p = layer_begin; p < layer_end; ++p) {
      for (int axis = 0; axis < dim; ++axis) {
        for (int step : {+1, -1}) {
          std::vector<int> v = impl.coords[p];
          v[size_t(axis)] += step;
          int l1 = 0;
          for (int c : v) l1 += std::abs(c);
          if (l1 != len) continue;
          if (seen.count(v)) continue;
          layer.insert(std::move(v));
        }
      }
    }
    for (const auto& v : layer) {
      seen[v] = true;
      impl.coords.push_back(v);
      if (impl.coords.size() > cap) {
        throw ResourceError("cayley_ball: enumeration exceeds max_elements cap");
      }
    }
    layer_begin = layer_end;
  }
  for (const auto& v : impl.coords) {
    int l1 = 0;
    for (int c : v) l1 += std::abs(c);
    impl.labels.push_back(zn_label(v));
    impl.lengths.push_back(l1);
  }
  for (Index i = 0; i < Index(impl.coords.size()); ++i) {
    impl.coord_index.emplace(impl.labels[size_t(i)], i);
  }
}

void validate_table_group(const GroupSpec& spec) {
  const size_t m = spec.elements.size();
  if (m == 0) throw PreconditionError("table group: no elements");
  if (spec.table.size() != m) {
    throw PreconditionError("table group: table row count mismatch");
  }
  for (const auto& row : spec.table) {
    if (row.size() != m) {
      throw PreconditionError("table group: table is not square");
    }
    for (int v : row) {
      if (v < 0 || size_t(v) >= m) {
        throw PreconditionError("table group: table entry out of range");
      }
    }
  }
  // Latin square: rows and columns are permutations.
  for (size_t i = 0; i < m; ++i) {
    std::vector<bool> row_seen(m, false), col_seen(m, false);
    for (size_t j = 0; j < m; ++j) {
      if (row_seen[size_t(spec.table[i][j])]) {
        throw PreconditionError("table group: row is not a permutation");
      }
      row_seen[size_t(spec.table[i][j])] = true;
      if (col_seen[size_t(spec.table[j][i])]) {
        throw PreconditionError("table group: column is not a permutation");
      }
      col_seen[size_t(spec.table[j][i])] = true;
    }
  }
  // Associativity: exhaustive for small tables, seeded spot checks above.
  if (m <= 64) {
    for (size_t a = 0; a < m; ++a) {
      for (size_t b = 0; b < m; ++b) {
        for (size_t c = 0; c < m; ++c) {
          if (spec.table[size_t(spec.table[a][b])][c] !=
              spec.table[a][size_t(spec.table[b][c])]) {
            throw PreconditionError("table group: multiplication not associative");
          }
        }
      }
    }
  } else {
    std::mt19937_64 rng(0x7ab1e5eedULL);
    std::uniform_int_distribution<size_t> pick(0, m - 1);
    for (int trial = 0; trial < 200000; ++trial) {
      size_t a = pick(rng), b = pick(rng), c = pick(rng);
      if (spec.table[size_t(spec.table[a][b])][c] !=
          spec.table[a][size_t(spec.table[b][c])]) {
        throw PreconditionError("table group: multiplication not associative");
      }
    }
  }
}

void enumerate_table(GroupBall::Impl& impl, int total, std::size_t cap) {
  const GroupSpec& spec = impl.spec;
  validate_table_group(spec);
  const size_t m = spec.elements.size();

  // Identity: the unique e with e*x = x for all x.
  int identity = -1;
  for (size_t i = 0; i < m; ++i) {
    bool ok = true;
    for (size_t j = 0; j < m && ok; ++j) ok = spec.table[i][j] == int(j);
    if (ok) {
      identity = int(i);
      break;
    }
  }
  if (identity < 0) throw PreconditionError("table group: no identity element");

  impl.inverse_by_id.assign(m, -1);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      if (spec.table[i][j] == identity) {
        impl.inverse_by_id[i] = int(j);
        break;
      }
    }
    if (impl.inverse_by_id[i] < 0) {
      throw PreconditionError("table group: element without inverse");
    }
  }

  std::set<int> gens;
  for (int g : spec.generators) {
    if (g < 0 || size_t(g) >= m) {
      throw PreconditionError("table group: generator index out of range");
    }
    if (g == identity) continue;
    gens.insert(g);
    gens.insert(impl.inverse_by_id[size_t(g)]);
  }
  if (gens.empty()) {
    throw PreconditionError("table group: empty generating set");
  }

  // Word lengths over the whole reachable subgroup by BFS.
  impl.length_by_id.assign(m, -1);
  impl.length_by_id[size_t(identity)] = 0;
  std::vector<int> frontier = {identity};
  int level = 0;
  while (!frontier.empty()) {
    ++level;
    std::set<int> next;
    for (int u : frontier) {
      for (int g : gens) {
        int w = spec.table[size_t(u)][size_t(g)];
        if (impl.length_by_id[size_t(w)] < 0) {
          impl.length_by_id[size_t(w)] = level;
          next.insert(w);
        }
      }
    }
    frontier.assign(next.begin(), next.end());
  }

  impl.index_by_id.assign(m, -1);
  for (int len = 0; len <= total; ++len) {
    for (size_t id = 0; id < m; ++id) {
      if (impl.length_by_id[id] == len) {
        impl.index_by_id[id] = Index(impl.ids.size());
        impl.ids.push_back(int(id));
        impl.labels.push_back(spec.elements[id]);
        impl.lengths.push_back(len);
        if (impl.ids.size() > cap) {
          throw ResourceError(
              "cayley_ball: enumeration exceeds max_elements cap");
        }
      }
    }
  }
}

}  // namespace

GroupBall cayley_ball(const GroupSpec& spec, int radius,
                      const BallOptions& options) {
  if (radius < 0) throw PreconditionError("cayley_ball: radius must be >= 0");
  if (options.margin < 0) {
    throw PreconditionError("cayley_ball: margin must be >= 0");
  }
  auto impl = std::make_shared<GroupBall::Impl>();
  impl->spec = spec;
  impl->radius = radius;
  impl->margin = options.margin;
  const int total = radius + options.margin;

  switch (spec.kind) {
    case GroupSpec::Kind::Free:
      if (spec.rank < 1 || spec.rank > 26) {
        throw PreconditionError("cayley_ball: free rank must be in [1, 26]");
      }
      enumerate_free(*impl, total, options.max_elements);
      break;
    case GroupSpec::Kind::Zn:
      if (spec.rank < 1) {
        throw PreconditionError("cayley_ball: lattice dimension must be >= 1");
      }
      enumerate_zn(*impl, total, options.max_elements);
      break;
    case GroupSpec::Kind::Table:
      enumerate_table(*impl, total, options.max_elements);
      break;
  }

  impl->interior_size = 0;
  for (size_t i = 0; i < impl->lengths.size(); ++i) {
    if (impl->lengths[i] <= radius) impl->interior_size = Index(i) + 1;
  }
  GroupBall ball;
  ball.impl_ = std::move(impl);
  return ball;
}

}  // namespace coarsekit

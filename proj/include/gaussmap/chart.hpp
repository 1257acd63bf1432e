#pragma once

// Rectangular coordinate charts and grid-sampled tensor fields.
//
// A TensorField stores one row per grid node and one column per tensor
// component. Components are flattened row-major over the index dimensions,
// so a field with index_dims {n, m} exposes each node as an n x m matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaussmap/errors.hpp"

namespace gaussmap {

using Index = Eigen::Index;

template <typename Scalar>
class Chart {
 public:
  Chart() = default;

  Chart(std::vector<int> shape, std::vector<Scalar> spacing,
        std::vector<Scalar> origin)
      : shape_(std::move(shape)),
        spacing_(std::move(spacing)),
        origin_(std::move(origin)) {
    if (shape_.empty())
      throw ConfigurationError("chart dimension must be at least 1");
    if (spacing_.size() != shape_.size() || origin_.size() != shape_.size())
      throw ConfigurationError(
          "chart shape, spacing and origin must have the same length");
    for (std::size_t a = 0; a < shape_.size(); ++a) {
      if (shape_[a] < 5)
        throw ConfigurationError("grid too small for stencils: axis " +
                                 std::to_string(a) + " has " +
                                 std::to_string(shape_[a]) + " < 5 points");
      if (!(spacing_[a] > Scalar(0)) || !std::isfinite(double(spacing_[a])))
        throw ConfigurationError("spacing must be strictly positive");
      if (!std::isfinite(double(origin_[a])))
        throw ConfigurationError("origin must be finite");
    }
    strides_.assign(shape_.size(), 1);
    for (int a = dim() - 2; a >= 0; --a)
      strides_[a] = strides_[a + 1] * shape_[a + 1];
    nodes_ = strides_[0] * shape_[0];
  }

  int dim() const { return static_cast<int>(shape_.size()); }
  Index nodes() const { return nodes_; }
  const std::vector<int>& shape() const { return shape_; }
  const std::vector<Scalar>& spacing() const { return spacing_; }
  const std::vector<Scalar>& origin() const { return origin_; }
  int shape(int axis) const { return shape_[axis]; }
  Scalar spacing(int axis) const { return spacing_[axis]; }
  Index stride(int axis) const { return strides_[axis]; }

  Scalar max_spacing() const {
    return *std::max_element(spacing_.begin(), spacing_.end());
  }

  int index_along(Index node, int axis) const {
    return static_cast<int>((node / strides_[axis]) % shape_[axis]);
  }

  std::vector<int> multi_index(Index node) const {
    std::vector<int> idx(shape_.size());
    for (int a = 0; a < dim(); ++a) idx[a] = index_along(node, a);
    return idx;
  }

  Index linear_index(std::span<const int> idx) const {
    Index p = 0;
    for (int a = 0; a < dim(); ++a) p += strides_[a] * idx[a];
    return p;
  }

  Scalar coordinate(Index node, int axis) const {
    return origin_[axis] + spacing_[axis] * Scalar(index_along(node, axis));
  }

  std::vector<Scalar> coordinates(Index node) const {
    std::vector<Scalar> x(shape_.size());
    for (int a = 0; a < dim(); ++a) x[a] = coordinate(node, a);
    return x;
  }

  /// Node nearest the middle of the box.
  Index center() const {
    std::vector<int> idx(shape_.size());
    for (int a = 0; a < dim(); ++a) idx[a] = shape_[a] / 2;
    return linear_index(idx);
  }

  /// Margin actually used on each axis; never removes every node.
  int effective_margin(int margin, int axis) const {
    return std::clamp(margin, 0, (shape_[axis] - 1) / 2);
  }

  bool is_interior(Index node, int margin) const {
    for (int a = 0; a < dim(); ++a) {
      const int i = index_along(node, a);
      const int e = effective_margin(margin, a);
      if (i < e || i > shape_[a] - 1 - e) return false;
    }
    return true;
  }

  /// Nodes at least `margin` layers away from every face of the box.
  std::vector<Index> interior(int margin) const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(nodes_));
    for (Index p = 0; p < nodes_; ++p)
      if (is_interior(p, margin)) out.push_back(p);
    return out;
  }

  /// Breadth-first traversal from the center node. parent[p] is the
  /// neighbour through which p was first reached (the center is its own
  /// parent). Neighbours are visited axis by axis, minus side first.
  struct Traversal {
    std::vector<Index> order;
    std::vector<Index> parent;
  };

  Traversal center_out() const {
    Traversal t;
    t.order.reserve(static_cast<std::size_t>(nodes_));
    t.parent.assign(static_cast<std::size_t>(nodes_), Index(-1));
    const Index c = center();
    t.parent[c] = c;
    std::queue<Index> frontier;
    frontier.push(c);
    while (!frontier.empty()) {
      const Index p = frontier.front();
      frontier.pop();
      t.order.push_back(p);
      for (int a = 0; a < dim(); ++a) {
        const int i = index_along(p, a);
        for (int step : {-1, 1}) {
          const int j = i + step;
          if (j < 0 || j >= shape_[a]) continue;
          const Index q = p + step * strides_[a];
          if (t.parent[q] >= 0) continue;
          t.parent[q] = p;
          frontier.push(q);
        }
      }
    }
    return t;
  }

  bool operator==(const Chart& other) const {
    return shape_ == other.shape_ && spacing_ == other.spacing_ &&
           origin_ == other.origin_;
  }

 private:
  std::vector<int> shape_;
  std::vector<Scalar> spacing_;
  std::vector<Scalar> origin_;
  std::vector<Index> strides_;
  Index nodes_ = 0;
};

template <typename Scalar>
Chart<Scalar> build_chart(int m, std::vector<int> shape,
                          std::vector<Scalar> spacing,
                          std::vector<Scalar> origin) {
  if (m < 1) throw ConfigurationError("chart dimension must be at least 1");
  if (static_cast<int>(shape.size()) != m ||
      static_cast<int>(spacing.size()) != m ||
      static_cast<int>(origin.size()) != m)
    throw ConfigurationError("dimension mismatch: m = " + std::to_string(m) +
                             " but shape/spacing/origin have " +
                             std::to_string(shape.size()) + "/" +
                             std::to_string(spacing.size()) + "/" +
                             std::to_string(origin.size()) + " entries");
  return Chart<Scalar>(std::move(shape), std::move(spacing),
                       std::move(origin));
}

/// Index bookkeeping: covariant (chart) slots, contravariant (chart) slots
/// and ambient (R^n) slots.
struct Valence {
  int covariant = 0;
  int contravariant = 0;
  int ambient = 0;

  bool operator==(const Valence&) const = default;
};

template <typename Scalar>
class TensorField {
 public:
  using Storage =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using NodeMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  TensorField() = default;

  TensorField(Chart<Scalar> chart, std::vector<int> index_dims,
              Valence valence = {}, int ambient_dim = 0)
      : chart_(std::move(chart)),
        index_dims_(std::move(index_dims)),
        valence_(valence),
        ambient_dim_(ambient_dim) {
    if (static_cast<int>(index_dims_.size()) !=
        valence_.covariant + valence_.contravariant + valence_.ambient)
      throw ConfigurationError("valence does not match the number of indices");
    values_ = Storage::Zero(chart_.nodes(), component_count(index_dims_));
  }

  static Index component_count(const std::vector<int>& dims) {
    return std::accumulate(dims.begin(), dims.end(), Index(1),
                           std::multiplies<Index>());
  }

  const Chart<Scalar>& chart() const { return chart_; }
  const std::vector<int>& index_dims() const { return index_dims_; }
  int rank() const { return static_cast<int>(index_dims_.size()); }
  Valence valence() const { return valence_; }
  int ambient_dim() const { return ambient_dim_; }
  Index nodes() const { return values_.rows(); }
  Index components() const { return values_.cols(); }
  bool empty() const { return values_.size() == 0; }

  const Storage& values() const { return values_; }
  Storage& values() { return values_; }

  auto node(Index p) const { return values_.row(p); }
  auto node(Index p) { return values_.row(p); }

  Scalar& scalar(Index p) { return values_(p, 0); }
  Scalar scalar(Index p) const { return values_(p, 0); }

  /// Node view as a matrix: rank-2 fields give dims[0] x dims[1],
  /// rank-1 fields a column, scalars 1 x 1.
  Eigen::Map<const NodeMatrix> matrix(Index p) const {
    const auto [r, c] = matrix_shape();
    return Eigen::Map<const NodeMatrix>(values_.row(p).data(), r, c);
  }
  Eigen::Map<NodeMatrix> matrix(Index p) {
    const auto [r, c] = matrix_shape();
    return Eigen::Map<NodeMatrix>(values_.row(p).data(), r, c);
  }

  Index flat(std::initializer_list<int> idx) const {
    Index c = 0;
    auto it = idx.begin();
    for (std::size_t s = 0; s < index_dims_.size(); ++s, ++it)
      c = c * index_dims_[s] + *it;
    return c;
  }

  Scalar operator()(Index p, std::initializer_list<int> idx) const {
    return values_(p, flat(idx));
  }
  Scalar& operator()(Index p, std::initializer_list<int> idx) {
    return values_(p, flat(idx));
  }

  bool all_finite() const { return values_.allFinite(); }

  /// First node holding a NaN or Inf, or -1.
  Index first_non_finite() const {
    for (Index p = 0; p < nodes(); ++p)
      if (!values_.row(p).allFinite()) return p;
    return -1;
  }

  bool same_shape(const TensorField& other) const {
    return chart_ == other.chart_ && index_dims_ == other.index_dims_;
  }

  TensorField& operator+=(const TensorField& o) {
    require_same_shape(o);
    values_ += o.values_;
    return *this;
  }
  TensorField& operator-=(const TensorField& o) {
    require_same_shape(o);
    values_ -= o.values_;
    return *this;
  }
  TensorField& operator*=(Scalar a) {
    values_ *= a;
    return *this;
  }

  TensorField with_values(Storage v) const {
    TensorField out = *this;
    out.values_ = std::move(v);
    return out;
  }

 private:
  std::pair<Index, Index> matrix_shape() const {
    if (index_dims_.empty()) return {1, 1};
    if (index_dims_.size() == 1) return {index_dims_[0], 1};
    return {index_dims_[0], components() / index_dims_[0]};
  }

  void require_same_shape(const TensorField& o) const {
    if (!same_shape(o))
      throw ConfigurationError("tensor fields live on different charts/shapes");
  }

  Chart<Scalar> chart_;
  std::vector<int> index_dims_;
  Valence valence_;
  int ambient_dim_ = 0;
  Storage values_;
};

template <typename Scalar>
TensorField<Scalar> operator+(TensorField<Scalar> a,
                              const TensorField<Scalar>& b) {
  a += b;
  return a;
}

template <typename Scalar>
TensorField<Scalar> operator-(TensorField<Scalar> a,
                              const TensorField<Scalar>& b) {
  a -= b;
  return a;
}

template <typename Scalar>
TensorField<Scalar> operator*(Scalar s, TensorField<Scalar> a) {
  a *= s;
  return a;
}

using Chartd = Chart<double>;
using TensorFieldd = TensorField<double>;

/// Derivative along one chart axis; the output has the input's shape.
/// Three-point central stencil in the interior, three-point one-sided
/// (second order) stencil on the first and last layer.
template <typename Scalar>
TensorField<Scalar> partial_derivative(const TensorField<Scalar>& f,
                                       int axis) {
  const Chart<Scalar>& chart = f.chart();
  if (axis < 0 || axis >= chart.dim())
    throw ConfigurationError("derivative axis out of range");
  TensorField<Scalar> out = f;
  const auto& v = f.values();
  auto& d = out.values();
  const Index s = chart.stride(axis);
  const int n = chart.shape(axis);
  const Scalar inv2h = Scalar(1) / (Scalar(2) * chart.spacing(axis));
  for (Index p = 0; p < f.nodes(); ++p) {
    const int i = chart.index_along(p, axis);
    if (i == 0)
      d.row(p) = (Scalar(-3) * v.row(p) + Scalar(4) * v.row(p + s) -
                  v.row(p + 2 * s)) *
                 inv2h;
    else if (i == n - 1)
      d.row(p) = (Scalar(3) * v.row(p) - Scalar(4) * v.row(p - s) +
                  v.row(p - 2 * s)) *
                 inv2h;
    else
      d.row(p) = (v.row(p + s) - v.row(p - s)) * inv2h;
  }
  return out;
}

/// All first partials; appends a trailing covariant index of size m.
template <typename Scalar>
TensorField<Scalar> gradient(const TensorField<Scalar>& f) {
  const int m = f.chart().dim();
  std::vector<int> dims = f.index_dims();
  dims.push_back(m);
  Valence val = f.valence();
  val.covariant += 1;
  TensorField<Scalar> out(f.chart(), dims, val, f.ambient_dim());
  const Index comps = f.components();
  for (int a = 0; a < m; ++a) {
    const TensorField<Scalar> da = partial_derivative(f, a);
    for (Index c = 0; c < comps; ++c) out.values().col(c * m + a) = da.values().col(c);
  }
  return out;
}

/// Evaluates `fn(x, out)` at every node; `out` has the field's component
/// count. Throws SamplingError at the first non-finite value.
template <typename Scalar, typename Fn>
TensorField<Scalar> sample(const Chart<Scalar>& chart,
                           std::vector<int> index_dims, Valence valence,
                           int ambient_dim, Fn&& fn) {
  TensorField<Scalar> out(chart, std::move(index_dims), valence, ambient_dim);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> buf(out.components());
  for (Index p = 0; p < chart.nodes(); ++p) {
    const std::vector<Scalar> x = chart.coordinates(p);
    buf.setZero();
    fn(std::span<const Scalar>(x), buf);
    if (!buf.allFinite())
      throw SamplingError("evaluator returned a non-finite value", p);
    out.node(p) = buf.transpose();
  }
  return out;
}

/// Scalar-valued convenience overload.
template <typename Scalar, typename Fn>
TensorField<Scalar> sample_scalar(const Chart<Scalar>& chart, Fn&& fn) {
  return sample(chart, {}, Valence{}, 0,
                [&](std::span<const Scalar> x,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& out) {
                  out(0) = fn(x);
                });
}

/// Max of `fn(p)` over the interior nodes. A NaN anywhere yields +inf.
template <typename Scalar, typename Fn>
double max_over_interior(const Chart<Scalar>& chart, int margin, Fn&& fn) {
  double worst = 0.0;
  for (Index p : chart.interior(margin)) {
    const double v = double(fn(p));
    if (std::isnan(v)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace gaussmap

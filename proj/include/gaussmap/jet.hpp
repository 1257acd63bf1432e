#pragma once

// Second-order forward-mode jets: value, gradient and Hessian with respect
// to up to three chart coordinates. Used by the forward oracle to
// differentiate parametrizations exactly instead of by finite differences.

#include <cmath>

#include <Eigen/Dense>

namespace gaussmap {

template <typename Scalar>
struct Jet {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 3, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

  Scalar v = Scalar(0);
  Vec g;
  Mat h;

  Jet() = default;
  Jet(Scalar value, int dim) : v(value), g(Vec::Zero(dim)), h(Mat::Zero(dim, dim)) {}

  /// Coordinate x_i as an independent variable.
  static Jet variable(Scalar value, int i, int dim) {
    Jet j(value, dim);
    j.g(i) = Scalar(1);
    return j;
  }

  int dim() const { return static_cast<int>(g.size()); }

  /// f(this) given f, f', f'' at the value.
  Jet chain(Scalar f0, Scalar f1, Scalar f2) const {
    Jet out;
    out.v = f0;
    out.g = f1 * g;
    out.h = f1 * h + f2 * g * g.transpose();
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    out.v = -v;
    out.g = -g;
    out.h = -h;
    return out;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    Mat cross = g * o.g.transpose();
    h = v * o.h + o.v * h + cross + cross.transpose();
    g = v * o.g + o.v * g;
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const Scalar inv = Scalar(1) / o.v;
    return *this *= o.chain(inv, -inv * inv, Scalar(2) * inv * inv * inv);
  }
  Jet& operator+=(Scalar s) {
    v += s;
    return *this;
  }
  Jet& operator-=(Scalar s) {
    v -= s;
    return *this;
  }
  Jet& operator*=(Scalar s) {
    v *= s;
    g *= s;
    h *= s;
    return *this;
  }
  Jet& operator/=(Scalar s) { return *this *= Scalar(1) / s; }
};

template <typename S> Jet<S> operator+(Jet<S> a, const Jet<S>& b) { return a += b; }
template <typename S> Jet<S> operator-(Jet<S> a, const Jet<S>& b) { return a -= b; }
template <typename S> Jet<S> operator*(Jet<S> a, const Jet<S>& b) { return a *= b; }
template <typename S> Jet<S> operator/(Jet<S> a, const Jet<S>& b) { return a /= b; }
template <typename S> Jet<S> operator+(Jet<S> a, S s) { return a += s; }
template <typename S> Jet<S> operator+(S s, Jet<S> a) { return a += s; }
template <typename S> Jet<S> operator-(Jet<S> a, S s) { return a -= s; }
template <typename S> Jet<S> operator-(S s, const Jet<S>& a) { return -a + s; }
template <typename S> Jet<S> operator*(Jet<S> a, S s) { return a *= s; }
template <typename S> Jet<S> operator*(S s, Jet<S> a) { return a *= s; }
template <typename S> Jet<S> operator/(Jet<S> a, S s) { return a /= s; }
template <typename S> Jet<S> operator/(S s, const Jet<S>& a) {
  const S inv = S(1) / a.v;
  return a.chain(s * inv, -s * inv * inv, S(2) * s * inv * inv * inv);
}

template <typename S> Jet<S> sin(const Jet<S>& a) {
  using std::sin, std::cos;
  return a.chain(sin(a.v), cos(a.v), -sin(a.v));
}
template <typename S> Jet<S> cos(const Jet<S>& a) {
  using std::sin, std::cos;
  return a.chain(cos(a.v), -sin(a.v), -cos(a.v));
}
template <typename S> Jet<S> sinh(const Jet<S>& a) {
  using std::sinh, std::cosh;
  return a.chain(sinh(a.v), cosh(a.v), sinh(a.v));
}
template <typename S> Jet<S> cosh(const Jet<S>& a) {
  using std::sinh, std::cosh;
  return a.chain(cosh(a.v), sinh(a.v), cosh(a.v));
}
template <typename S> Jet<S> tanh(const Jet<S>& a) {
  using std::tanh;
  const S t = tanh(a.v);
  const S d = S(1) - t * t;
  return a.chain(t, d, S(-2) * t * d);
}
template <typename S> Jet<S> exp(const Jet<S>& a) {
  using std::exp;
  const S e = exp(a.v);
  return a.chain(e, e, e);
}
template <typename S> Jet<S> sqrt(const Jet<S>& a) {
  using std::sqrt;
  const S r = sqrt(a.v);
  return a.chain(r, S(0.5) / r, S(-0.25) / (r * a.v));
}

using Jetd = Jet<double>;

}  // namespace gaussmap

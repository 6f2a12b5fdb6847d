#pragma once

#include <array>
#include <cmath>

namespace qsa {

/// Truncated bivariate Taylor polynomial in (dx, dp), total degree <= 3.
/// Coefficient c(i, j) multiplies dx^i dp^j, so the partial derivative
/// d^{i+j}/dx^i dp^j equals c(i, j) * i! * j!.
class Jet {
 public:
  static constexpr int kOrder = 3;

  Jet() { c_.fill(0.0); }
  Jet(double value) {  // NOLINT(google-explicit-constructor)
    c_.fill(0.0);
    c_[0] = value;
  }

  static Jet x_variable(double x0) {
    Jet j(x0);
    j.at(1, 0) = 1.0;
    return j;
  }
  static Jet p_variable(double p0) {
    Jet j(p0);
    j.at(0, 1) = 1.0;
    return j;
  }
  /// Function of x only, given its value and first three derivatives.
  static Jet from_x_derivatives(double f0, double f1, double f2, double f3) {
    Jet j(f0);
    j.at(1, 0) = f1;
    j.at(2, 0) = f2 / 2.0;
    j.at(3, 0) = f3 / 6.0;
    return j;
  }
  static Jet from_p_derivatives(double f0, double f1, double f2, double f3) {
    Jet j(f0);
    j.at(0, 1) = f1;
    j.at(0, 2) = f2 / 2.0;
    j.at(0, 3) = f3 / 6.0;
    return j;
  }

  double value() const { return c_[0]; }
  double& at(int i, int j) { return c_[index(i, j)]; }
  double at(int i, int j) const { return c_[index(i, j)]; }

  double partial(int i, int j) const {
    static constexpr double kFact[4] = {1.0, 1.0, 2.0, 6.0};
    return at(i, j) * kFact[i] * kFact[j];
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    a *= -1.0;
    return a;
  }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(0.0);
    for (int i = 0; i <= kOrder; ++i)
      for (int j = 0; i + j <= kOrder; ++j) {
        double s = 0.0;
        for (int k = 0; k <= i; ++k)
          for (int l = 0; l <= j; ++l) s += a.at(k, l) * b.at(i - k, j - l);
        r.at(i, j) = s;
      }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet q(0.0);
    const double b0 = b.value();
    for (int deg = 0; deg <= kOrder; ++deg)
      for (int i = deg; i >= 0; --i) {
        const int j = deg - i;
        double s = a.at(i, j);
        for (int k = 0; k <= i; ++k)
          for (int l = 0; l <= j; ++l)
            if (k != i || l != j) s -= q.at(k, l) * b.at(i - k, j - l);
        q.at(i, j) = s / b0;
      }
    return q;
  }

  friend Jet exp(const Jet& a) {
    Jet d = a;
    d.at(0, 0) = 0.0;
    Jet d2 = d * d;
    Jet d3 = d2 * d;
    Jet r = Jet(1.0) + d + d2 * 0.5 + d3 * (1.0 / 6.0);
    return r * std::exp(a.value());
  }

  friend Jet log(const Jet& a) {
    const double a0 = a.value();
    Jet d = a / a0;
    d.at(0, 0) = 0.0;
    Jet d2 = d * d;
    Jet d3 = d2 * d;
    Jet r = d - d2 * 0.5 + d3 * (1.0 / 3.0);
    r.at(0, 0) = std::log(a0);
    return r;
  }

  friend Jet sqrt(const Jet& a) {
    const double a0 = a.value();
    const double s0 = std::sqrt(a0);
    Jet d = a / a0;
    d.at(0, 0) = 0.0;
    Jet d2 = d * d;
    Jet d3 = d2 * d;
    Jet r = Jet(1.0) + d * 0.5 - d2 * 0.125 + d3 * 0.0625;
    return r * s0;
  }

 private:
  static constexpr int kSize = 16;
  static int index(int i, int j) { return 4 * i + j; }
  std::array<double, kSize> c_;
};

inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.value(); }

}  // namespace qsa

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <initializer_list>
#include <span>

#include <Eigen/Dense>

#include "nklab/common.hpp"

namespace nklab {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Endo = Mat6;  ///< endomorphism of the underlying 6-space, acting on vectors

namespace detail {

constexpr std::array<int, 7> kBinom = {1, 6, 15, 20, 15, 6, 1};

/// Multi-index bookkeeping for Lambda^k(R^6). Basis k-forms are strictly
/// increasing index tuples over {0..5}, enumerated in lexicographic order and
/// stored as 6-bit masks.
struct Tables {
  std::array<std::vector<std::uint8_t>, 7> masks;  // per degree, lex order
  std::array<std::int8_t, 64> pos{};               // mask -> index within its degree

  Tables() {
    pos.fill(-1);
    for (std::uint8_t m = 0; m < 64; ++m) {
      int k = std::popcount(m);
      masks[k].push_back(m);
    }
    // numeric order of masks is not lex order of tuples; sort each class
    for (auto& v : masks) {
      std::sort(v.begin(), v.end(), [](std::uint8_t a, std::uint8_t b) {
        // lexicographic on the sorted index tuples
        std::uint8_t x = a, y = b;
        while (x && y) {
          int ia = std::countr_zero(x), ib = std::countr_zero(y);
          if (ia != ib) return ia < ib;
          x &= x - 1;
          y &= y - 1;
        }
        return false;
      });
    }
    for (int k = 0; k <= 6; ++k)
      for (int i = 0; i < static_cast<int>(masks[k].size()); ++i)
        pos[masks[k][i]] = static_cast<std::int8_t>(i);
  }

  static const Tables& get() {
    static const Tables t;
    return t;
  }
};

/// Sign of merging two disjoint sorted index sets: (-1)^inversions.
inline int merge_sign(std::uint8_t a, std::uint8_t b) {
  int inv = 0;
  std::uint8_t x = a;
  while (x) {
    int i = std::countr_zero(x);
    inv += std::popcount(static_cast<std::uint8_t>(b & ((1u << i) - 1u)));
    x &= x - 1;
  }
  return (inv & 1) ? -1 : 1;
}

/// Sign of sorting a small tuple (sorts it in place); 0 if it has duplicates.
inline int sort_sign(std::span<int> idx) {
  int inv = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) ++inv;
    }
  std::sort(idx.begin(), idx.end());
  return (inv & 1) ? -1 : 1;
}

inline std::uint8_t mask_of(std::span<const int> idx) {
  std::uint8_t m = 0;
  for (int i : idx) m |= static_cast<std::uint8_t>(1u << i);
  return m;
}

}  // namespace detail

/// Dense real k-form on an oriented 6-dimensional inner-product space.
/// Coefficients run over the lexicographically ordered strictly increasing
/// multi-indices; at most C(6,3) = 20 of them, stored inline.
class Form {
 public:
  Form() : Form(0) {}

  explicit Form(int degree) : degree_(degree) {
    if (degree < 0 || degree > 6) throw DegreeError("form degree must be in 0..6");
    c_.fill(0.0);
  }

  /// Basis form from 1-based indices, e.g. basis({1,2}) = e^12. Unsorted
  /// input contributes the permutation sign.
  static Form basis(std::initializer_list<int> indices, double coeff = 1.0) {
    Form f(static_cast<int>(indices.size()));
    std::array<int, 6> idx{};
    int n = 0;
    for (int i : indices) idx[n++] = i - 1;
    int sign = detail::sort_sign(std::span<int>(idx.data(), n));
    if (sign == 0) throw DegreeError("repeated index in basis form");
    std::uint8_t m = detail::mask_of(std::span<const int>(idx.data(), n));
    f.c_[detail::Tables::get().pos[m]] = sign * coeff;
    return f;
  }

  static Form scalar(double value) {
    Form f(0);
    f.c_[0] = value;
    return f;
  }

  int degree() const { return degree_; }
  int size() const { return detail::kBinom[degree_]; }

  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  std::span<const double> coeffs() const { return {c_.data(), static_cast<std::size_t>(size())}; }
  std::span<double> coeffs() { return {c_.data(), static_cast<std::size_t>(size())}; }

  /// Coefficient of a (1-based, strictly increasing) basis multi-index.
  double coeff(std::initializer_list<int> indices) const {
    if (static_cast<int>(indices.size()) != degree_) throw DegreeError("coeff: wrong arity");
    std::array<int, 6> idx{};
    int n = 0;
    for (int i : indices) idx[n++] = i - 1;
    int sign = detail::sort_sign(std::span<int>(idx.data(), n));
    if (sign == 0) return 0.0;
    std::uint8_t m = detail::mask_of(std::span<const int>(idx.data(), n));
    return sign * c_[detail::Tables::get().pos[m]];
  }

  double linf() const {
    double m = 0;
    for (int i = 0; i < size(); ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }

  bool finite() const {
    for (int i = 0; i < size(); ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

  Form& operator+=(const Form& o) {
    check_same_degree(o);
    for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_same_degree(o);
    for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Form& operator*=(double t) {
    for (int i = 0; i < size(); ++i) c_[i] *= t;
    return *this;
  }

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(double t, Form a) { return a *= t; }
  friend Form operator*(Form a, double t) { return a *= t; }
  friend Form operator-(Form a) { return a *= -1.0; }

 private:
  void check_same_degree(const Form& o) const {
    if (degree_ != o.degree_) throw DegreeError("degree mismatch");
  }

  int degree_;
  std::array<double, 20> c_;
};

inline double max_abs_diff(const Form& a, const Form& b) {
  return (a - b).linf();
}

/// 1-form <-> vector with the flat identity pairing (coefficient copy).
inline Vec6 to_vector(const Form& a) {
  if (a.degree() != 1) throw DegreeError("to_vector needs a 1-form");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = a[i];
  return v;
}

inline Form to_form(const Vec6& v) {
  Form a(1);
  for (int i = 0; i < 6; ++i) a[i] = v[i];
  return a;
}

/// Exterior product. Graded-commutative, associative; degree overflow is an error.
inline Form wedge(const Form& a, const Form& b) {
  const int j = a.degree(), k = b.degree();
  if (j + k > 6) throw DegreeError("wedge: degree overflow");
  const auto& T = detail::Tables::get();
  Form out(j + k);
  const auto& ma = T.masks[j];
  const auto& mb = T.masks[k];
  for (int ia = 0; ia < detail::kBinom[j]; ++ia) {
    double ca = a[ia];
    if (ca == 0.0) continue;
    std::uint8_t A = ma[ia];
    for (int ib = 0; ib < detail::kBinom[k]; ++ib) {
      double cb = b[ib];
      if (cb == 0.0) continue;
      std::uint8_t B = mb[ib];
      if (A & B) continue;
      out[T.pos[A | B]] += detail::merge_sign(A, B) * ca * cb;
    }
  }
  return out;
}

/// Interior product X -| a. Antiderivation of degree -1; k = 0 is an error.
inline Form contract(const Vec6& X, const Form& a) {
  const int k = a.degree();
  if (k < 1) throw DegreeError("contract: degree must be >= 1");
  const auto& T = detail::Tables::get();
  Form out(k - 1);
  for (int ia = 0; ia < detail::kBinom[k]; ++ia) {
    double ca = a[ia];
    if (ca == 0.0) continue;
    std::uint8_t A = T.masks[k][ia];
    int slot = 0;
    std::uint8_t rest = A;
    while (rest) {
      int i = std::countr_zero(rest);
      rest &= rest - 1;
      double xi = X[i];
      if (xi != 0.0) {
        double sign = (slot & 1) ? -1.0 : 1.0;
        out[T.pos[A & ~(1u << i)]] += sign * xi * ca;
      }
      ++slot;
    }
  }
  return out;
}

/// S_* action of an endomorphism on a k-form:
/// (S_* phi)(X_1,...,X_k) = -sum_j phi(X_1,...,S X_j,...,X_k).
inline Form endo_act(const Endo& S, const Form& a) {
  const int k = a.degree();
  const auto& T = detail::Tables::get();
  Form out(k);
  if (k == 0) return out;
  for (int io = 0; io < detail::kBinom[k]; ++io) {
    std::uint8_t I = T.masks[k][io];
    std::array<int, 6> idx{};
    int n = 0;
    std::uint8_t rest = I;
    while (rest) {
      idx[n++] = std::countr_zero(rest);
      rest &= rest - 1;
    }
    // out_I = -sum_p sum_m S(m, i_p) * phi(e_{i_1},..,e_m,..,e_{i_k})
    double acc = 0;
    for (int p = 0; p < n; ++p) {
      for (int m = 0; m < 6; ++m) {
        double s = S(m, idx[p]);
        if (s == 0.0) continue;
        std::array<int, 6> t = idx;
        t[p] = m;
        int sign = detail::sort_sign(std::span<int>(t.data(), n));
        if (sign == 0) continue;
        std::uint8_t M = detail::mask_of(std::span<const int>(t.data(), n));
        acc -= s * sign * a[T.pos[M]];
      }
    }
    out[io] = acc;
  }
  return out;
}

/// Positive-definite metric on the 6-space plus an orientation sign.
/// Construction validates symmetry and positive-definiteness.
class Metric {
 public:
  Metric() : Metric(Mat6::Identity(), +1) {}

  Metric(const Mat6& gram, int orientation, const EpsPolicy& eps = {}) : gram_(gram), orientation_(orientation) {
    if (orientation != 1 && orientation != -1) throw MetricNotPositive("orientation must be +1 or -1");
    double scale = gram.cwiseAbs().maxCoeff();
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale))
      throw MetricNotPositive("gram matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat6> es(gram);
    if (es.eigenvalues().minCoeff() <= eps.stability * std::max(1.0, scale))
      throw MetricNotPositive("gram matrix not positive-definite");
    inv_ = es.operatorInverseSqrt() * es.operatorInverseSqrt();
    sqrt_det_ = std::sqrt(gram.determinant());
    identity_ = (gram - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-14;
  }

  const Mat6& gram() const { return gram_; }
  const Mat6& inverse() const { return inv_; }
  int orientation() const { return orientation_; }
  double sqrt_det() const { return sqrt_det_; }
  bool is_identity() const { return identity_; }

  Vec6 raise(const Vec6& covector) const { return identity_ ? covector : Vec6(inv_ * covector); }
  Vec6 lower(const Vec6& vector) const { return identity_ ? vector : Vec6(gram_ * vector); }

  /// vol = orientation * sqrt(det g) * e^123456.
  Form vol() const {
    Form v(6);
    v[0] = orientation_ * sqrt_det_;
    return v;
  }

 private:
  Mat6 gram_;
  int orientation_;
  Mat6 inv_;
  double sqrt_det_;
  bool identity_;
};

namespace detail {

/// Gram determinant <e^I, e^J>_k = det(Ginv[i_a, j_b]).
inline double gram_det(const Mat6& ginv, std::uint8_t I, std::uint8_t J, int k) {
  if (k == 0) return 1.0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6> M(k, k);
  int a = 0;
  std::uint8_t ri = I;
  while (ri) {
    int i = std::countr_zero(ri);
    ri &= ri - 1;
    int b = 0;
    std::uint8_t rj = J;
    while (rj) {
      int j = std::countr_zero(rj);
      rj &= rj - 1;
      M(a, b) = ginv(i, j);
      ++b;
    }
    ++a;
  }
  return M.determinant();
}

}  // namespace detail

/// Pointwise inner product of two k-forms.
inline double inner(const Form& a, const Form& b, const Metric& m) {
  if (a.degree() != b.degree()) throw DegreeError("inner: degree mismatch");
  const int k = a.degree();
  if (m.is_identity()) {
    double s = 0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  const auto& T = detail::Tables::get();
  double s = 0;
  for (int ia = 0; ia < a.size(); ++ia) {
    if (a[ia] == 0.0) continue;
    for (int ib = 0; ib < b.size(); ++ib) {
      if (b[ib] == 0.0) continue;
      s += a[ia] * b[ib] * detail::gram_det(m.inverse(), T.masks[k][ia], T.masks[k][ib], k);
    }
  }
  return s;
}

/// Hodge star: a ^ star(b) = <a,b> vol for every a.
inline Form star(const Form& b, const Metric& m) {
  const int k = b.degree();
  const auto& T = detail::Tables::get();
  Form out(6 - k);
  const double volc = m.orientation() * m.sqrt_det();
  if (m.is_identity()) {
    for (int i = 0; i < b.size(); ++i) {
      std::uint8_t I = T.masks[k][i];
      std::uint8_t Ic = static_cast<std::uint8_t>(~I & 0x3F);
      out[T.pos[Ic]] = detail::merge_sign(I, Ic) * volc * b[i];
    }
    return out;
  }
  for (int i = 0; i < detail::kBinom[k]; ++i) {
    std::uint8_t I = T.masks[k][i];
    std::uint8_t Ic = static_cast<std::uint8_t>(~I & 0x3F);
    double ip = 0;  // <e^I, b>
    for (int jb = 0; jb < b.size(); ++jb) {
      if (b[jb] == 0.0) continue;
      ip += b[jb] * detail::gram_det(m.inverse(), I, T.masks[k][jb], k);
    }
    out[T.pos[Ic]] += detail::merge_sign(I, Ic) * volc * ip;
  }
  return out;
}

/// Complex form as a (re, im) pair of equal degree.
struct ComplexForm {
  Form re, im;

  ComplexForm() : re(0), im(0) {}
  explicit ComplexForm(int degree) : re(degree), im(degree) {}
  ComplexForm(Form r, Form i) : re(std::move(r)), im(std::move(i)) {
    if (re.degree() != im.degree()) throw DegreeError("complex form: degree mismatch");
  }

  int degree() const { return re.degree(); }
  ComplexForm conj() const { return {re, -im}; }

  friend ComplexForm operator+(const ComplexForm& a, const ComplexForm& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend ComplexForm operator-(const ComplexForm& a, const ComplexForm& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend ComplexForm operator*(std::complex<double> t, const ComplexForm& a) {
    return {t.real() * a.re - t.imag() * a.im, t.real() * a.im + t.imag() * a.re};
  }
};

inline ComplexForm wedge(const ComplexForm& a, const ComplexForm& b) {
  return {wedge(a.re, b.re) - wedge(a.im, b.im), wedge(a.re, b.im) + wedge(a.im, b.re)};
}

inline Form random_form(int degree, Rng& rng) {
  Form f(degree);
  for (int i = 0; i < f.size(); ++i) f[i] = rng.uniform_pm1();
  return f;
}

inline Vec6 random_vector(Rng& rng) {
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = rng.uniform_pm1();
  return v;
}

}  // namespace nklab

#pragma once

#include "nklab/su3types.hpp"

namespace nklab::flag {

using Mat3c = Eigen::Matrix3cd;
using cd = std::complex<double>;

/// Element of SU(3); construction validates unitarity and unit determinant.
struct GroupElement {
  Mat3c u;

  explicit GroupElement(const Mat3c& m, double tol = 1e-12) : u(m) {
    if ((u.adjoint() * u - Mat3c::Identity()).cwiseAbs().maxCoeff() > tol)
      throw Error("GroupElement: not unitary");
    if (std::abs(u.determinant() - cd(1, 0)) > tol) throw Error("GroupElement: det != 1");
  }

  static GroupElement identity() { return GroupElement(Mat3c::Identity()); }

  GroupElement mul(const GroupElement& other) const { return GroupElement(u * other.u); }
};

/// Element of su(3); construction validates anti-Hermitian tracelessness.
struct LieAlg {
  Mat3c m;

  explicit LieAlg(const Mat3c& a, double tol = 1e-12) : m(a) {
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a + a.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
      throw Error("LieAlg: not anti-Hermitian");
    if (std::abs(a.trace()) > tol * scale) throw Error("LieAlg: trace != 0");
  }

  static LieAlg diag(double a, double b, double c) {
    Mat3c m = Mat3c::Zero();
    m(0, 0) = cd(0, a);
    m(1, 1) = cd(0, b);
    m(2, 2) = cd(0, c);
    return LieAlg(m);
  }
};

/// exp of an anti-Hermitian 3x3 matrix via the spectral decomposition of -iX.
inline Mat3c su3_exp(const Mat3c& X) {
  Eigen::SelfAdjointEigenSolver<Mat3c> es(Mat3c(cd(0, -1) * X));
  Mat3c D = Mat3c::Zero();
  for (int i = 0; i < 3; ++i) D(i, i) = std::exp(cd(0, es.eigenvalues()(i)));
  return es.eigenvectors() * D * es.eigenvectors().adjoint();
}

/// The su(3) basis adapted to F3 = SU(3)/T^2: X1..X6 span the reductive
/// complement m (dual to the invariant coframe e1..e6), X7, X8 span t.
/// Orthonormal under <a,b> = -(1/12) B(a,b) = -(1/2) tr(ab).
struct CosetFrame {
  std::array<Mat3c, 8> X;
  double c[8][8][8];  // [X_j, X_k] = sum_i c[i][j][k] X_i

  static double pairing(const Mat3c& a, const Mat3c& b) { return -0.5 * (a * b).trace().real(); }

  std::array<double, 8> coords(const Mat3c& a) const {
    std::array<double, 8> out{};
    for (int i = 0; i < 8; ++i) out[i] = pairing(a, X[i]);
    return out;
  }

  /// 1-form of the m-component over the invariant coframe.
  Form m_form(const Mat3c& a) const {
    Form f(1);
    for (int i = 0; i < 6; ++i) f[i] = pairing(a, X[i]);
    return f;
  }
};

inline CosetFrame coset_frame() {
  CosetFrame fr;
  auto E = [](int i, int j) {
    Mat3c m = Mat3c::Zero();
    m(i, j) = 1.0;
    return m;
  };
  const cd I(0, 1);
  fr.X[0] = E(0, 1) - E(1, 0);
  fr.X[1] = I * (E(0, 1) + E(1, 0));
  fr.X[2] = E(0, 2) - E(2, 0);
  fr.X[3] = I * (E(0, 2) + E(2, 0));
  fr.X[4] = E(1, 2) - E(2, 1);
  fr.X[5] = I * (E(1, 2) + E(2, 1));
  fr.X[6] = I * Eigen::Vector3cd(1, -1, 0).asDiagonal();
  fr.X[7] = (I / std::sqrt(3.0)) * Eigen::Vector3cd(1, 1, -2).asDiagonal();

  // orthonormality under -(1/12) B
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(CosetFrame::pairing(fr.X[i], fr.X[j]) - want) > 1e-12)
        throw Error("coset_frame: basis not orthonormal under -(1/12)B");
    }

  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k) {
      Mat3c br = fr.X[j] * fr.X[k] - fr.X[k] * fr.X[j];
      auto a = fr.coords(br);
      Mat3c rec = Mat3c::Zero();
      for (int i = 0; i < 8; ++i) {
        fr.c[i][j][k] = a[i];
        rec += a[i] * fr.X[i];
      }
      if ((rec - br).cwiseAbs().maxCoeff() > 1e-12)
        throw Error("coset_frame: bracket not in the span of the basis");
    }

  // Jacobi identity residual
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int cidx = 0; cidx < 8; ++cidx)
        for (int i = 0; i < 8; ++i) {
          double s = 0;
          for (int m = 0; m < 8; ++m)
            s += fr.c[i][a][m] * fr.c[m][b][cidx] + fr.c[i][b][m] * fr.c[m][cidx][a] +
                 fr.c[i][cidx][m] * fr.c[m][a][b];
          if (std::abs(s) > 1e-12) throw Error("coset_frame: Jacobi identity violated");
        }
  return fr;
}

/// Matrix coefficient functions of A = g^{-1} xi g at a point of F3:
/// A = i [ v1/2, conj(z1)/4 ; z1/4, v2/2, ... ] with the off-diagonal slots
/// carrying z_i/4. The z's are calibrated against the invariant coframe so
/// that dv1 = Im(z1 theta1 - z2 theta2) holds on the nose (the raw
/// conjugation-matrix entries satisfy dv1 = 4 Im(...) instead; see
/// zs_are_4x_matrix_entries in the tests for the exact relation).
struct CoefficientFunctions {
  double v1 = 0, v2 = 0, v3 = 0;
  cd z1, z2, z3;

  /// Rebuild A from the stored fields (inverts the slot scaling).
  Mat3c reassemble() const {
    const cd i(0, 1);
    Mat3c A;
    A << i * 0.5 * v1, i * 0.25 * std::conj(z1), i * 0.25 * z2,
        i * 0.25 * z1, i * 0.5 * v2, i * 0.25 * std::conj(z3),
        i * 0.25 * std::conj(z2), i * 0.25 * z3, i * 0.5 * v3;
    return A;
  }
};

inline CoefficientFunctions coefficients_of(const Mat3c& A) {
  const cd m4i(0, -4);
  CoefficientFunctions c;
  c.v1 = 2.0 * A(0, 0).imag();
  c.v2 = 2.0 * A(1, 1).imag();
  c.v3 = 2.0 * A(2, 2).imag();
  c.z1 = m4i * A(1, 0);
  c.z2 = m4i * A(0, 2);
  c.z3 = m4i * A(2, 1);
  return c;
}

inline CoefficientFunctions coefficients(const GroupElement& g, const LieAlg& xi) {
  return coefficients_of(g.u.adjoint() * xi.m * g.u);
}

/// Frame context for F3: structure constants, invariant coframe products,
/// Chevalley-Eilenberg operators per degree, and the invariant nearly-Kaehler
/// structure assembled from (omega0, ReOmega0).
class FlagContext {
 public:
  FlagContext(const EpsPolicy& eps = {}) : frame_(coset_frame()), theta_{ComplexForm(1), ComplexForm(1), ComplexForm(1)} {
    // theta1 = e2 - i e1, theta2 = e4 + i e3, theta3 = e6 - i e5
    theta_[0] = ComplexForm(Form::basis({2}), -1.0 * Form::basis({1}));
    theta_[1] = ComplexForm(Form::basis({4}), Form::basis({3}));
    theta_[2] = ComplexForm(Form::basis({6}), -1.0 * Form::basis({5}));

    // omega0 = (i/2) sum theta_i ^ conj(theta_i)
    ComplexForm acc = wedge(theta_[0], theta_[0].conj()) + wedge(theta_[1], theta_[1].conj()) +
                      wedge(theta_[2], theta_[2].conj());
    ComplexForm w0 = cd(0, 0.5) * acc;
    if (w0.im.linf() > 1e-14) throw ConventionMismatch("omega0 not real");
    ComplexForm Omega0 = wedge(wedge(theta_[0], theta_[1]), theta_[2]);

    build_ce_operators();

    // nearly-Kaehler exactness at the structure-constant level
    double r1 = max_abs_diff(ce_d(w0.re), 3.0 * Omega0.re);
    double r2 = max_abs_diff(ce_d(Omega0.im), -2.0 * wedge(w0.re, w0.re));
    double r3 = ce_d(Omega0.re).linf();
    if (std::max({r1, r2, r3}) > eps.algebraic * 16.0)
      throw ConventionMismatch("nearly-Kaehler equations fail at the invariant level: residuals " +
                               std::to_string(r1) + ", " + std::to_string(r2) + ", " +
                               std::to_string(r3));

    base_ = assemble_su3(w0.re, Omega0.re, eps);
    if (!base_.metric.is_identity())
      throw ConventionMismatch("invariant metric is not the identity in the coset frame");
  }

  const CosetFrame& frame() const { return frame_; }
  const SU3Structure& base() const { return base_; }
  const ComplexForm& theta(int i) const { return theta_[i]; }

  /// d on constant-coefficient m-forms (the horizontal part).
  Form ce_d(const Form& f) const { return apply(Dmm_[f.degree()], f, f.degree() + 1); }

  /// Coadjoint action of the t-basis direction t (0 or 1) on m-forms;
  /// invariant forms are exactly its kernel.
  Form ce_ad_t(const Form& f, int t) const { return apply(Adt_[t][f.degree()], f, f.degree()); }

  /// g * exp(h X_dir), dir in 0..7.
  GroupElement step(const GroupElement& g, int dir, double h) const {
    return GroupElement(g.u * su3_exp(Mat3c(h * frame_.X[dir])));
  }

 private:
  static Form apply(const Eigen::MatrixXd& M, const Form& f, int out_degree) {
    Form out(out_degree);
    for (int r = 0; r < out.size(); ++r) {
      double s = 0;
      for (int c = 0; c < f.size(); ++c) s += M(r, c) * f[c];
      out[r] = s;
    }
    return out;
  }

  // derivation extension: replace factor a of e^I by rep[i_a], with
  // (-1)^slot for the antiderivation d and no sign for the degree-0 action
  Form extend(std::uint8_t I, int k, const std::array<Form, 6>& rep, bool alternating) const {
    std::array<int, 6> idx{};
    int n = 0;
    std::uint8_t rest = I;
    while (rest) {
      idx[n++] = std::countr_zero(rest);
      rest &= rest - 1;
    }
    int out_degree = k - 1 + rep[0].degree();
    Form acc(out_degree);
    for (int a = 0; a < n; ++a) {
      Form term = Form::scalar(1.0);
      for (int b = 0; b < a; ++b) term = wedge(term, Form::basis({idx[b] + 1}));
      term = wedge(term, rep[idx[a]]);
      for (int b = a + 1; b < n; ++b) term = wedge(term, Form::basis({idx[b] + 1}));
      double sign = (alternating && (a % 2)) ? -1.0 : 1.0;
      acc += sign * term;
    }
    return acc;
  }

  void build_ce_operators() {
    // d e^i restricted to m ^ m, and the t-action 1-forms
    std::array<Form, 6> demm{Form(2), Form(2), Form(2), Form(2), Form(2), Form(2)};
    std::array<std::array<Form, 6>, 2> at{};
    at[0].fill(Form(1));
    at[1].fill(Form(1));
    const auto& T = detail::Tables::get();
    for (int i = 0; i < 6; ++i) {
      Form d(2);
      for (int p = 0; p < 15; ++p) {
        std::uint8_t m = T.masks[2][p];
        int j = std::countr_zero(m);
        int k = std::countr_zero(static_cast<std::uint8_t>(m & (m - 1)));
        d[p] = -frame_.c[i][j][k];  // -(1/2) c^i_{jk} e^jk over ordered pairs
      }
      demm[i] = d;
      for (int t = 0; t < 2; ++t) {
        Form a(1);
        for (int k = 0; k < 6; ++k) a[k] = -frame_.c[i][6 + t][k];
        at[t][i] = a;
      }
    }

    for (int k = 0; k <= 6; ++k) {
      int nk = detail::kBinom[k];
      Dmm_[k] = Eigen::MatrixXd::Zero(k < 6 ? detail::kBinom[k + 1] : 1, nk);
      Adt_[0][k] = Eigen::MatrixXd::Zero(nk, nk);
      Adt_[1][k] = Eigen::MatrixXd::Zero(nk, nk);
      if (k == 0) continue;
      for (int col = 0; col < nk; ++col) {
        std::uint8_t I = T.masks[k][col];
        if (k < 6) {
          Form dcol = extend(I, k, demm, true);
          for (int r = 0; r < dcol.size(); ++r) Dmm_[k](r, col) = dcol[r];
        }
        for (int t = 0; t < 2; ++t) {
          Form acol = extend(I, k, at[t], false);
          for (int r = 0; r < acol.size(); ++r) Adt_[t][k](r, col) = acol[r];
        }
      }
    }
    // degree 6 has no d; keep a zero row so ce_d(6-form) errors via Form ctor
    Dmm_[6] = Eigen::MatrixXd::Zero(1, 1);
  }

  CosetFrame frame_;
  std::array<ComplexForm, 3> theta_;
  SU3Structure base_;
  std::array<Eigen::MatrixXd, 7> Dmm_;
  std::array<std::array<Eigen::MatrixXd, 7>, 2> Adt_;
};

}  // namespace nklab::flag

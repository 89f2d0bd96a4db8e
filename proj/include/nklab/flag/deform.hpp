#pragma once

#include "nklab/flag/fields.hpp"
#include "nklab/mc.hpp"

namespace nklab::flag {

/// Monte Carlo record for one obstruction integral.
struct ObstructionEstimate {
  Mat3c xi;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double mean = 0;
  double stderr_ = 0;
  double idet = 0;   ///< i det(xi), real for xi in su(3); 0 when xi' != xi
  double ratio = 0;  ///< mean / idet when idet != 0
};

/// i det(xi) is real for anti-Hermitian traceless xi; the imaginary part is
/// asserted away.
inline double i_det(const LieAlg& xi) {
  cd v = cd(0, 1) * xi.m.determinant();
  double scale = std::max(1.0, std::pow(xi.m.cwiseAbs().maxCoeff(), 3));
  if (std::abs(v.imag()) > 1e-12 * scale) throw Error("i_det: unexpected imaginary part");
  return v.real();
}

/// The cubic obstruction density P = -72 v1 v2 v3 - 4 Re(z1 z2 z3).
inline double density_P(const CoefficientFunctions& c) {
  return -72.0 * c.v1 * c.v2 * c.v3 - 4.0 * (c.z1 * c.z2 * c.z3).real();
}

/// The invariant cubic i det(g^-1 xi g) written in coefficient functions
/// (the z-slots of the matrix carry z_i/4).
inline double i_det_coeffs(const CoefficientFunctions& c) {
  return 0.125 * c.v1 * c.v2 * c.v3 -
         (1.0 / 32.0) * (c.v3 * std::norm(c.z1) + c.v2 * std::norm(c.z2) + c.v1 * std::norm(c.z3)) +
         (1.0 / 32.0) * (c.z1 * c.z2 * c.z3).real();
}

/// Closed forms of the deformation pipeline: the invariant-coframe products
/// entering sigma_hat_xi, rho_xi and the quadratic corrections, precomputed
/// once per context.
class Deformations {
 public:
  explicit Deformations(const FlagContext& ctx)
      : ctx_(&ctx),
        P_{Form(2), Form(2), Form(2)},
        C_{ComplexForm(3), ComplexForm(3), ComplexForm(3)},
        G_{} {
    const cd ihalf(0, 0.5);
    for (int i = 0; i < 3; ++i) {
      ComplexForm p = ihalf * wedge(ctx.theta(i), ctx.theta(i).conj());
      if (p.im.linf() > 1e-14) throw ConventionMismatch("theta ^ conj(theta) not i-real");
      P_[i] = p.re;
    }
    // rho_xi = -1/6 Re( th1 th2 a3 + th2 th3 a1 + th3 th1 a2 ), a_i = z_j conj(th_k) + z_k conj(th_j)
    auto th = [&](int i) { return ctx.theta(i); };
    std::array<ComplexForm, 3> tt = {wedge(th(0), th(1)), wedge(th(1), th(2)),
                                     wedge(th(2), th(0))};  // th_i ^ th_j for (i,j,k) cyclic
    const double m16 = -1.0 / 6.0;
    C_[0] = cd(m16, 0) * (wedge(tt[0], th(1).conj()) + wedge(tt[2], th(2).conj()));
    C_[1] = cd(m16, 0) * (wedge(tt[0], th(0).conj()) + wedge(tt[1], th(2).conj()));
    C_[2] = cd(m16, 0) * (wedge(tt[1], th(1).conj()) + wedge(tt[2], th(0).conj()));

    // 9 Q3 = Im( sum_i conj(th_j) ^ conj(th_k) ^ beta_i ),
    // beta_i = z_i (z_i th_i - z_j th_j - z_k th_k)
    std::array<ComplexForm, 3> tb = {wedge(th(1).conj(), th(2).conj()),
                                     wedge(th(2).conj(), th(0).conj()),
                                     wedge(th(0).conj(), th(1).conj())};  // conj th_j ^ conj th_k
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l) G_[i][l] = wedge(tb[i], th(l));
  }

  const FlagContext& ctx() const { return *ctx_; }

  Form sigma_hat_at(const CoefficientFunctions& c) const {
    return c.v3 * P_[0] + c.v2 * P_[1] + c.v1 * P_[2];
  }

  Form rho_at(const CoefficientFunctions& c) const {
    Form out(3);
    const cd zs[3] = {c.z1, c.z2, c.z3};
    for (int i = 0; i < 3; ++i) out += zs[i].real() * C_[i].re - zs[i].imag() * C_[i].im;
    return out;
  }

  Form q3_at(const CoefficientFunctions& c) const {
    const cd zs[3] = {c.z1, c.z2, c.z3};
    Form out(3);
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, k = (i + 2) % 3;
      cd q[3];
      q[i] = zs[i] * zs[i];
      q[j] = -zs[i] * zs[j];
      q[k] = -zs[i] * zs[k];
      for (int l = 0; l < 3; ++l) {
        // Im(q G) = Re(q) Im(G) + Im(q) Re(G)
        out += q[l].real() * G_[i][l].im + q[l].imag() * G_[i][l].re;
      }
    }
    return (1.0 / 9.0) * out;
  }

  Form q4_at(const CoefficientFunctions& c) const {
    Form sh = sigma_hat_at(c);
    return decompose4_form(wedge(sh, sh), ctx_->base());
  }

  /// sigma_hat_xi as a closed-form field (linear in the matrix coefficients).
  FormField sigma_hat(const LieAlg& xi) const {
    const Deformations* self = this;
    return linear_matrix_field(*ctx_, xi, 2, [self](const Mat3c& A) {
      return self->sigma_hat_at(coefficients_of(A));
    });
  }

  /// rho_xi with d sigma_hat_xi = 3 rho_xi, as a closed-form field.
  FormField rho(const LieAlg& xi) const {
    const Deformations* self = this;
    return linear_matrix_field(*ctx_, xi, 3, [self](const Mat3c& A) {
      return self->rho_at(coefficients_of(A));
    });
  }

  Form q4_closed(const LieAlg& xi, const GroupElement& g) const {
    return q4_at(coefficients(g, xi));
  }

  Form q3_closed(const LieAlg& xi, const GroupElement& g) const {
    return q3_at(coefficients(g, xi));
  }

  /// Pointwise obstruction density
  ///   f(g) = <12 Q4(sigma_xi), sigma_hat_xi'> - 3 <Q3(rho_xi), * d sigma_hat_xi'>,
  /// quadratic in xi and linear in xi'. For xi' = xi it reduces to the cubic
  /// invariant P of the coefficient functions.
  double density(const LieAlg& xi, const LieAlg& xiPrime, const GroupElement& g) const {
    const SU3Structure& base = ctx_->base();
    CoefficientFunctions c = coefficients(g, xi);
    Form q4 = q4_at(c);
    Form q3 = q3_at(c);
    CoefficientFunctions cp = coefficients(g, xiPrime);
    Form shp = sigma_hat_at(cp);
    Form sdshp = star(3.0 * rho_at(cp), base.metric);  // * d sigma_hat = 3 * rho
    return 12.0 * inner(q4, shp, base.metric) - 3.0 * inner(q3, sdshp, base.metric);
  }

  double density(const LieAlg& xi, const GroupElement& g) const { return density(xi, xi, g); }

 private:
  const FlagContext* ctx_;
  std::array<Form, 3> P_;         // (i/2) theta_i ^ conj(theta_i)
  std::array<ComplexForm, 3> C_;  // rho building blocks, coefficient of z_i
  std::array<std::array<ComplexForm, 3>, 3> G_;  // conj(th_j) ^ conj(th_k) ^ th_l
};

/// Haar-distributed element of SU(3): complex Gaussian matrix, QR with the
/// R-diagonal phase fix, then division by the principal cube root of det.
inline GroupElement haar_sample(Rng& rng) {
  Mat3c A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.cnormal();
  Eigen::HouseholderQR<Mat3c> qr(A);
  Mat3c Q = qr.householderQ();
  Mat3c R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 3; ++j) {
    cd r = R(j, j);
    cd phase = std::abs(r) > 0 ? r / std::abs(r) : cd(1, 0);
    Q.col(j) *= phase;
  }
  cd det = Q.determinant();
  Q *= std::exp(cd(0, -std::arg(det) / 3.0));
  return GroupElement(Q);
}

/// Monte Carlo estimate of the obstruction pairing for (xi, xi'). Every
/// sample draws from its own (seed, index) substream and accumulation is an
/// index-ordered pairwise reduction, so the result is bit-identical for any
/// worker count.
inline ObstructionEstimate obstruction(const Deformations& defm, const LieAlg& xi,
                                       const LieAlg& xiPrime, std::size_t samples,
                                       std::uint64_t seed, int threads = 0) {
  if (samples < 100) throw Error("obstruction: needs at least 100 samples");
  if (threads <= 0) threads = mc::default_threads();

  std::vector<double> vals = mc::map_indexed(samples, threads, [&](std::size_t i) {
    Rng rng(seed, i);
    return defm.density(xi, xiPrime, haar_sample(rng));
  });
  mc::Stats st = mc::stats_of(vals);

  ObstructionEstimate est;
  est.xi = xi.m;
  est.samples = samples;
  est.seed = seed;
  est.mean = st.mean;
  est.stderr_ = st.se;
  bool same = (xi.m - xiPrime.m).cwiseAbs().maxCoeff() == 0.0;
  est.idet = same ? i_det(xi) : 0.0;
  est.ratio = (same && est.idet != 0.0) ? est.mean / est.idet : 0.0;
  return est;
}

inline ObstructionEstimate obstruction(const Deformations& defm, const LieAlg& xi,
                                       std::size_t samples, std::uint64_t seed, int threads = 0) {
  return obstruction(defm, xi, xi, samples, seed, threads);
}

/// Random su(3) element with coefficients uniform in [-1,1) over the frame.
inline LieAlg random_su3(const CosetFrame& fr, Rng& rng) {
  Mat3c m = Mat3c::Zero();
  for (int i = 0; i < 8; ++i) m += rng.uniform_pm1() * fr.X[i];
  return LieAlg(m);
}

}  // namespace nklab::flag

#pragma once

#include "nklab/forms.hpp"

namespace nklab {

/// Result of the 3-form duality map: Hitchin's quartic invariant, the induced
/// almost complex structure and the dual 3-form.
struct Dual3Result {
  double lambda;
  Endo J;
  Form rhoHat;
};

/// Standard parallel structure on R^6 ~ C^3 with coordinates
/// (x1, y1, x2, y2, x3, y3): omega0 = e12 + e34 + e56, Omega0 = dz1^dz2^dz3.
inline Form standard_omega() {
  return Form::basis({1, 2}) + Form::basis({3, 4}) + Form::basis({5, 6});
}

inline ComplexForm standard_Omega() {
  ComplexForm dz1{Form::basis({1}), Form::basis({2})};
  ComplexForm dz2{Form::basis({3}), Form::basis({4})};
  ComplexForm dz3{Form::basis({5}), Form::basis({6})};
  return wedge(wedge(dz1, dz2), dz3);
}

namespace detail {

/// Coefficient scale of a form, used for scale-invariant degeneracy checks.
inline double scale_of(const Form& f) { return std::max(f.linf(), 1e-300); }

}  // namespace detail

/// Duality map for stable 2-forms: omega -> (1/2) omega^2.
/// Instability (omega^3 = 0 within tolerance) is an error.
inline Form dual2(const Form& omega, const EpsPolicy& eps = {}) {
  if (omega.degree() != 2) throw DegreeError("dual2 expects a 2-form");
  Form w2 = wedge(omega, omega);
  Form w3 = wedge(w2, omega);
  double s = detail::scale_of(omega);
  if (std::abs(w3[0]) <= eps.stability * s * s * s)
    throw NotStable("dual2: omega^3 vanishes (degenerate 2-form)");
  return 0.5 * w2;
}

/// Duality map for stable 4-forms: the non-degenerate omega with
/// (1/2) omega^2 = sigma. Two real square roots exist; the returned one has
/// positively oriented omega^3 (relative to e123456).
///
/// Algorithm: the antisymmetric pairing B(X,Y) vol0 = (X -| sigma) ^ (Y -| sigma)
/// is proportional to the sought 2-form; the scale is solved on a
/// maximal-magnitude component of sigma and the sign fixed by orientation.
/// `vol_ref_scale` rescales the reference volume used in the intermediate
/// pairing; the answer is reference-independent and a test perturbs it.
inline Form dual4(const Form& sigma, const EpsPolicy& eps = {}, double vol_ref_scale = 1.0) {
  if (sigma.degree() != 4) throw DegreeError("dual4 expects a 4-form");
  const double s = detail::scale_of(sigma);

  // B as a 2-form: B_ij = coefficient of vol0 in (e_i -| sigma) ^ (e_j -| sigma)
  std::array<Form, 6> ctr{Form(3), Form(3), Form(3), Form(3), Form(3), Form(3)};
  for (int i = 0; i < 6; ++i) ctr[i] = contract(Vec6::Unit(i), sigma);
  Form B(2);
  const auto& T = detail::Tables::get();
  for (int idx = 0; idx < 15; ++idx) {
    std::uint8_t m = T.masks[2][idx];
    int i = std::countr_zero(m);
    int j = std::countr_zero(static_cast<std::uint8_t>(m & (m - 1)));
    B[idx] = wedge(ctr[i], ctr[j])[0] / vol_ref_scale;
  }
  // rank of B as a bilinear form; B is quadratic in sigma, so the relative
  // singular-value gap is scale-invariant
  Mat6 Bm = Mat6::Zero();
  for (int idx = 0; idx < 15; ++idx) {
    std::uint8_t m = T.masks[2][idx];
    int i = std::countr_zero(m);
    int j = std::countr_zero(static_cast<std::uint8_t>(m & (m - 1)));
    Bm(i, j) = B[idx];
    Bm(j, i) = -B[idx];
  }
  Eigen::JacobiSVD<Mat6> svd(Bm);
  double smax = svd.singularValues()(0);
  if (smax <= eps.stability * s * s || svd.singularValues()(5) <= eps.stability * smax)
    throw NotStable("dual4: degenerate pairing (sigma not stable)");

  // scale: (1/2)(B/t)^2 = sigma on the largest component of sigma
  Form BB = 0.5 * wedge(B, B);
  int imax = 0;
  for (int i = 1; i < 15; ++i)
    if (std::abs(sigma[i]) > std::abs(sigma[imax])) imax = i;
  double ratio = BB[imax] / sigma[imax];
  if (!(ratio > 0))
    throw NotStable("dual4: no consistent scale (sigma not in the stable orbit)");
  double t = std::sqrt(ratio);
  Form omega = (1.0 / t) * B;

  // consistency across all components
  Form res = 0.5 * wedge(omega, omega) - sigma;
  if (res.linf() > 1e-10 * s) throw NotStable("dual4: (1/2) omega^2 != sigma");

  // orientation of the returned root
  if (wedge(wedge(omega, omega), omega)[0] < 0) omega *= -1.0;
  return omega;
}

/// dual4 with the sign resolved by continuity against a reference 2-form
/// instead of by orientation. Used by finite-difference paths at bases of
/// either orientation.
inline Form dual4_near(const Form& sigma, const Form& reference, const EpsPolicy& eps = {}) {
  Form omega = dual4(sigma, eps);
  double ip = 0;
  for (int i = 0; i < 15; ++i) ip += omega[i] * reference[i];
  return ip >= 0 ? omega : -omega;
}

/// Duality map for stable 3-forms, following Hitchin's construction:
/// K(X) vol0 = (X -| rho) ^ rho, lambda = tr(K^2)/6. The complex-type orbit
/// has lambda < 0; there J = -K/sqrt(-lambda) and rhoHat = (1/3) J_* rho,
/// with signs pinned so that dual3(ReOmega0) = (J0, ImOmega0).
///
/// `orientation` flips the reference volume; Hitchin's J depends on the
/// ambient orientation, which for an assembled structure comes from omega^3.
inline Dual3Result dual3(const Form& rho, int orientation = +1, const EpsPolicy& eps = {},
                         double vol_ref_scale = 1.0) {
  if (rho.degree() != 3) throw DegreeError("dual3 expects a 3-form");
  const double s = detail::scale_of(rho);

  Mat6 K = Mat6::Zero();
  for (int i = 0; i < 6; ++i) {
    Form five = wedge(contract(Vec6::Unit(i), rho), rho);  // K(e_i) -| vol0
    for (int j = 0; j < 6; ++j) {
      // e_j -| e123456 = (-1)^j e^{complement}
      std::uint8_t jc = static_cast<std::uint8_t>(~(1u << j) & 0x3F);
      double sign = (j % 2) ? -1.0 : 1.0;
      K(j, i) = sign * five[detail::Tables::get().pos[jc]] * orientation / vol_ref_scale;
    }
  }

  double lambda = (K * K).trace() / 6.0;
  double s2 = s * s;
  if (lambda >= -eps.stability * s2 * s2)
    throw NotStable("dual3: lambda >= 0 (wrong open orbit or degenerate)");

  Endo J = -K / std::sqrt(-lambda);
  Form rhoHat = (1.0 / 3.0) * endo_act(J, rho);
  return {lambda, J, rhoHat};
}

/// Validated SU(3)-structure: the pair (omega, ReOmega) plus everything it
/// induces. Immutable after construction through assemble_su3.
struct SU3Structure {
  Form omega;     // degree 2
  Form reOmega;   // degree 3
  Form imOmega;   // degree 3
  Endo J;         // acts on vectors, J^2 = -1
  Metric metric;  // g(X,Y) = omega(X, JY), positive-definite
  Form vol;       // omega^3 / 6

  SU3Structure() : omega(2), reOmega(3), imOmega(3), J(Endo::Zero()), vol(6) {}
};

/// Evaluate a 2-form on a pair of vectors.
inline double eval2(const Form& a, const Vec6& X, const Vec6& Y) {
  return inner(a, wedge(to_form(X), to_form(Y)), Metric());
}

/// Assemble and validate an SU(3)-structure from the defining pair.
/// Checks, in order: stability of both forms, the wedge constraints, J^2 = -1,
/// and positive-definiteness of g = omega(. , J .).
inline SU3Structure assemble_su3(const Form& omega, const Form& reOmega, const EpsPolicy& eps = {}) {
  if (omega.degree() != 2 || reOmega.degree() != 3)
    throw DegreeError("assemble_su3 expects (2-form, 3-form)");

  Form w3 = wedge(wedge(omega, omega), omega);
  double sw = detail::scale_of(omega);
  if (std::abs(w3[0]) <= eps.stability * sw * sw * sw)
    throw NotStable("assemble_su3: omega^3 vanishes");
  int orientation = w3[0] > 0 ? +1 : -1;

  Dual3Result d3 = dual3(reOmega, orientation, eps);

  double sr = detail::scale_of(reOmega);
  double c1 = wedge(omega, reOmega).linf();
  if (c1 > eps.structural * sw * sr) throw ConstraintViolated("omega ^ ReOmega = 0", c1);

  Form volform = (1.0 / 6.0) * w3;
  double c2 = max_abs_diff(volform, 0.25 * wedge(reOmega, d3.rhoHat));
  if (c2 > eps.structural * std::abs(volform[0]))
    throw ConstraintViolated("omega^3/6 = ReOmega ^ ImOmega / 4", c2);

  double cj = (d3.J * d3.J + Mat6::Identity()).cwiseAbs().maxCoeff();
  if (cj > 1e-10) throw ConstraintViolated("J^2 = -1", cj);

  // g(X,Y) = omega(X, JY)
  Mat6 gram;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) gram(i, j) = eval2(omega, Vec6::Unit(i), Vec6(d3.J * Vec6::Unit(j)));
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> es(gram);
  if (es.eigenvalues().minCoeff() <= eps.stability * std::max(1.0, gram.cwiseAbs().maxCoeff()))
    throw MetricNotPositive("assemble_su3: induced metric not positive-definite");

  SU3Structure out;
  out.omega = omega;
  out.reOmega = reOmega;
  out.imOmega = d3.rhoHat;
  out.J = d3.J;
  out.metric = Metric(gram, orientation, eps);
  out.vol = volform;

  // the metric volume must reproduce omega^3/6
  double cv = max_abs_diff(out.metric.vol(), volform);
  if (cv > eps.structural * std::max(1.0, std::abs(volform[0])))
    throw ConstraintViolated("metric volume = omega^3/6", cv);
  return out;
}

inline SU3Structure standard_structure(const EpsPolicy& eps = {}) {
  return assemble_su3(standard_omega(), standard_Omega().re, eps);
}

}  // namespace nklab

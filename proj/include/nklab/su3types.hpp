#pragma once

#include "nklab/stable.hpp"

namespace nklab {

/// SU(3)-type components of a 2-form:
/// eta = lambda * omega + X -| ReOmega + eta0,  eta0 primitive (1,1).
struct TwoFormTypes {
  double lambda = 0;
  Vec6 X = Vec6::Zero();
  Form eta0;
  TwoFormTypes() : eta0(2) {}
};

/// SU(3)-type components of a 3-form:
/// sigma = X ^ omega + lambda * ReOmega + mu * ImOmega + rho0,  rho0 in Lambda^3_12.
struct ThreeFormTypes {
  Vec6 X = Vec6::Zero();
  double lambda = 0;
  double mu = 0;
  Form rho0;
  ThreeFormTypes() : rho0(3) {}
};

/// Intrinsic torsion classes of an SU(3)-structure, extracted from
/// (d omega, d ReOmega, d ImOmega).
struct TorsionClasses {
  double w1 = 0, w1hat = 0;
  Form w2, w2hat;  // primitive (1,1)
  Form w3;         // Lambda^3_12
  Vec6 w4 = Vec6::Zero(), w5 = Vec6::Zero();
  double residual = 0;  // max cross-channel mismatch, reported not fatal
  TorsionClasses() : w2(2), w2hat(2), w3(3) {}
};

namespace detail {

inline double star0(const Form& a, const SU3Structure& base) {
  return star(a, base.metric)[0];  // *(6-form) as a scalar
}

}  // namespace detail

/// Type decomposition of a 2-form via the wedge/star identities:
/// lambda = *(eta ^ omega^2)/6, X = -raise(*(eta ^ ImOmega))/2.
inline TwoFormTypes decompose2(const Form& eta, const SU3Structure& base) {
  if (eta.degree() != 2) throw DegreeError("decompose2 expects a 2-form");
  TwoFormTypes t;
  Form w2 = wedge(base.omega, base.omega);
  t.lambda = detail::star0(wedge(eta, w2), base) / 6.0;
  Form oneform = star(wedge(eta, base.imOmega), base.metric);
  t.X = -0.5 * base.metric.raise(to_vector(oneform));
  t.eta0 = eta - t.lambda * base.omega - contract(t.X, base.reOmega);
  return t;
}

/// Type decomposition of a 3-form:
/// JX = *(sigma ^ omega)/2, mu = -*(sigma ^ ReOmega)/4, lambda = *(sigma ^ ImOmega)/4.
inline ThreeFormTypes decompose3(const Form& sigma, const SU3Structure& base) {
  if (sigma.degree() != 3) throw DegreeError("decompose3 expects a 3-form");
  ThreeFormTypes t;
  Vec6 jx = base.metric.raise(to_vector(star(wedge(sigma, base.omega), base.metric)));
  t.X = -0.5 * (base.J * jx);
  t.mu = -0.25 * detail::star0(wedge(sigma, base.reOmega), base);
  t.lambda = 0.25 * detail::star0(wedge(sigma, base.imOmega), base);
  t.rho0 = sigma - wedge(to_form(base.metric.lower(t.X)), base.omega) - t.lambda * base.reOmega -
           t.mu * base.imOmega;
  return t;
}

inline Form reassemble(const TwoFormTypes& t, const SU3Structure& base) {
  return t.lambda * base.omega + contract(t.X, base.reOmega) + t.eta0;
}

inline Form reassemble(const ThreeFormTypes& t, const SU3Structure& base) {
  return wedge(to_form(base.metric.lower(t.X)), base.omega) + t.lambda * base.reOmega +
         t.mu * base.imOmega + t.rho0;
}

/// Invert wedging with omega on 2-forms: the unique eta with eta ^ omega = tau.
/// Channelwise from *(eta ^ omega) = -eta0 + 2 lambda omega + X -| ReOmega.
inline TwoFormTypes decompose4(const Form& tau, const SU3Structure& base, const EpsPolicy& eps = {}) {
  if (tau.degree() != 4) throw DegreeError("decompose4 expects a 4-form");
  TwoFormTypes z = decompose2(star(tau, base.metric), base);
  TwoFormTypes t;
  t.lambda = 0.5 * z.lambda;
  t.X = z.X;
  t.eta0 = -1.0 * z.eta0;
  Form residual = wedge(reassemble(t, base), base.omega) - tau;
  if (residual.linf() > eps.structural * std::max(1.0, tau.linf()))
    throw ConstraintViolated("decompose4: eta ^ omega = tau", residual.linf());
  return t;
}

inline Form decompose4_form(const Form& tau, const SU3Structure& base, const EpsPolicy& eps = {}) {
  return reassemble(decompose4(tau, base, eps), base);
}

/// The alpha map: pointwise adjoint of X -> X -| ReOmega, normalized by
/// alpha(X -| ReOmega) = 2X. Inputs outside Lambda^2_6 are projected first;
/// this keeps alpha total, matching its use inside the Dirac operator where
/// d(JX) is of mixed type.
inline Vec6 alpha(const Form& eta, const SU3Structure& base) {
  if (eta.degree() != 2) throw DegreeError("alpha expects a 2-form");
  return 2.0 * decompose2(eta, base).X;
}

/// Linearization of the 4-form duality at the base: for sigma = (1/2) omega^2
/// moving by sigmadot, the dual omega moves by (1/2)*s1 + *s6 - *s8.
inline Form lin_dual4(const Form& sigmaDot, const SU3Structure& base) {
  if (sigmaDot.degree() != 4) throw DegreeError("lin_dual4 expects a 4-form");
  TwoFormTypes z = decompose2(star(sigmaDot, base.metric), base);
  return 0.5 * z.lambda * base.omega + contract(z.X, base.reOmega) - z.eta0;
}

/// Linearization of the 3-form duality at the base:
/// rhohat = *(rho6 + rho1+1) - *rho12.
inline Form lin_dual3(const Form& rhoDot, const SU3Structure& base) {
  if (rhoDot.degree() != 3) throw DegreeError("lin_dual3 expects a 3-form");
  ThreeFormTypes t = decompose3(rhoDot, base);
  Form nice = reassemble(t, base) - t.rho0;  // rho6 + rho1(+)1
  return star(nice - t.rho0, base.metric);
}

/// Finite-difference step sizes for the duality derivatives.
struct FdPolicy {
  double h1 = 1e-4;  ///< central first derivatives
  double h2 = 1e-2;  ///< central second derivatives, one Richardson level
};

namespace detail {

template <class F>
Form second_derivative(F&& f, const Form& at0, double h) {
  // Richardson-extrapolated central second difference, O(h^4)
  auto d2 = [&](double step) {
    Form num = f(step) + f(-step) - 2.0 * at0;
    return (1.0 / (step * step)) * num;
  };
  Form coarse = d2(h);
  Form fine = d2(0.5 * h);
  return (1.0 / 3.0) * (4.0 * fine - coarse);
}

}  // namespace detail

/// Quadratic correction of the 3-form duality: the dual of ReOmega + e*rhodot
/// expands as ImOmega + e*lin_dual3(rhodot) - (e^2/2) Q3(rhodot) + O(e^3).
inline Form quad_dual3(const Form& rhoDot, const SU3Structure& base, const FdPolicy& fd = {},
                       const EpsPolicy& eps = {}) {
  if (rhoDot.degree() != 3) throw DegreeError("quad_dual3 expects a 3-form");
  const int orient = base.metric.orientation();
  try {
    Form d2 = detail::second_derivative(
        [&](double e) { return dual3(base.reOmega + e * rhoDot, orient, eps).rhoHat; }, base.imOmega,
        fd.h2);
    return -1.0 * d2;
  } catch (const NotStable&) {
    throw StepTooLarge("quad_dual3: finite-difference step left the stable orbit");
  }
}

/// Quadratic correction of the 4-form duality: the dual of
/// (1/2) omega^2 + e*sigmadot expands as
/// omega + e*lin_dual4(sigmadot) - (e^2/2) Q4(sigmadot) + O(e^3).
inline Form quad_dual4(const Form& sigmaDot, const SU3Structure& base, const FdPolicy& fd = {},
                       const EpsPolicy& eps = {}) {
  if (sigmaDot.degree() != 4) throw DegreeError("quad_dual4 expects a 4-form");
  Form sigma0 = 0.5 * wedge(base.omega, base.omega);
  try {
    Form d2 = detail::second_derivative(
        [&](double e) { return dual4_near(sigma0 + e * sigmaDot, base.omega, eps); }, base.omega,
        fd.h2);
    return -1.0 * d2;
  } catch (const NotStable&) {
    throw StepTooLarge("quad_dual4: finite-difference step left the stable orbit");
  }
}

/// Split the exterior derivatives of the defining forms into the five
/// intrinsic torsion classes. Cross-channel inconsistencies end up in
/// `residual`, not in an exception.
inline TorsionClasses torsion_classes(const Form& domega, const Form& dReOmega, const Form& dImOmega,
                                      const SU3Structure& base) {
  TorsionClasses w;

  // d omega = 3 w1 ReOmega + 3 w1hat ImOmega + w3 + w4 ^ omega
  ThreeFormTypes a = decompose3(domega, base);
  w.w1 = a.lambda / 3.0;
  w.w1hat = a.mu / 3.0;
  w.w4 = a.X;
  w.w3 = a.rho0;

  // d ReOmega = 2 w1hat omega^2 + w5 ^ ReOmega + w2 ^ omega
  //           = (2 w1hat omega + (J w5) -| ReOmega + w2) ^ omega
  TwoFormTypes b = decompose4(dReOmega, base);
  double w1hat_b = b.lambda / 2.0;
  Vec6 w5_b = -(base.J * b.X);
  w.w2 = b.eta0;

  // d ImOmega = -2 w1 omega^2 - (J w5) ^ ReOmega + w2hat ^ omega
  //           = (-2 w1 omega + w5 -| ReOmega + w2hat) ^ omega
  TwoFormTypes c = decompose4(dImOmega, base);
  double w1_c = -c.lambda / 2.0;
  Vec6 w5_c = c.X;
  w.w2hat = c.eta0;

  w.w5 = 0.5 * (w5_b + w5_c);
  w.residual = std::max({std::abs(w1hat_b - w.w1hat), std::abs(w1_c - w.w1),
                         (w5_b - w5_c).cwiseAbs().maxCoeff()});
  return w;
}

/// Fault-injection hook for the identity suite: `flipped` negates every Hodge
/// star inside the suite's own evaluation path so a reader can watch the star
/// identity group fail while the rest stands.
enum class StarConvention { standard, flipped };

/// The executable identity suite: every algebraic lemma the toolkit relies on,
/// evaluated on seeded random inputs against the given base structure.
/// Residuals are relative to operand scale; pass iff all within tolerance.
inline SuiteReport identity_suite(const SU3Structure& base, int samples, std::uint64_t seed,
                                  const EpsPolicy& eps = {},
                                  StarConvention convention = StarConvention::standard) {
  const double tol = eps.duality;
  const Metric& g = base.metric;
  const double flip = convention == StarConvention::flipped ? -1.0 : 1.0;
  auto st = [&](const Form& f) { return flip * star(f, g); };

  SuiteReport rep;
  rep.checks.reserve(32);
  auto add = [&](const std::string& name, const std::string& anchor) {
    rep.checks.push_back({name, 0.0, tol, anchor, true});
    return rep.checks.size() - 1;
  };
  auto upd = [&](std::size_t i, double abs_err, double scale) {
    Check& c = rep.checks[i];
    c.max_abs_err = std::max(c.max_abs_err, abs_err / std::max(1.0, scale));
    c.pass = c.max_abs_err <= c.tolerance;
  };
  auto updf = [&](std::size_t i, const Form& got, const Form& want) {
    upd(i, max_abs_diff(got, want), std::max(got.linf(), want.linf()));
  };

  const Form& w = base.omega;
  const Form& re = base.reOmega;
  const Form& im = base.imOmega;
  Form w2 = wedge(w, w);
  const Endo& J = base.J;

  // fixed-input identities
  {
    auto c = add("hodge.omega", "*omega = omega^2/2");
    updf(c, st(w), 0.5 * w2);
    auto c2 = add("hodge.volumeforms", "*ReOmega = ImOmega, *ImOmega = -ReOmega");
    updf(c2, st(re), im);
    updf(c2, st(im), -1.0 * re);
    auto c3 = add("norms", "|omega|^2 = 3, |ReOmega|^2 = 4");
    upd(c3, std::abs(inner(w, w, g) - 3.0), 1.0);
    upd(c3, std::abs(inner(re, re, g) - 4.0), 1.0);
    auto c4 = add("volume", "omega^3/6 = ReOmega ^ ImOmega / 4");
    updf(c4, (1.0 / 6.0) * wedge(w2, w), 0.25 * wedge(re, im));
    auto c5 = add("j.structure", "J_* ReOmega = 3 ImOmega, J^2 = -1");
    updf(c5, endo_act(J, re), 3.0 * im);
    upd(c5, (J * J + Mat6::Identity()).cwiseAbs().maxCoeff(), 1.0);
  }

  Rng rng(seed);
  auto h2 = add("hodge.contraction", "*(X -| ReOmega) = -JX ^ ReOmega = X ^ ImOmega");
  auto h3 = add("hodge.primitive11", "*(eta0 ^ omega) = -eta0");
  auto h4 = add("hodge.xwedge", "*(X ^ omega) = X -| omega^2 / 2 = JX ^ omega");
  auto h6 = add("hodge.lambda312", "*(S_ReOmega) = -S_ImOmega = (JS)_ReOmega");
  auto t1 = add("twoform.wedge.omega", "*(eta ^ omega) = -eta0 + 2 lambda omega + X -| ReOmega");
  auto t2 = add("twoform.norm", "*(eta ^ eta ^ omega) = -|eta0|^2 + 6 lambda^2 + 2|X|^2");
  auto t3 = add("twoform.volumeforms", "*(eta ^ ReOmega) = 2JX, *(eta ^ ImOmega) = -2X");
  auto t4 = add("twoform.omega2", "*(eta ^ omega^2) = 6 lambda");
  auto t5 = add("twoform.reassembly", "eta = lambda omega + X -| ReOmega + eta0, eta0 primitive (1,1)");
  auto s1 = add("threeform.wedge.omega", "*(sigma ^ omega) = 2JX");
  auto s2 = add("threeform.volumeforms", "*(sigma ^ ReOmega) = -4 mu, *(sigma ^ ImOmega) = 4 lambda");
  auto s3 = add("threeform.purity", "rho0 ^ omega = 0 = rho0 ^ Omega");
  auto d1 = add("contraction.star", "*(X ^ sigma) = (-1)^p X -| *sigma");
  auto d2 = add("contraction.wedge", "(X -| ReOmega) ^ omega = -JX ^ ReOmega");
  auto d3 = add("contraction.volumeforms",
                "(X -| ReOmega) ^ ReOmega = X ^ omega^2, (X -| ReOmega) ^ ImOmega = JX ^ omega^2");
  auto d4 = add("contraction.dual", "*Y = JY ^ omega^2 / 2");
  auto d5 = add("contraction.norm", "<X -| ReOmega, X -| ReOmega> = 2|X|^2");
  auto a1 = add("alpha.normalization", "eta = alpha(eta) -| ReOmega / 2 on Lambda^2_6");
  auto l1 = add("lin.dual4.defining", "omega ^ lin_dual4(sigmadot) = sigmadot");
  auto l2 = add("lin.dual4.equivariant", "lin_dual4(A_(omega^2/2)) = A_omega");
  auto l3 = add("lin.dual3.equivariant", "lin_dual3(A_ReOmega) = A_ImOmega");

  for (int n = 0; n < samples; ++n) {
    Vec6 X = random_vector(rng);
    Form Xf = to_form(g.lower(X));
    Vec6 JX = J * X;
    Form JXf = to_form(g.lower(JX));

    // Hodge-star lemma
    Form xre = contract(X, re);
    updf(h2, st(xre), -1.0 * wedge(JXf, re));
    updf(h2, st(xre), wedge(Xf, im));
    Form eta0 = decompose2(random_form(2, rng), base).eta0;
    updf(h3, st(wedge(eta0, w)), -1.0 * eta0);
    updf(h4, st(wedge(Xf, w)), 0.5 * contract(X, w2));
    updf(h4, st(wedge(Xf, w)), wedge(JXf, w));

    if (g.is_identity()) {
      // random symmetric S anticommuting with J: S = A + JAJ with A symmetric
      Mat6 A;
      for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) A(i, j) = A(j, i) = rng.uniform_pm1();
      Endo S = A + J * A * J;
      Form sre = endo_act(S, re);
      updf(h6, st(sre), -1.0 * endo_act(S, im));
      updf(h6, st(sre), endo_act(Endo(J * S), re));
    }

    // 2-form lemma
    Form eta = random_form(2, rng);
    TwoFormTypes tt = decompose2(eta, base);
    Form xre2 = contract(tt.X, re);
    updf(t1, st(wedge(eta, w)), -1.0 * tt.eta0 + 2.0 * tt.lambda * w + xre2);
    double lhs = detail::star0(wedge(wedge(eta, eta), w), base) * flip;
    double rhs = -inner(tt.eta0, tt.eta0, g) + 6.0 * tt.lambda * tt.lambda +
                 2.0 * tt.X.dot(g.gram() * tt.X);
    upd(t2, std::abs(lhs - rhs), std::abs(rhs));
    updf(t3, st(wedge(eta, re)), 2.0 * to_form(g.lower(J * tt.X)));
    updf(t3, st(wedge(eta, im)), -2.0 * to_form(g.lower(tt.X)));
    upd(t4, std::abs(detail::star0(wedge(eta, w2), base) * flip - 6.0 * tt.lambda),
        std::abs(tt.lambda));
    updf(t5, reassemble(tt, base), eta);
    upd(t5, wedge(tt.eta0, w2).linf(), tt.eta0.linf());
    upd(t5, wedge(tt.eta0, re).linf(), tt.eta0.linf());

    // 3-form lemma
    Form sig = random_form(3, rng);
    ThreeFormTypes th = decompose3(sig, base);
    updf(s1, st(wedge(sig, w)), 2.0 * to_form(g.lower(J * th.X)));
    upd(s2, std::abs(detail::star0(wedge(sig, re), base) * flip + 4.0 * th.mu), std::abs(th.mu));
    upd(s2, std::abs(detail::star0(wedge(sig, im), base) * flip - 4.0 * th.lambda),
        std::abs(th.lambda));
    upd(s3, wedge(th.rho0, w).linf(), th.rho0.linf());
    upd(s3, wedge(th.rho0, re).linf(), th.rho0.linf());
    upd(s3, wedge(th.rho0, im).linf(), th.rho0.linf());

    // contraction identities
    int p = 1 + static_cast<int>(rng.next_u64() % 5);
    Form sp = random_form(p, rng);
    updf(d1, st(wedge(Xf, sp)), (p % 2 ? -1.0 : 1.0) * contract(X, st(sp)));
    updf(d2, wedge(xre, w), -1.0 * wedge(JXf, re));
    updf(d3, wedge(xre, re), wedge(Xf, w2));
    updf(d3, wedge(xre, im), wedge(JXf, w2));
    updf(d4, st(Xf), 0.5 * wedge(JXf, w2));
    upd(d5, std::abs(inner(xre, xre, g) - 2.0 * X.dot(g.gram() * X)), X.dot(g.gram() * X));

    // alpha normalization
    Vec6 ax = alpha(xre, base);
    upd(a1, (ax - 2.0 * X).cwiseAbs().maxCoeff(), X.cwiseAbs().maxCoeff());
    updf(a1, 0.5 * contract(ax, re), xre);

    // linearized duality: defining property and GL-equivariance. The orbit of
    // a stable form is open, so endomorphism directions span every variation.
    Form sdot = random_form(4, rng);
    Form shat = flip * lin_dual4(sdot, base);
    updf(l1, wedge(w, shat), sdot);
    Mat6 A;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) A(i, j) = rng.uniform_pm1();
    updf(l2, flip * lin_dual4(endo_act(A, 0.5 * w2), base), endo_act(A, w));
    updf(l3, flip * lin_dual3(endo_act(A, re), base), endo_act(A, im));
  }

  return rep;
}

}  // namespace nklab

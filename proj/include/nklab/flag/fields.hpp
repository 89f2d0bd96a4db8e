#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nklab/flag/frame.hpp"

namespace nklab::flag {

enum class FieldKind {
  closed_form,        ///< exact directional derivatives of every order
  finite_difference,  ///< derivatives by nested central differences
};

/// A k-form field on F3: an evaluation map from group elements to coefficient
/// arrays over the invariant coframe e1..e6, together with iterated
/// left-invariant directional derivatives. `dirs` lists derivative directions
/// outermost first: eval(g, {a,b}) = (E_a E_b phi)(g).
class FormField {
 public:
  using Eval = std::function<Form(const GroupElement&, std::span<const int>)>;

  FormField(int degree, FieldKind kind, Eval eval)
      : degree_(degree), kind_(kind), eval_(std::move(eval)) {}

  int degree() const { return degree_; }
  FieldKind kind() const { return kind_; }

  Form operator()(const GroupElement& g) const { return eval_(g, {}); }
  Form deriv(const GroupElement& g, std::span<const int> dirs) const { return eval_(g, dirs); }

 private:
  int degree_;
  FieldKind kind_;
  Eval eval_;
};

/// Field whose coefficients are a fixed linear function of A = g^{-1} xi g.
/// Matrix coefficients differentiate exactly: E_d A = [A, X_d], so iterated
/// derivatives are iterated commutators.
inline FormField linear_matrix_field(const FlagContext& ctx, const LieAlg& xi, int degree,
                                     std::function<Form(const Mat3c&)> L) {
  const auto X = ctx.frame().X;
  Mat3c xim = xi.m;
  return FormField(degree, FieldKind::closed_form,
                   [X, xim, L = std::move(L)](const GroupElement& g, std::span<const int> dirs) {
                     Mat3c A = g.u.adjoint() * xim * g.u;
                     for (int d : dirs) A = A * X[d] - X[d] * A;
                     return L(A);
                   });
}

/// Constant (invariant) field.
inline FormField constant_field(const Form& value) {
  return FormField(value.degree(), FieldKind::closed_form,
                   [value](const GroupElement&, std::span<const int> dirs) {
                     return dirs.empty() ? value : Form(value.degree());
                   });
}

/// Wrap a bare evaluation map; derivatives fall back to nested central
/// differences along g exp(t X_d) with step h.
inline FormField fd_field(const FlagContext& ctx, int degree, double h,
                          std::function<Form(const GroupElement&)> point_eval) {
  struct Rec {
    const FlagContext* ctx;
    double h;
    std::function<Form(const GroupElement&)> f;
    Form eval(const GroupElement& g, std::span<const int> dirs) const {
      if (dirs.empty()) return f(g);
      auto rest = dirs.subspan(1);
      Form plus = eval(ctx->step(g, dirs[0], h), rest);
      Form minus = eval(ctx->step(g, dirs[0], -h), rest);
      return (1.0 / (2.0 * h)) * (plus - minus);
    }
  };
  Rec r{&ctx, h, std::move(point_eval)};
  return FormField(degree, FieldKind::finite_difference,
                   [r](const GroupElement& g, std::span<const int> dirs) { return r.eval(g, dirs); });
}

inline FormField scale_field(double t, const FormField& phi) {
  return FormField(phi.degree(), phi.kind(),
                   [t, phi](const GroupElement& g, std::span<const int> dirs) {
                     return t * phi.deriv(g, dirs);
                   });
}

inline FormField sum_fields(const FormField& a, const FormField& b) {
  FieldKind k = (a.kind() == FieldKind::closed_form && b.kind() == FieldKind::closed_form)
                    ? FieldKind::closed_form
                    : FieldKind::finite_difference;
  return FormField(a.degree(), k, [a, b](const GroupElement& g, std::span<const int> dirs) {
    return a.deriv(g, dirs) + b.deriv(g, dirs);
  });
}

/// Apply a constant coefficient-space linear map pointwise; commutes with
/// left-invariant derivatives.
inline FormField map_field(const FormField& phi, int out_degree,
                           std::function<Form(const Form&)> map) {
  return FormField(out_degree, phi.kind(),
                   [phi, map = std::move(map)](const GroupElement& g, std::span<const int> dirs) {
                     return map(phi.deriv(g, dirs));
                   });
}

inline FormField star_field(const FormField& phi, const FlagContext& ctx) {
  const Metric& m = ctx.base().metric;
  return map_field(phi, 6 - phi.degree(), [&m](const Form& f) { return star(f, m); });
}

/// Pointwise product of a scalar field with a form field. Derivatives follow
/// the Leibniz rule: each direction applies to exactly one factor, with the
/// relative order inside each factor preserved.
inline FormField product_field(const FormField& f, const FormField& phi) {
  if (f.degree() != 0) throw DegreeError("product_field: first factor must be a scalar field");
  FieldKind k = (f.kind() == FieldKind::closed_form && phi.kind() == FieldKind::closed_form)
                    ? FieldKind::closed_form
                    : FieldKind::finite_difference;
  return FormField(phi.degree(), k, [f, phi](const GroupElement& g, std::span<const int> dirs) {
    const std::size_t n = dirs.size();
    if (n > 20) throw Error("product_field: derivative order too large");
    Form acc(phi.degree());
    std::vector<int> left, right;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      left.clear();
      right.clear();
      for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? left : right).push_back(dirs[i]);
      double fval = f.deriv(g, left)[0];
      if (fval == 0.0) continue;
      acc += fval * phi.deriv(g, right);
    }
    return acc;
  });
}

/// Exterior derivative as a field:
/// (d phi)(g) = sum_i e^i ^ (E_i phi)(g) + ce_d(phi(g)), i over m-directions.
inline FormField d_as_field(const FormField& phi, const FlagContext& ctx) {
  return FormField(phi.degree() + 1, phi.kind(),
                   [phi, &ctx](const GroupElement& g, std::span<const int> dirs) {
                     std::vector<int> sub(dirs.begin(), dirs.end());
                     sub.push_back(0);
                     Form acc = ctx.ce_d(phi.deriv(g, dirs));
                     for (int i = 0; i < 6; ++i) {
                       sub.back() = i;  // innermost derivative
                       acc += wedge(Form::basis({i + 1}), phi.deriv(g, sub));
                     }
                     return acc;
                   });
}

inline FormField codiff_as_field(const FormField& phi, const FlagContext& ctx) {
  // d* = -*d* in dimension 6, every degree
  return scale_field(-1.0, star_field(d_as_field(star_field(phi, ctx), ctx), ctx));
}

struct DiffOptions {
  bool check_horizontal = false;  ///< verify t-components vanish; throws if not
  double horizontal_tol = 1e-6;
};

/// Pointwise exterior derivative. The two t-directions do not enter the
/// horizontal part; for a basic field they must cancel against the coadjoint
/// action, which `check_horizontal` verifies.
inline Form d_field(const FormField& phi, const GroupElement& g, const FlagContext& ctx,
                    const DiffOptions& opt = {}) {
  Form acc = ctx.ce_d(phi(g));
  int dir[1];
  for (int i = 0; i < 6; ++i) {
    dir[0] = i;
    acc += wedge(Form::basis({i + 1}), phi.deriv(g, std::span<const int>(dir, 1)));
  }
  if (opt.check_horizontal) {
    for (int t = 0; t < 2; ++t) {
      dir[0] = 6 + t;
      Form res = phi.deriv(g, std::span<const int>(dir, 1)) + ctx.ce_ad_t(phi(g), t);
      if (res.linf() > opt.horizontal_tol * std::max(1.0, phi(g).linf()))
        throw HorizontalityViolated("d_field: field is not basic (t-residual " +
                                    std::to_string(res.linf()) + ")");
    }
  }
  return acc;
}

/// Horizontality residual of a field at a point (max over both t-directions).
inline double horizontality_residual(const FormField& phi, const GroupElement& g,
                                     const FlagContext& ctx) {
  double r = 0;
  int dir[1];
  for (int t = 0; t < 2; ++t) {
    dir[0] = 6 + t;
    r = std::max(r,
                 (phi.deriv(g, std::span<const int>(dir, 1)) + ctx.ce_ad_t(phi(g), t)).linf());
  }
  return r;
}

inline Form codiff_field(const FormField& phi, const GroupElement& g, const FlagContext& ctx,
                         const DiffOptions& opt = {}) {
  const Metric& m = ctx.base().metric;
  return -1.0 * star(d_field(star_field(phi, ctx), g, ctx, opt), m);
}

/// Hodge Laplacian d d* + d* d. Inner layers go through the field
/// combinators, so closed-form fields differentiate exactly and only
/// finite-difference fields pay nested-step noise.
inline Form laplacian_field(const FormField& phi, const GroupElement& g, const FlagContext& ctx) {
  if (phi.degree() == 0) return codiff_field(d_as_field(phi, ctx), g, ctx);
  if (phi.degree() == 6) return d_field(codiff_as_field(phi, ctx), g, ctx);
  Form dd_star = d_field(codiff_as_field(phi, ctx), g, ctx);
  Form star_dd = codiff_field(d_as_field(phi, ctx), g, ctx);
  return dd_star + star_dd;
}

/// Killing field of the left SU(3) action, metric-dualized: at g the 1-form
/// with coefficients <g^{-1} xi g, X_i>, i = 1..6.
inline FormField killing_field(const FlagContext& ctx, const LieAlg& xi) {
  const CosetFrame& fr = ctx.frame();
  return linear_matrix_field(ctx, xi, 1, [&fr](const Mat3c& A) { return fr.m_form(A); });
}

/// Scalar matrix-coefficient fields v_i as degree-0 forms.
inline FormField v_field(const FlagContext& ctx, const LieAlg& xi, int which) {
  return linear_matrix_field(ctx, xi, 0, [which](const Mat3c& A) {
    CoefficientFunctions c = coefficients_of(A);
    double v = which == 1 ? c.v1 : which == 2 ? c.v2 : c.v3;
    return Form::scalar(v);
  });
}

struct DiracValue {
  Form vector_part;  // 1-form
  double f_part;
  double g_part;
};

/// The Dirac-type operator
///   D(X, f, g) = ( alpha(dJX)/2 + 3X + df + J dg,  d*X + 6f,  d*(JX) - 6g )
/// evaluated pointwise. X enters as a (metric-dual) 1-form field; J on the
/// vector field acts on coefficients, while "J dg" is the covector action,
/// i.e. -J on the coefficients of dg ((JX)^flat = -J X^flat).
inline DiracValue dirac(const FormField& Xf, const FormField& f, const FormField& gfun,
                        const GroupElement& g, const FlagContext& ctx) {
  const SU3Structure& base = ctx.base();
  const Endo& J = base.J;

  auto jvec = [&J](const Form& one) { return to_form(Vec6(J * to_vector(one))); };
  FormField JX = map_field(Xf, 1, jvec);

  Form dJX = d_field(JX, g, ctx);
  Vec6 a = alpha(dJX, base);

  Form slot1 = 0.5 * to_form(a) + 3.0 * Xf(g);
  slot1 += d_field(f, g, ctx);
  slot1 += -1.0 * jvec(d_field(gfun, g, ctx));  // covector J

  double slot2 = codiff_field(Xf, g, ctx)[0] + 6.0 * f(g)[0];
  double slot3 = codiff_field(JX, g, ctx)[0] - 6.0 * gfun(g)[0];
  return {slot1, slot2, slot3};
}

}  // namespace nklab::flag

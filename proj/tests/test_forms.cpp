#include <catch2/catch_amalgamated.hpp>

#include "nklab/forms.hpp"

using namespace nklab;

namespace {

// ---------------------------------------------------------------------------
// Independent oracles.
// ---------------------------------------------------------------------------

// Evaluate a k-form on k (possibly repeated, unsorted) basis indices straight
// from the definition, without going through wedge/contract code paths.
double eval_on_basis(const Form& a, std::span<int> idx) {
  std::array<int, 6> t{};
  std::copy(idx.begin(), idx.end(), t.begin());
  int sign = detail::sort_sign(std::span<int>(t.data(), idx.size()));
  if (sign == 0) return 0.0;
  std::uint8_t m = detail::mask_of(std::span<const int>(t.data(), idx.size()));
  return sign * a[detail::Tables::get().pos[m]];
}

// Interior product from the definition (X -| a)(e_{i2},..,e_ik) = a(X, e_i2,..).
Form contract_oracle(const Vec6& X, const Form& a) {
  const int k = a.degree();
  Form out(k - 1);
  const auto& T = detail::Tables::get();
  for (int io = 0; io < out.size(); ++io) {
    std::array<int, 6> idx{};
    int n = 0;
    std::uint8_t rest = T.masks[k - 1][io];
    while (rest) {
      idx[1 + n++] = std::countr_zero(rest);
      rest &= rest - 1;
    }
    double acc = 0;
    for (int m = 0; m < 6; ++m) {
      idx[0] = m;
      acc += X[m] * eval_on_basis(a, std::span<int>(idx.data(), k));
    }
    out[io] = acc;
  }
  return out;
}

// S_* action from the definition, evaluated slotwise on basis tuples.
Form endo_oracle(const Endo& S, const Form& a) {
  const int k = a.degree();
  Form out(k);
  const auto& T = detail::Tables::get();
  for (int io = 0; io < out.size(); ++io) {
    std::array<int, 6> idx{};
    int n = 0;
    std::uint8_t rest = T.masks[k][io];
    while (rest) {
      idx[n++] = std::countr_zero(rest);
      rest &= rest - 1;
    }
    double acc = 0;
    for (int p = 0; p < n; ++p) {
      for (int m = 0; m < 6; ++m) {
        std::array<int, 6> t{};
        std::copy(idx.begin(), idx.begin() + n, t.begin());
        t[p] = m;
        acc -= S(m, idx[p]) * eval_on_basis(a, std::span<int>(t.data(), n));
      }
    }
    out[io] = acc;
  }
  return out;
}

// Standard C^3 structure built through complex wedges (dz1 ^ dz2 ^ dz3),
// coordinates ordered (x1, y1, x2, y2, x3, y3).
ComplexForm standard_dz(int i) {
  return {Form::basis({2 * i + 1}), Form::basis({2 * i + 2})};
}

Form std_omega() {
  return Form::basis({1, 2}) + Form::basis({3, 4}) + Form::basis({5, 6});
}

ComplexForm std_Omega() {
  return wedge(wedge(standard_dz(0), standard_dz(1)), standard_dz(2));
}

Endo std_J() {
  Endo J = Endo::Zero();
  for (int b = 0; b < 3; ++b) {
    J(2 * b + 1, 2 * b) = 1;
    J(2 * b, 2 * b + 1) = -1;
  }
  return J;
}

double relerr(const Form& a, const Form& b) {
  return max_abs_diff(a, b) / std::max({1.0, a.linf(), b.linf()});
}

Metric random_metric(Rng& rng) {
  Mat6 A;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = rng.uniform_pm1();
  Mat6 G = A.transpose() * A + 0.3 * Mat6::Identity();
  return Metric(G, rng.uniform() < 0.5 ? 1 : -1);
}

}  // namespace

TEST_CASE("basis forms and multi-index bookkeeping") {
  Form e12 = Form::basis({1, 2});
  CHECK(e12.degree() == 2);
  CHECK(e12.coeff({1, 2}) == 1.0);
  CHECK(e12.coeff({2, 1}) == -1.0);
  CHECK(Form::basis({2, 1}).coeff({1, 2}) == -1.0);
  CHECK(Form::basis({1, 3, 5}).size() == 20);
  CHECK_THROWS_AS(Form::basis({1, 1}), DegreeError);
}

TEST_CASE("wedge: basis case, powers of omega, graded structure") {
  CHECK(max_abs_diff(wedge(Form::basis({1}), Form::basis({2})), Form::basis({1, 2})) == 0.0);

  Form w = std_omega();
  Form w3 = wedge(wedge(w, w), w);
  CHECK(max_abs_diff(w3, Form::basis({1, 2, 3, 4, 5, 6}, 6.0)) < 1e-14);

  // volume normalization of the standard structure: (1/6) w^3 = (1/4) ReO ^ ImO
  ComplexForm O = std_Omega();
  Form lhs = (1.0 / 6.0) * w3;
  Form rhs = 0.25 * wedge(O.re, O.im);
  CHECK(relerr(lhs, rhs) < 1e-15);

  CHECK_THROWS_AS(wedge(w3, Form::basis({1})), DegreeError);
}

TEST_CASE("wedge properties on random forms") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    int j = static_cast<int>(rng.next_u64() % 4);
    int k = static_cast<int>(rng.next_u64() % (7 - j > 4 ? 4 : 7 - j));
    Form a = random_form(j, rng), b = random_form(k, rng);
    // graded commutativity
    double sign = (j * k) % 2 ? -1.0 : 1.0;
    CHECK(relerr(wedge(a, b), sign * wedge(b, a)) < 1e-12);
    // bilinearity
    Form a2 = random_form(j, rng);
    CHECK(relerr(wedge(a + a2, b), wedge(a, b) + wedge(a2, b)) < 1e-12);
    // associativity
    int l = static_cast<int>(rng.next_u64() % 2);
    if (j + k + l <= 6) {
      Form c = random_form(l, rng);
      CHECK(relerr(wedge(wedge(a, b), c), wedge(a, wedge(b, c))) < 1e-12);
    }
  }
}

TEST_CASE("contract: basis case, frozen ReOmega contraction, antiderivation") {
  CHECK(max_abs_diff(contract(Vec6::Unit(0), Form::basis({1, 2})), Form::basis({2})) == 0.0);
  CHECK_THROWS_AS(contract(Vec6::Unit(0), Form::scalar(1.0)), DegreeError);

  ComplexForm O = std_Omega();
  // frozen from the oracle: d1 -| ReOmega0 = e35 - e46
  Form expected = Form::basis({3, 5}) - Form::basis({4, 6});
  CHECK(max_abs_diff(contract(Vec6::Unit(0), O.re), expected) == 0.0);
  CHECK(max_abs_diff(contract_oracle(Vec6::Unit(0), O.re), expected) == 0.0);

  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + static_cast<int>(rng.next_u64() % 5);
    Form a = random_form(k, rng);
    Vec6 X = random_vector(rng);
    CHECK(relerr(contract(X, a), contract_oracle(X, a)) < 1e-13);
    // X -| X -| a = 0
    if (k >= 2) CHECK(contract(X, contract(X, a)).linf() < 1e-13);
    // Leibniz: X -| (a ^ b) = (X -| a) ^ b + (-1)^k a ^ (X -| b)
    int l = 1 + static_cast<int>(rng.next_u64() % (6 - k >= 1 ? (6 - k) : 1));
    if (k + l <= 6) {
      Form b = random_form(l, rng);
      Form lhs = contract(X, wedge(a, b));
      double sgn = (k % 2) ? -1.0 : 1.0;
      Form rhs = wedge(contract(X, a), b) + sgn * wedge(a, contract(X, b));
      CHECK(relerr(lhs, rhs) < 1e-12);
    }
  }
}

TEST_CASE("hodge star with the identity metric") {
  Metric id;
  CHECK(max_abs_diff(star(Form::basis({1, 2}), id), Form::basis({3, 4, 5, 6})) == 0.0);

  Form w = std_omega();
  CHECK(relerr(star(w, id), 0.5 * wedge(w, w)) < 1e-15);

  // star . star = (-1)^{k(6-k)}
  Rng rng(11);
  for (int k = 0; k <= 6; ++k) {
    Form a = random_form(k, rng);
    double sign = (k * (6 - k)) % 2 ? -1.0 : 1.0;
    CHECK(relerr(star(star(a, id), id), sign * a) < 1e-13);
  }
  // 3-forms: star . star = -1
  Form rho = random_form(3, rng);
  CHECK(relerr(star(star(rho, id), id), -1.0 * rho) < 1e-13);
}

TEST_CASE("hodge star and inner product with random metrics") {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    Metric m = random_metric(rng);
    int k = static_cast<int>(rng.next_u64() % 7);
    Form a = random_form(k, rng), b = random_form(k, rng);

    // a ^ star(b) = <a,b> vol   (exact floating-point identity check)
    Form lhs = wedge(a, star(b, m));
    Form rhs = inner(a, b, m) * m.vol();
    CHECK(relerr(lhs, rhs) < 1e-12);

    // star . star parity with general metric
    double sign = (k * (6 - k)) % 2 ? -1.0 : 1.0;
    CHECK(relerr(star(star(a, m), m), sign * a) < 1e-11);

    // star is an isometry
    CHECK(std::abs(inner(a, b, m) - inner(star(a, m), star(b, m), m)) <
          1e-11 * std::max(1.0, std::abs(inner(a, b, m))));

    // positivity
    if (a.linf() > 0) CHECK(inner(a, a, m) > 0.0);
  }
  CHECK_THROWS_AS(Metric(Mat6::Zero(), +1), MetricNotPositive);
  Mat6 indef = Mat6::Identity();
  indef(0, 0) = -1;
  CHECK_THROWS_AS(Metric(indef, +1), MetricNotPositive);
}

TEST_CASE("endomorphism action") {
  ComplexForm O = std_Omega();
  Rng rng(17);

  // identity acts as -k
  for (int k = 1; k <= 6; ++k) {
    Form a = random_form(k, rng);
    CHECK(relerr(endo_act(Endo::Identity(), a), -static_cast<double>(k) * a) < 1e-14);
  }

  // J0 on ReOmega0 gives 3 ImOmega0 (Omega0 has type (3,0))
  CHECK(relerr(endo_act(std_J(), O.re), 3.0 * O.im) < 1e-14);

  // against the slotwise oracle on random input
  for (int trial = 0; trial < 100; ++trial) {
    int k = 1 + static_cast<int>(rng.next_u64() % 5);
    Form a = random_form(k, rng);
    Endo S;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) S(i, j) = rng.uniform_pm1();
    CHECK(relerr(endo_act(S, a), endo_oracle(S, a)) < 1e-13);
    // linearity in S and in a
    Form b = random_form(k, rng);
    CHECK(relerr(endo_act(S, a + b), endo_act(S, a) + endo_act(S, b)) < 1e-12);
  }

  // S = diag(1,-1,0,...) anticommutes with J0; S_* ReOmega lands in Lambda^3_12,
  // certified by the wedge conditions of the 3-form lemma.
  Endo S = Endo::Zero();
  S(0, 0) = 1;
  S(1, 1) = -1;
  Endo J = std_J();
  CHECK((S * J + J * S).cwiseAbs().maxCoeff() == 0.0);
  Form rho12 = endo_act(S, O.re);
  CHECK(rho12.linf() > 0.1);
  CHECK(wedge(rho12, std_omega()).linf() < 1e-14);
  CHECK(wedge(rho12, O.re).linf() < 1e-14);
  CHECK(wedge(rho12, O.im).linf() < 1e-14);
}

TEST_CASE("inner products of the standard structure") {
  Metric id;
  Form w = std_omega();
  ComplexForm O = std_Omega();

  CHECK(inner(w, w, id) == 3.0);
  CHECK(inner(O.re, O.re, id) == 4.0);
  CHECK(inner(Form::basis({1, 2}), Form::basis({3, 4}), id) == 0.0);
  CHECK_THROWS_AS(inner(w, O.re, id), DegreeError);

  Rng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    Vec6 X = random_vector(rng);
    Form c = contract(X, O.re);
    CHECK(std::abs(inner(c, c, id) - 2.0 * X.squaredNorm()) < 1e-13 * std::max(1.0, X.squaredNorm()));
  }
}

#pragma once

#include "nklab/flag/frame.hpp"

namespace nklab::flag {

/// Invariant-level Hodge data of F3: dimensions of the T^2-invariant
/// subcomplex, its Betti numbers, and the harmonic (closed and coclosed)
/// representatives with their type-membership residuals.
struct CohomologyReport {
  std::array<int, 7> invariant_dim{};
  std::array<int, 7> betti{};
  std::vector<Form> harmonic2;
  std::vector<Form> harmonic3;
  double harmonic2_lambda28_residual = 0;  // max of |eta ^ omega^2|, |eta ^ ReOmega|
  double harmonic2_coclosed_residual = 0;  // pointwise -*d* check of the representatives
};

namespace detail_cohomology {

inline Eigen::MatrixXd nullspace(const Eigen::MatrixXd& M, double rel_cut) {
  if (M.size() == 0) return Eigen::MatrixXd::Identity(M.cols(), M.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rel_cut * std::max(smax, 1e-300)) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

inline int rank_of(const Eigen::MatrixXd& M, double rel_cut) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  double smax = svd.singularValues()(0);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rel_cut * std::max(smax, 1e-300)) ++r;
  return r;
}

}  // namespace detail_cohomology

/// Build the T^2-invariant Chevalley-Eilenberg complex of Lambda^*(m^*),
/// compute kernels and images by numerical rank, and classify the harmonic
/// representatives. The coefficient basis is orthonormal for the invariant
/// metric, so the codifferential on the complex is the matrix transpose.
inline CohomologyReport invariant_cohomology(const FlagContext& ctx, const EpsPolicy& eps = {}) {
  using detail_cohomology::nullspace;
  using detail_cohomology::rank_of;
  CohomologyReport rep;

  // invariant subspaces V_k = ker(ad_7) cap ker(ad_8)
  std::array<Eigen::MatrixXd, 7> V;
  for (int k = 0; k <= 6; ++k) {
    int n = detail::kBinom[k];
    Eigen::MatrixXd stacked(2 * n, n);
    for (int c = 0; c < n; ++c) {
      Form e(k);
      e[c] = 1.0;
      Form a7 = ctx.ce_ad_t(e, 0);
      Form a8 = ctx.ce_ad_t(e, 1);
      for (int r = 0; r < n; ++r) {
        stacked(r, c) = a7[r];
        stacked(n + r, c) = a8[r];
      }
    }
    V[k] = nullspace(stacked, eps.rank_rel);
    rep.invariant_dim[k] = static_cast<int>(V[k].cols());
  }

  // d restricted to invariants, in the orthonormal invariant bases
  std::array<Eigen::MatrixXd, 7> D;
  for (int k = 0; k <= 5; ++k) {
    Eigen::MatrixXd Dk(detail::kBinom[k + 1], V[k].cols());
    for (int c = 0; c < V[k].cols(); ++c) {
      Form e(k);
      for (int r = 0; r < e.size(); ++r) e[r] = V[k](r, c);
      Form de = ctx.ce_d(e);
      for (int r = 0; r < de.size(); ++r) Dk(r, c) = de[r];
    }
    // d preserves invariance; express in the invariant basis of degree k+1
    Eigen::MatrixXd tilde = V[k + 1].transpose() * Dk;
    if (Dk.size() > 0) {
      double leak = (Dk - V[k + 1] * tilde).cwiseAbs().maxCoeff();
      if (leak > 1e-10) throw Error("invariant_cohomology: d leaks out of the invariant complex");
    }
    D[k] = tilde;
  }
  D[6] = Eigen::MatrixXd::Zero(0, V[6].cols());

  for (int k = 0; k <= 6; ++k) {
    int dim = rep.invariant_dim[k];
    int rk = (k <= 5) ? rank_of(D[k], eps.rank_rel) : 0;
    int rkm1 = (k >= 1) ? rank_of(D[k - 1], eps.rank_rel) : 0;
    rep.betti[k] = dim - rk - rkm1;
  }

  // harmonic representatives: ker(D_k) cap ker(D_{k-1}^T)
  auto harmonic_basis = [&](int k) {
    int dim = rep.invariant_dim[k];
    Eigen::MatrixXd up = (k <= 5) ? D[k] : Eigen::MatrixXd::Zero(0, dim);
    Eigen::MatrixXd down =
        (k >= 1) ? Eigen::MatrixXd(D[k - 1].transpose()) : Eigen::MatrixXd::Zero(0, dim);
    Eigen::MatrixXd stacked(up.rows() + down.rows(), dim);
    if (up.rows() > 0) stacked.topRows(up.rows()) = up;
    if (down.rows() > 0) stacked.bottomRows(down.rows()) = down;
    Eigen::MatrixXd H = nullspace(stacked, eps.rank_rel);
    std::vector<Form> out;
    for (int c = 0; c < H.cols(); ++c) {
      Form f(k);
      Eigen::VectorXd coeffs = V[k] * H.col(c);
      for (int r = 0; r < f.size(); ++r) f[r] = coeffs(r);
      out.push_back(f);
    }
    return out;
  };
  rep.harmonic2 = harmonic_basis(2);
  rep.harmonic3 = harmonic_basis(3);

  const SU3Structure& s = ctx.base();
  Form w2 = wedge(s.omega, s.omega);
  for (const Form& eta : rep.harmonic2) {
    rep.harmonic2_lambda28_residual = std::max(
        {rep.harmonic2_lambda28_residual, wedge(eta, w2).linf(), wedge(eta, s.reOmega).linf()});
    // cross-check the transpose codifferential against -*d* pointwise
    Form delta = -1.0 * star(ctx.ce_d(star(eta, s.metric)), s.metric);
    rep.harmonic2_coclosed_residual = std::max(rep.harmonic2_coclosed_residual, delta.linf());
  }
  return rep;
}

}  // namespace nklab::flag

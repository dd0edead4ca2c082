#include "ste/entanglement.hpp"

#include <algorithm>
#include <cmath>

namespace ste {

namespace {

// (sigma_y x sigma_y), real representation: antidiagonal (-1, 1, 1, -1).
Eigen::Matrix4cd spin_flip() {
  Eigen::Matrix4cd f = Eigen::Matrix4cd::Zero();
  f(0, 3) = f(3, 0) = -1.0;
  f(1, 2) = f(2, 1) = 1.0;
  return f;
}

}  // namespace

double concurrence_general(const DensityMatrix4& rho) {
  validate_density(rho);
  static const Eigen::Matrix4cd flip = spin_flip();

  // The lambda_i are the non-negative square roots of the eigenvalues of
  // rho rho~. Factoring rho = W W^dagger, they equal the singular values of
  // the symmetric matrix tau = W^T F W. Jacobi iterations resolve the small
  // singular values of rho with high relative accuracy, and tau carries the
  // cross terms sqrt(mu_i mu_j) as plain products of the roots, so lambda
  // pairs like sqrt(A D) survive at full precision even when a population
  // sits many orders below the trace. Squaring rho first (or forming
  // sqrt(rho) from an eigendecomposition) would cost half the digits there.
  Eigen::JacobiSVD<Eigen::Matrix4cd> rho_svd(rho.m, Eigen::ComputeFullU);
  const Eigen::Vector4d roots = rho_svd.singularValues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd w = rho_svd.matrixU() * roots.asDiagonal();
  const Eigen::Matrix4cd tau = w.transpose() * flip * w;
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(tau);  // singular values sorted descending

  const auto& lambda = svd.singularValues();
  return std::max(0.0, lambda(0) - lambda(1) - lambda(2) - lambda(3));
}

double concurrence_x(const XState& x) {
  const double root_bc = std::sqrt(std::max(0.0, x.B * x.C));
  const double root_ad = std::sqrt(std::max(0.0, x.A * x.D));
  return std::max(0.0, 2.0 * (std::min(x.E, root_bc) - root_ad));
}

double negativity(const DensityMatrix4& rho) {
  validate_density(rho);
  // transpose atom 2: indices i = 2 a1 + b2
  Eigen::Matrix4cd pt;
  for (int a1 = 0; a1 < 2; ++a1)
    for (int b2 = 0; b2 < 2; ++b2)
      for (int a1p = 0; a1p < 2; ++a1p)
        for (int b2p = 0; b2p < 2; ++b2p)
          pt(2 * a1 + b2, 2 * a1p + b2p) = rho.m(2 * a1 + b2p, 2 * a1p + b2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(pt, Eigen::EigenvaluesOnly);
  double neg_sum = 0.0;
  for (int i = 0; i < 4; ++i)
    if (eig.eigenvalues()(i) < 0.0) neg_sum += eig.eigenvalues()(i);
  return -2.0 * neg_sum;
}

bool is_entangled_x(const XState& x) {
  const double root_bc = std::sqrt(std::max(0.0, x.B * x.C));
  const double root_ad = std::sqrt(std::max(0.0, x.A * x.D));
  return std::min(x.E, root_bc) > root_ad + 1e-12;
}

}  // namespace ste

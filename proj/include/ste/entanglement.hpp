#ifndef STE_ENTANGLEMENT_HPP
#define STE_ENTANGLEMENT_HPP

#include "ste/dynamics.hpp"

namespace ste {

// Wootters concurrence of a general two-atom state: the lambda_i are the
// non-negative square roots of the eigenvalues of rho rho~ with
// rho~ = (sigma_y x sigma_y) rho* (sigma_y x sigma_y), sorted descending;
// C = max{0, l1 - l2 - l3 - l4}. Input must satisfy the density-matrix
// invariants (non-PSD beyond tolerance is rejected).
double concurrence_general(const DensityMatrix4& rho);

// X-state fast path: lambda pairs are sqrt(A D) (twice), E + sqrt(B C) and
// |E - sqrt(B C)|, so C = max{0, 2 (min{E, sqrt(B C)} - sqrt(A D))}.
double concurrence_x(const XState& x);

// Negativity: -2 times the sum of negative eigenvalues of the partial
// transpose over the second atom.
double negativity(const DensityMatrix4& rho);

// Entanglement predicate for X states: min{E, sqrt(B C)} > sqrt(A D) + 1e-12.
bool is_entangled_x(const XState& x);

}  // namespace ste

#endif

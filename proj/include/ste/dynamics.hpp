#ifndef STE_DYNAMICS_HPP
#define STE_DYNAMICS_HPP

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "ste/hilbert.hpp"

// Time evolution under the drive + stimulated-emission interaction, through
// three independent engines:
//   * the closed-form propagator evaluated entrywise on a block,
//   * exact eigendecomposition of the block Hamiltonian,
//   * a brute-force evolver on the truncated full space (the oracle),
// plus the partial trace to the two-atom reduced state and the closed-form
// X-state families for the |ee> and |eg> initial states.

namespace ste {

// Scalars entering the closed-form propagator, evaluated on one photon
// sector m:  Omega_m = g sqrt(2[(gamma^2+1) m + gamma^2]),
//   theta = (cos Omega t - 1)/Omega,   phi = sin Omega t / Omega,
// with series limits below |Omega t| < 1e-6 so that theta -> 0 and phi -> t
// smoothly as Omega -> 0. xi = Omega/g is the case Rabi factor.
struct RabiScalars {
  double omega;
  double xi;
  double cos_wt;
  double theta;
  double phi;
  double theta_over_omega;  // (cos Omega t - 1)/Omega^2, limit -t^2/2

  static RabiScalars evaluate(const CouplingParams& params, int photon_m, double t);
};

// Pure state of the joint system inside one excitation block.
struct GlobalState {
  ExcitationBlock block;
  Eigen::VectorXcd amplitudes;  // length block.dim(), unit norm
};

GlobalState initial_product_state(AtomBasisLabel atoms, int n);

// The five real parameters of the X-shaped two-atom density matrix
//   diag(A, B, C, D) with coherence E between EG and GE.
struct XState {
  double A, B, C, D, E;
};

// Throws if populations, normalization or the coherence bound are violated
// beyond the stated tolerances.
void validate_xstate(const XState& x);

// General two-atom density matrix in the (EE, EG, GE, GG) basis.
struct DensityMatrix4 {
  Eigen::Matrix4cd m;
};

// Hermiticity within 1e-12, unit trace within 1e-12, eigenvalues >= -1e-10.
void validate_density(const DensityMatrix4& rho);

Eigen::Matrix4cd to_matrix(const XState& x);

// Extracts (A, B, C, D, |rho_12|) from a general reduced state.
std::array<double, 5> xstate_elements(const DensityMatrix4& rho);

// --- engine 1: block eigendecomposition ------------------------------------

// exp(-i H_block t) applied to the state; negative t gives inverse evolution.
GlobalState evolve_block(const CouplingParams& params, const GlobalState& initial,
                         double t);

// --- engine 2: closed-form propagator ---------------------------------------

// Evaluates the operator-valued propagator entries on the block's photon
// sectors. Entries are applied right to left, with the Omega-dependent
// factors reading the photon occupancy at their position; this is the unique
// reading that reproduces the block exponential.
Eigen::MatrixXcd propagator_analytic(const CouplingParams& params,
                                     const ExcitationBlock& block, double t);

// --- engine 3: full-space oracle ---------------------------------------------

// Builds the truncated Hamiltonian on all 4 (cutoff+1) dimensions directly
// from elementary atom and field operators, independent of the block code.
class OracleEvolver {
 public:
  OracleEvolver(const CouplingParams& params, int cutoff);

  int cutoff() const { return cutoff_; }
  const Eigen::MatrixXd& hamiltonian() const { return h_; }

  // Joint state at time t from |atoms> (x) |n>; index = label*(cutoff+1) + m.
  Eigen::VectorXcd state_at(AtomBasisLabel atoms, int n, double t) const;

  // Reduced two-atom state; rejects cutoff < n + 4 (truncation would touch
  // populated sectors).
  DensityMatrix4 reduced_at(AtomBasisLabel atoms, int n, double t) const;

 private:
  int cutoff_;
  Eigen::MatrixXd h_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_;
};

DensityMatrix4 evolve_oracle(const CouplingParams& params, AtomBasisLabel atoms,
                             int n, double t, int cutoff);

inline constexpr int kDefaultCutoffMargin = 6;  // oracle cutoff defaults to n + 6

// --- closed-form reduced states ----------------------------------------------

// |ee> (x) |n> family; xi^2 = 2[(gamma^2+1)(n+1) + gamma^2].
XState reduced_xstate_ee(const CouplingParams& params, int n, double t);

// |eg> (x) |n> family; xi^2 = 2[(gamma^2+1) n + gamma^2]. For this family
// E = sqrt(B C) holds identically.
XState reduced_xstate_eg(const CouplingParams& params, int n, double t);

// Block evolution followed by the partial trace over the field. The overload
// taking four atomic amplitudes supports superpositions spanning several
// blocks; per-photon-sector contributions are summed.
DensityMatrix4 reduced_general(const CouplingParams& params, AtomBasisLabel atoms,
                               int n, double t);
DensityMatrix4 reduced_general(const CouplingParams& params,
                               const Eigen::Vector4cd& atomic_amplitudes, int n,
                               double t);

}  // namespace ste

#endif

#ifndef STE_HILBERT_HPP
#define STE_HILBERT_HPP

#include <optional>
#include <vector>

#include <Eigen/Dense>

// Basis bookkeeping for two two-level atoms coupled to a single field mode.
// The interaction conserves the total excitation number
// N = n_photons + (number of excited atoms), so every product initial state
// evolves inside a block of dimension <= 4.

namespace ste {

// Couplings of the drive and the stimulated-emission channel.
// g = g_drv + g_stm sets the overall scale; gamma = (g_drv - g_stm) / g is
// the normalized asymmetry: gamma = 1 means no STE, gamma = 0 equal couplings.
struct CouplingParams {
  double g_drv;
  double g_stm;

  CouplingParams(double drv, double stm);
  static CouplingParams from_gamma(double g_drv, double gamma);

  double g() const { return g_drv + g_stm; }
  double g_diff() const { return g_drv - g_stm; }
  double gamma() const { return (g_drv - g_stm) / (g_drv + g_stm); }
};

// Two-atom basis states, in the fixed ordering used by every matrix here.
enum class AtomBasisLabel : int { EE = 0, EG = 1, GE = 2, GG = 3 };

// Number of excited atoms in a basis label.
int excited_count(AtomBasisLabel label);

struct BlockMember {
  AtomBasisLabel label;
  int photons;

  bool operator==(const BlockMember&) const = default;
};

// The excitation-conserving subspace containing a given product state.
// Members are ordered (EE, EG, GE, GG) with labels requiring negative photon
// numbers omitted, so the dimension shrinks near the vacuum.
struct ExcitationBlock {
  int total_excitation = 0;
  std::vector<BlockMember> basis;

  int dim() const { return static_cast<int>(basis.size()); }
  std::optional<int> index_of(AtomBasisLabel label) const;
};

// Block containing |initial_atoms> (x) |n>. Total input domain for n >= 0.
ExcitationBlock block_for(AtomBasisLabel initial_atoms, int n);

// Interaction Hamiltonian restricted to the block (real symmetric, dim x dim).
// Nonzero elements: <EG,m+1|H|EE,m> = <GE,m+1|H|EE,m> = (g_drv+g_stm) sqrt(m+1)
// and <GG,m+1|H|EG,m> = <GG,m+1|H|GE,m> = (g_drv-g_stm) sqrt(m+1); the
// diagonal vanishes and there is no direct EG <-> GE element.
Eigen::MatrixXd build_block_hamiltonian(const CouplingParams& params,
                                        const ExcitationBlock& block);

}  // namespace ste

#endif

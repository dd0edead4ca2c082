#include "ste/hilbert.hpp"

#include <cmath>
#include <stdexcept>

namespace ste {

CouplingParams::CouplingParams(double drv, double stm) : g_drv(drv), g_stm(stm) {
  if (!(g_drv > 0.0)) throw std::invalid_argument("CouplingParams: g_drv must be > 0");
  if (!(g_stm >= 0.0)) throw std::invalid_argument("CouplingParams: g_stm must be >= 0");
}

CouplingParams CouplingParams::from_gamma(double g_drv, double gamma) {
  if (!(gamma > -1.0 && gamma <= 1.0))
    throw std::invalid_argument("CouplingParams: gamma must lie in (-1, 1]");
  return CouplingParams(g_drv, g_drv * (1.0 - gamma) / (1.0 + gamma));
}

int excited_count(AtomBasisLabel label) {
  switch (label) {
    case AtomBasisLabel::EE: return 2;
    case AtomBasisLabel::EG:
    case AtomBasisLabel::GE: return 1;
    case AtomBasisLabel::GG: return 0;
  }
  throw std::logic_error("excited_count: bad label");
}

std::optional<int> ExcitationBlock::index_of(AtomBasisLabel label) const {
  for (int i = 0; i < dim(); ++i)
    if (basis[i].label == label) return i;
  return std::nullopt;
}

ExcitationBlock block_for(AtomBasisLabel initial_atoms, int n) {
  if (n < 0) throw std::invalid_argument("block_for: photon number must be >= 0");
  ExcitationBlock block;
  block.total_excitation = excited_count(initial_atoms) + n;
  for (AtomBasisLabel label :
       {AtomBasisLabel::EE, AtomBasisLabel::EG, AtomBasisLabel::GE, AtomBasisLabel::GG}) {
    const int photons = block.total_excitation - excited_count(label);
    if (photons >= 0) block.basis.push_back({label, photons});
  }
  return block;
}

Eigen::MatrixXd build_block_hamiltonian(const CouplingParams& params,
                                        const ExcitationBlock& block) {
  const int d = block.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  auto couple = [&](AtomBasisLabel upper, AtomBasisLabel lower, double strength) {
    // <lower, m+1 | H | upper, m> = strength * sqrt(m+1)
    const auto iu = block.index_of(upper);
    const auto il = block.index_of(lower);
    if (!iu || !il) return;
    const int m = block.basis[*il].photons;  // photon number on the lower rung
    h(*il, *iu) = h(*iu, *il) = strength * std::sqrt(static_cast<double>(m));
  };
  couple(AtomBasisLabel::EE, AtomBasisLabel::EG, params.g());
  couple(AtomBasisLabel::EE, AtomBasisLabel::GE, params.g());
  couple(AtomBasisLabel::EG, AtomBasisLabel::GG, params.g_diff());
  couple(AtomBasisLabel::GE, AtomBasisLabel::GG, params.g_diff());
  return h;
}

}  // namespace ste

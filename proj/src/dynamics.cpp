#include "ste/dynamics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ste {

namespace {

using cd = std::complex<double>;
constexpr cd kImagUnit{0.0, 1.0};

Eigen::VectorXcd apply_exp(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig,
                           const Eigen::VectorXcd& v, double t) {
  Eigen::VectorXcd c = eig.eigenvectors().transpose() * v;
  for (Eigen::Index k = 0; k < c.size(); ++k)
    c(k) *= std::exp(-kImagUnit * eig.eigenvalues()(k) * t);
  return eig.eigenvectors() * c;
}

// Partial trace over the field from a set of (label, photons) -> amplitude
// entries: rho_a = sum_m v_m v_m^dagger with v_m the per-sector 4-vector.
DensityMatrix4 trace_out_field(const std::map<int, Eigen::Vector4cd>& sectors) {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (const auto& [m, v] : sectors) rho += v * v.adjoint();
  return DensityMatrix4{rho};
}

void scatter(std::map<int, Eigen::Vector4cd>& sectors, const GlobalState& gs) {
  for (int i = 0; i < gs.block.dim(); ++i) {
    const auto& member = gs.block.basis[i];
    auto [it, inserted] = sectors.try_emplace(member.photons, Eigen::Vector4cd::Zero());
    it->second(static_cast<int>(member.label)) += gs.amplitudes(i);
  }
}

}  // namespace

RabiScalars RabiScalars::evaluate(const CouplingParams& params, int photon_m, double t) {
  if (photon_m < 0) throw std::invalid_argument("RabiScalars: photon sector must be >= 0");
  const double g = params.g();
  const double gamma = params.gamma();
  RabiScalars s;
  s.omega = g * std::sqrt(2.0 * ((gamma * gamma + 1.0) * photon_m + gamma * gamma));
  s.xi = s.omega / g;
  const double x = s.omega * t;
  if (std::abs(x) < 1e-6) {
    s.cos_wt = std::cos(x);
    s.phi = t * (1.0 - x * x / 6.0);
    s.theta_over_omega = -t * t * (0.5 - x * x / 24.0);
    s.theta = s.omega * s.theta_over_omega;
  } else {
    s.cos_wt = std::cos(x);
    s.phi = std::sin(x) / s.omega;
    s.theta = (s.cos_wt - 1.0) / s.omega;
    s.theta_over_omega = s.theta / s.omega;
  }
  return s;
}

GlobalState initial_product_state(AtomBasisLabel atoms, int n) {
  GlobalState gs;
  gs.block = block_for(atoms, n);
  gs.amplitudes = Eigen::VectorXcd::Zero(gs.block.dim());
  gs.amplitudes(*gs.block.index_of(atoms)) = 1.0;
  return gs;
}

void validate_xstate(const XState& x) {
  const double pops[] = {x.A, x.B, x.C, x.D};
  for (double p : pops)
    if (p < -1e-12) throw std::invalid_argument("XState: negative population");
  if (std::abs(x.A + x.B + x.C + x.D - 1.0) > 1e-12)
    throw std::invalid_argument("XState: populations do not sum to 1");
  if (x.E < 0.0 || x.E > std::sqrt(std::max(0.0, x.B * x.C)) + 1e-12)
    throw std::invalid_argument("XState: coherence violates positivity bound");
}

void validate_density(const DensityMatrix4& rho) {
  if ((rho.m - rho.m.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("DensityMatrix4: not Hermitian");
  if (std::abs(rho.m.trace().real() - 1.0) > 1e-12 || std::abs(rho.m.trace().imag()) > 1e-12)
    throw std::invalid_argument("DensityMatrix4: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(rho.m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("DensityMatrix4: not positive semidefinite");
}

Eigen::Matrix4cd to_matrix(const XState& x) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = x.A;
  m(1, 1) = x.B;
  m(2, 2) = x.C;
  m(3, 3) = x.D;
  m(1, 2) = m(2, 1) = x.E;
  return m;
}

std::array<double, 5> xstate_elements(const DensityMatrix4& rho) {
  return {rho.m(0, 0).real(), rho.m(1, 1).real(), rho.m(2, 2).real(),
          rho.m(3, 3).real(), std::abs(rho.m(1, 2))};
}

GlobalState evolve_block(const CouplingParams& params, const GlobalState& initial,
                         double t) {
  const Eigen::MatrixXd h = build_block_hamiltonian(params, initial.block);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  GlobalState out;
  out.block = initial.block;
  out.amplitudes = apply_exp(eig, initial.amplitudes, t);
  return out;
}

Eigen::MatrixXcd propagator_analytic(const CouplingParams& params,
                                     const ExcitationBlock& block, double t) {
  const double g = params.g();
  const double gd = params.g_diff();  // g * gamma
  const int d = block.dim();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);

  auto set = [&](AtomBasisLabel row_label, int col, cd value) {
    // Excitation conservation puts every generated target inside the block.
    const auto row = block.index_of(row_label);
    if (!row) throw std::logic_error("propagator_analytic: target outside block");
    u(*row, col) = value;
  };
  auto rabi = [&](int m) { return RabiScalars::evaluate(params, m, t); };

  for (int col = 0; col < d; ++col) {
    const auto [label, m] = block.basis[col];
    switch (label) {
      case AtomBasisLabel::EE: {
        // column erases: 2g^2 a Th a+ + 1 | -ig Ph a+ (x2) | 2g^2 gamma a+ Th a+
        const RabiScalars s = rabi(m + 1);
        set(AtomBasisLabel::EE, col, 1.0 + 2.0 * g * g * (m + 1) * s.theta_over_omega);
        const cd off = -kImagUnit * g * std::sqrt(m + 1.0) * s.phi;
        set(AtomBasisLabel::EG, col, off);
        set(AtomBasisLabel::GE, col, off);
        set(AtomBasisLabel::GG, col,
            2.0 * g * gd * std::sqrt((m + 1.0) * (m + 2.0)) * s.theta_over_omega);
        break;
      }
      case AtomBasisLabel::EG:
      case AtomBasisLabel::GE: {
        const RabiScalars s = rabi(m);
        if (m >= 1)
          set(AtomBasisLabel::EE, col, -kImagUnit * g * std::sqrt(double(m)) * s.phi);
        const cd same = 0.5 * (s.cos_wt + 1.0);
        const cd cross = 0.5 * (s.cos_wt - 1.0);
        set(label, col, same);
        set(label == AtomBasisLabel::EG ? AtomBasisLabel::GE : AtomBasisLabel::EG, col,
            cross);
        set(AtomBasisLabel::GG, col, -kImagUnit * gd * std::sqrt(m + 1.0) * s.phi);
        break;
      }
      case AtomBasisLabel::GG: {
        if (m >= 1) {
          const RabiScalars s = rabi(m - 1);
          if (m >= 2)
            set(AtomBasisLabel::EE, col,
                2.0 * g * gd * std::sqrt(m * (m - 1.0)) * s.theta_over_omega);
          const cd off = -kImagUnit * gd * std::sqrt(double(m)) * s.phi;
          set(AtomBasisLabel::EG, col, off);
          set(AtomBasisLabel::GE, col, off);
          set(AtomBasisLabel::GG, col,
              1.0 + 2.0 * gd * gd * m * s.theta_over_omega);
        } else {
          set(AtomBasisLabel::GG, col, 1.0);  // vacuum column is stationary
        }
        break;
      }
    }
  }
  return u;
}

OracleEvolver::OracleEvolver(const CouplingParams& params, int cutoff)
    : cutoff_(cutoff) {
  if (cutoff < 0) throw std::invalid_argument("OracleEvolver: cutoff must be >= 0");
  const int f = cutoff + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(f, f);
  for (int m = 1; m <= cutoff; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  const Eigen::MatrixXd ad = a.transpose();

  Eigen::Matrix2d sp;  // |e><g| with e = 0, g = 1
  sp << 0, 1, 0, 0;
  const Eigen::Matrix2d sm = sp.transpose();
  Eigen::Matrix2d sz;
  sz << 0.5, 0, 0, -0.5;
  const Eigen::Matrix2d id2 = Eigen::Matrix2d::Identity();
  const Eigen::MatrixXd idf = Eigen::MatrixXd::Identity(f, f);

  auto kron3 = [f](const Eigen::Matrix2d& a1, const Eigen::Matrix2d& a2,
                   const Eigen::MatrixXd& field) {
    Eigen::MatrixXd out(4 * f, 4 * f);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            out.block((i * 2 + k) * f, (j * 2 + l) * f, f, f) = a1(i, j) * a2(k, l) * field;
    return out;
  };

  const Eigen::MatrixXd y1 = kron3(sp, id2, a) + kron3(sm, id2, ad);
  const Eigen::MatrixXd y2 = kron3(id2, sp, a) + kron3(id2, sm, ad);
  const Eigen::MatrixXd z1 = kron3(sz, id2, idf);
  const Eigen::MatrixXd z2 = kron3(id2, sz, idf);

  // drive term plus the symmetrized inversion-weighted exchange, summed over
  // both atom orderings
  h_ = params.g_drv * (y1 + y2) +
       params.g_stm * (z1 * y2 + y2 * z1 + z2 * y1 + y1 * z2);
  eig_.compute(h_);
}

Eigen::VectorXcd OracleEvolver::state_at(AtomBasisLabel atoms, int n, double t) const {
  if (n < 0 || n > cutoff_)
    throw std::invalid_argument("OracleEvolver: photon number outside truncation");
  const int f = cutoff_ + 1;
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(4 * f);
  psi0(static_cast<int>(atoms) * f + n) = 1.0;
  return apply_exp(eig_, psi0, t);
}

DensityMatrix4 OracleEvolver::reduced_at(AtomBasisLabel atoms, int n, double t) const {
  if (cutoff_ < n + 4)
    throw std::invalid_argument("OracleEvolver: cutoff < n + 4 would truncate populated sectors");
  const int f = cutoff_ + 1;
  const Eigen::VectorXcd psi = state_at(atoms, n, t);
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < f; ++m) rho(i, j) += psi(i * f + m) * std::conj(psi(j * f + m));
  return DensityMatrix4{rho};
}

DensityMatrix4 evolve_oracle(const CouplingParams& params, AtomBasisLabel atoms, int n,
                             double t, int cutoff) {
  if (cutoff < n + 4)
    throw std::invalid_argument("evolve_oracle: cutoff < n + 4 would truncate populated sectors");
  return OracleEvolver(params, cutoff).reduced_at(atoms, n, t);
}

XState reduced_xstate_ee(const CouplingParams& params, int n, double t) {
  if (n < 0) throw std::invalid_argument("reduced_xstate_ee: n must be >= 0");
  const double g = params.g();
  const double gamma = params.gamma();
  const RabiScalars s = RabiScalars::evaluate(params, n + 1, t);
  XState x;
  x.A = std::pow(1.0 + 2.0 * (n + 1) * g * g * s.theta_over_omega, 2);
  x.B = x.C = x.E = (n + 1) * g * g * s.phi * s.phi;
  x.D = 4.0 * gamma * gamma * (n + 1.0) * (n + 2.0) *
        std::pow(g * g * s.theta_over_omega, 2);
  return x;
}

XState reduced_xstate_eg(const CouplingParams& params, int n, double t) {
  if (n < 0) throw std::invalid_argument("reduced_xstate_eg: n must be >= 0");
  const double g = params.g();
  const double gamma = params.gamma();
  const RabiScalars s = RabiScalars::evaluate(params, n, t);
  const double sin_wt = s.phi * s.omega;
  XState x;
  x.A = n * g * g * s.phi * s.phi;
  x.B = std::pow(s.cos_wt + 1.0, 2) / 4.0;
  x.C = std::pow(s.cos_wt - 1.0, 2) / 4.0;
  x.D = gamma * gamma * (n + 1.0) * g * g * s.phi * s.phi;
  x.E = sin_wt * sin_wt / 4.0;
  return x;
}

DensityMatrix4 reduced_general(const CouplingParams& params, AtomBasisLabel atoms, int n,
                               double t) {
  std::map<int, Eigen::Vector4cd> sectors;
  scatter(sectors, evolve_block(params, initial_product_state(atoms, n), t));
  return trace_out_field(sectors);
}

DensityMatrix4 reduced_general(const CouplingParams& params,
                               const Eigen::Vector4cd& atomic_amplitudes, int n,
                               double t) {
  if (std::abs(atomic_amplitudes.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("reduced_general: atomic amplitudes must be normalized");
  std::map<int, Eigen::Vector4cd> sectors;
  for (int l = 0; l < 4; ++l) {
    const cd amp = atomic_amplitudes(l);
    if (amp == cd{0.0, 0.0}) continue;
    GlobalState gs = initial_product_state(static_cast<AtomBasisLabel>(l), n);
    gs.amplitudes *= amp;
    scatter(sectors, evolve_block(params, gs, t));
  }
  return trace_out_field(sectors);
}

}  // namespace ste

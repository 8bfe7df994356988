#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "fermikinetics/lattice.hpp"
#include "fermikinetics/quasifree.hpp"

namespace fk {

using SparseOp = Eigen::SparseMatrix<cplx>;
using DenseOp = Eigen::MatrixXcd;

// Fock space of L momentum modes p_j = 2 pi (j - floor(L/2)) / L on a ring, Jordan-Wigner
// ordered by j; bit j of a basis index is the occupation of mode j. Site operators
// a_x = L^{-1/2} sum_j e^{-i p_j x} a_{p_j}, matching the lattice conventions.
struct FockRep {
    int L = 0;
    MomentumGrid grid;
    std::vector<SparseOp> a_mom;
    std::vector<SparseOp> a_site;
    double car_deviation = 0.0;  // max entry of the CAR residuals found at construction

    std::size_t dim() const { return std::size_t{1} << L; }
};

inline constexpr int kMaxFockSites = 12;

FockRep car_ops(int L, bool verify = true);

// Product-form density operator, diagonal in the mode-occupation basis.
struct GaussianState {
    Eigen::VectorXd diag;
};
GaussianState gaussian_state(const FockRep& rep, const std::vector<double>& w);

cplx exact_expect(const GaussianState& rho, const DenseOp& op);
cplx exact_expect(const GaussianState& rho, const SparseOp& op);

// a(g) = sum_x g(x) a_x, a*(f) = a(f)^dagger
SparseOp annihilator(const FockRep& rep, const std::vector<cplx>& g);
SparseOp creator(const FockRep& rep, const std::vector<cplx>& f);

// sum_{qr} X_{qr} a*_q a_r in the momentum modes (X row-major L x L).
DenseOp quadratic_operator(const FockRep& rep, const std::vector<cplx>& X);
// a*(f) a(g) + a*(g) a(f) built from site operators.
SparseOp observable_operator(const FockRep& rep, const QuadraticObservable& A);

// Free part and interaction kept apart; H = H0 + lambda N^{-1/2} V.
DenseOp free_hamiltonian(const FockRep& rep, const Dispersion& band);
DenseOp interaction_operator(const FockRep& rep, const PairPotential& v);
DenseOp build_hamiltonian(const FockRep& rep, const Dispersion& band, const PairPotential& v, double lambda,
                          double N);

// trace(rho e^{iHT} A e^{-iHT}) through a Hermitian eigendecomposition.
cplx exact_evolve_expect(const GaussianState& rho, const DenseOp& H, const DenseOp& A, double T);

// int_0^t V(t') dt' in the interaction picture of the (diagonal) free part:
// entries V_ab I(E_a - E_b, t).
DenseOp interaction_picture_integral(const FockRep& rep, const Dispersion& band, const DenseOp& V, double t);

}  // namespace fk

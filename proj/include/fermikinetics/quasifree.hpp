#pragma once

#include <utility>
#include <vector>

#include "fermikinetics/lattice.hpp"

namespace fk {

// A one-particle profile on the torus with its transform hat(p) = sum_x f(x) e^{-i p.x}.
struct Profile {
    std::vector<cplx> sites;
    std::vector<cplx> hat;
};

Profile make_profile(const MomentumGrid& grid, std::vector<cplx> sites);
Profile delta_profile(const MomentumGrid& grid, Coords x, cplx value = 1.0);

// A = a*(f) a(g) + a*(g) a(f), a*(.) antilinear and a(.) linear in the profile.
// With f = g = delta_x this is 2 n_x; all normalizations (S = 4 rho(1-rho) for a
// product state, and so on) follow from that convention.
class QuadraticObservable {
public:
    // Finitely supported profiles; the joint support must have minimal-image diameter <= n/4.
    static QuadraticObservable from_sites(const MomentumGrid& grid, std::vector<cplx> f, std::vector<cplx> g);
    // Momentum-space data, no support requirement (freely evolved observables are not local).
    static QuadraticObservable from_momentum(const MomentumGrid& grid, std::vector<cplx> fhat,
                                             std::vector<cplx> ghat);

    const MomentumGrid& grid() const { return grid_; }
    const Profile& f() const { return f_; }
    const Profile& g() const { return g_; }

    // psi_A(p) = 2 Re(conj fhat(p) ghat(p)); the translation sum of A is sum_p psi_A(p) n_p.
    std::vector<double> symbol() const;
    // One-particle kernel X_{qr} (row-major, q the creator index):
    // A = sum_{qr} X_{qr} a*_q a_r with a_p the normalized momentum modes.
    std::vector<cplx> kernel() const;
    // c A for real c.
    QuadraticObservable scaled(double c) const;

private:
    friend QuadraticObservable translate(const QuadraticObservable& A, Coords x);
    MomentumGrid grid_;
    Profile f_, g_;
};

// 2 n_x
QuadraticObservable site_number(const MomentumGrid& grid, Coords x);
// Hopping-type bond a*_x a_{x+e} + h.c. with complex amplitude.
QuadraticObservable bond(const MomentumGrid& grid, Coords x, Coords e, cplx amplitude = 1.0);
// Random profiles (complex if requested) on sites {0..width-1} along axis 0.
QuadraticObservable random_observable(const MomentumGrid& grid, int width, bool complex_values,
                                      std::uint64_t seed);

int support_diameter(const MomentumGrid& grid, const std::vector<cplx>& f, const std::vector<cplx>& g);

QuadraticObservable translate(const QuadraticObservable& A, Coords x);
// tau_t(A) = e^{i H0 t} A e^{-i H0 t}: both transforms pick up e^{-i eps t}.
QuadraticObservable free_evolve_obs(const QuadraticObservable& A, const Dispersion& band, double t);

cplx two_point(const QuasifreeState& s, const Profile& f, const Profile& g);
// omega(a*(f_1) ... a*(f_r) a(g_r) ... a(g_1)) = det[two_point(f_i, g_j)]; unequal counts give 0.
cplx wick_expect(const QuasifreeState& s, const std::vector<Profile>& creators,
                 const std::vector<Profile>& annihilators);

double mean(const QuasifreeState& s, const QuadraticObservable& A);

// omega(A alpha_d B) - omega(A) omega(B)
cplx truncated_corr(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B, Coords d);
// The same for every d at once, indexed by the torus site index of d.
std::vector<cplx> correlation_profile(const QuasifreeState& s, const QuadraticObservable& A,
                                      const QuadraticObservable& B);

// S(A,B) = n^{-nu} sum_p w(1-w) psi_A psi_B
double covariance(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B);
// S(A,B) = Re sum_x (1/2)[C_AB(x) + C_BA(-x)], summed over the torus.
double covariance_by_translation_sum(const QuasifreeState& s, const QuadraticObservable& A,
                                     const QuadraticObservable& B);

// omega([A, alpha_d B]) for every d, from the bilinear commutator identity.
std::vector<cplx> commutator_profile(const QuasifreeState& s, const QuadraticObservable& A,
                                     const QuadraticObservable& B);
// sigma(A,B) = -i sum_x omega([A, alpha_x B]) over the whole torus.
double symplectic(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B);
// Block form sigma_K = -i omega([F_K A, F_K B]) = -i sum_{|d_a|<K} prod_a(1-|d_a|/K) omega([A, alpha_d B]).
double block_symplectic(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B, int K);

// prod_a (1 - |d_a| / K) for |d_a| < K (minimal image), else 0.
double fejer_weight(const MomentumGrid& grid, Index d, int K);

}  // namespace fk

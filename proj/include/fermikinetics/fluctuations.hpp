#pragma once

#include <string>
#include <vector>

#include "fermikinetics/collision.hpp"
#include "fermikinetics/quasifree.hpp"

namespace fk {

// V_K = sum_{|d_a|<K} prod_a(1 - |d_a|/K) Re C_AA(d); requires 2K <= n.
double block_variance(const QuasifreeState& s, const QuadraticObservable& A, int K);

enum class VarianceClass { convergent, marginal, divergent };
const char* to_string(VarianceClass c);

struct VarianceLimit {
    std::vector<int> K;
    std::vector<double> V;       // Fejer block variances
    std::vector<double> window;  // W_K = sum_{|d_a|<K} Re C(d), the un-weighted partial sums
    double estimate = 0.0;       // last window sum plus geometric tail (convergent only)
    double loglog_slope = 0.0;   // d log V_K / d log K
    double geometric_ratio = 0.0;  // per-site decay of the W_K increments
    double power_exponent = 0.0;   // increments ~ K^{-power_exponent}
    VarianceClass classification = VarianceClass::convergent;
};

VarianceLimit variance_limit(const QuasifreeState& s, const QuadraticObservable& A, const std::vector<int>& K_list);
// Powers of two up to n/2 (at least four values).
std::vector<int> default_block_sizes(const MomentumGrid& grid);

// exp(-S(A,A)/2); DomainError unless the block variances converge.
double weyl_char(const QuasifreeState& s, const QuadraticObservable& A);
// e^{i sigma(A,B)} over the full torus, or with the block form at size K.
cplx ccr_phase(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B);
cplx ccr_phase(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B, int K);

// I(omega, t) = (e^{i omega t} - 1)/(i omega), I(0, t) = t
cplx time_integral(double omega, double t);

// O = (XY + YX)/2 for two one-particle kernels (S x S, row-major, X_{qr} a*_q a_r).
struct PairObservable {
    MomentumGrid grid;
    std::vector<cplx> X, Y;
};
// X from A, Y from alpha_d B.
PairObservable make_pair(const QuadraticObservable& A, const QuadraticObservable& B, Coords d);
// N_tot^2
PairObservable total_number_pair(const MomentumGrid& grid);

struct DriftTerms {
    cplx value = 0.0;            // sum over configurations of G * I(dE, t)
    cplx stationary = 0.0;       // sum of G over |dE| <= 1e-12
    double stationary_abs = 0.0; // sum of |G| over the same set
};

// omega([V(t'), O]) integrated over t' in [0, t], lambda = 1, V = sum M a*_k a*_l a_m a_p.
// Only the connected contraction survives in a momentum-diagonal quasifree state:
// -4 sum_{k+l=m+p} M F_{klmp} X_{mk} Y_{pl} I(dE, t) (symmetrized over X <-> Y).
DriftTerms pair_commutator_integral(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                                    const PairObservable& O, double t);
// omega([V, A]) for a quadratic A from the four Wick terms; zero up to rounding.
cplx quadratic_commutator(const QuasifreeState& s, const PairPotential& v, const std::vector<cplx>& X);

// lambda * int_0^t omega([V(t'), O]) dt'
cplx weyl_drift(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double lambda,
                const PairObservable& O, double t);
cplx weyl_drift(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double lambda,
                const QuadraticObservable& A, double t);

struct FirstOrderProbe {
    cplx value = 0.0;  // I_1(N) = lambda N^{-1/2} sum G I(dE, N)
    cplx stationary = 0.0;
    double stationary_abs = 0.0;
};
FirstOrderProbe first_order_probe(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                                  double lambda, const PairObservable& O, double N);

// Second-order block-variance correction.
//   Delta V(K, N) = (lambda^2 / N) sum_{|d_a|<K} prod_a(1 - |d_a|/K) P_N(d)
//   P_N(d) = n^{-2nu} sum_{l,m} w_l (1 - w_m) |Psi_lm(d)|^2
//   Psi_lm(d) = n^{-nu} sum_k M(k, l, m, k+l-m) psi_A(k) e^{i k.d} I(eps_l - eps_m + eps_k, N)
// which is (lambda^2 / (K^nu N)) sum_{x,y in B_K} sum_{l,m} rho_lm |Psi_lm(x-y)|^2: a
// positive-semidefinite quadratic form, so Delta V >= 0 and grows with K at fixed N.
// (lambda^2 / N) P_N(d) indexed by the torus site of d.
std::vector<double> correction_profile(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                                       double lambda, const QuadraticObservable& A, double N);
double scaling_correction(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                          double lambda, const QuadraticObservable& A, int K, double N);

// Second-order first-moment correction of A at time scale N:
//   mu_N(A) = (lambda^2 / N) n^{-nu} sum_p psi_A(p) R_N(p)
//   R_N(p) = n^{-2nu} sum_{k,m} M^2 |I(dE, N)|^2 F_{klmp}
// plus the first-order term (lambda N^{-1/2} times the four-term Wick sum, identically zero).
double mean_correction(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                       double lambda, const QuadraticObservable& A, double N);

enum class Moment { mean, variance };
enum class Regime { regular, finite_shifted, divergent };
const char* to_string(Regime r);

struct RegimeCell {
    int K = 0;
    double N = 0.0;
    double value = 0.0;  // Delta V, or the block-summed mean correction
    Regime label = Regime::regular;
};

struct RegimeThresholds {
    double regular_fraction = 0.05;   // theta_r = fraction * V_inf
    double divergent_fraction = 1.0;  // theta_d = fraction * V_inf
};

struct RegimeReport {
    Moment moment = Moment::variance;
    std::vector<RegimeCell> cells;
    double v_inf = 0.0;  // S(A,A)
    double theta_r = 0.0;
    double theta_d = 0.0;
    double fit_exponent = 0.0;  // slope of log Delta V against log(K/N)
    double fit_intercept = 0.0;
    double max_abs_mean = 0.0;  // mean scans
    double lambda = 0.0;
};

RegimeReport regime_scan(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double lambda,
                         const QuadraticObservable& A, const std::vector<int>& K_values,
                         const std::vector<double>& N_values, Moment moment,
                         const RegimeThresholds& thresholds = {});

// Labels from (K, N, value, thresholds) alone.
void assign_labels(RegimeReport& r);

}  // namespace fk

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fermikinetics/lattice.hpp"

namespace fk {

struct ScalingParameters {
    double lambda = 1.0;
    double N = 1.0;
    int K = 1;
    double eta = 0.3;
};

void validate(const ScalingParameters& p);

enum class ShellMode { mollified, exact_shell };

const char* to_string(ShellMode m);
ShellMode shell_mode_from_string(const std::string& s);

struct TableOptions {
    ShellMode mode = ShellMode::mollified;
    // Entries with weight <= threshold are dropped. With relative_threshold the
    // cut is threshold * (largest weight).
    double threshold = 1e-14;
    bool relative_threshold = true;
    std::size_t max_entries = 100'000'000;  // logical entries
};

struct CollisionEntry {
    Index k, l, m, p;
    double weight;
    bool operator==(const CollisionEntry&) const = default;
};

// Momentum-conserving quadruples k + l = m + p stored once per symmetry class:
// the representative has k < l, m < p and (k, l) <= (m, p) lexicographically, and stands
// for the 8 logical entries generated by k<->l, m<->p, (kl)<->(mp) (4 when (k,l) == (m,p)).
// All members share the weight; F flips sign under (kl)<->(mp), so one class feeds
// +2WF into p and m and -2WF into k and l. Entries with k == l or m == p vanish (M = 0).
// Classes are grouped by p (the build parallelizes over it).
class CollisionTable {
public:
    const MomentumGrid& grid() const { return grid_; }
    ShellMode mode() const { return mode_; }
    double eta() const { return eta_; }
    double lambda() const { return lambda_; }
    // Absolute weight cut actually applied.
    double threshold() const { return threshold_; }
    double max_weight() const { return max_weight_; }

    std::size_t class_count() const { return weight_.size(); }
    std::size_t logical_size() const;

    // Full logical entry list in lexicographic (k, l, m, p) order.
    std::vector<CollisionEntry> entries() const;
    double weight_sum() const;

    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<Index>& k() const { return k_; }
    const std::vector<Index>& l() const { return l_; }
    const std::vector<Index>& m() const { return m_; }
    const std::vector<Index>& p() const { return p_; }
    const std::vector<double>& weights() const { return weight_; }

    // Rebuild from a logical entry list (binary table import).
    static CollisionTable from_entries(const MomentumGrid& grid, ShellMode mode, double eta,
                                       double lambda, double threshold,
                                       const std::vector<CollisionEntry>& entries);

private:
    friend CollisionTable build_table(const Dispersion&, const PairPotential&,
                                      const ScalingParameters&, const TableOptions&);
    MomentumGrid grid_;
    ShellMode mode_ = ShellMode::mollified;
    double eta_ = 0.0;
    double lambda_ = 0.0;
    double threshold_ = 0.0;
    double max_weight_ = 0.0;
    std::vector<std::size_t> offsets_;
    std::vector<Index> k_, l_, m_, p_;
    std::vector<double> weight_;
};

// Antisymmetrized matrix element v(k - p) - v(k - m); requires k + l = m + p on-grid.
double matrix_element(const PairPotential& v, Index k, Index l, Index m, Index p);

// exp(-(dE/eta)^2) / (eta sqrt(pi))
double mollifier(double eta, double dE);

// Energy mismatch, always evaluated in this order so that it flips sign exactly under (kl) <-> (mp).
inline double energy_mismatch(const std::vector<double>& eps, Index k, Index l, Index m, Index p)
{
    return (eps[k] + eps[l]) - (eps[m] + eps[p]);
}

inline constexpr double kExactShellTol = 1e-12;

// Weight of a single quadruple, zero off the energy shell in exact-shell mode.
double collision_weight(double lambda, double M, double dE, ShellMode mode, double eta);

CollisionTable build_table(const Dispersion& band, const PairPotential& v,
                           const ScalingParameters& params, const TableOptions& opt = {});

// 3 * median spacing between distinct nonzero |dE| values over the momentum shell.
double default_eta(const Dispersion& band);

// (dw/dt)_p = n^{-2 nu} sum_{entries at p} W [w_k w_l (1-w_m)(1-w_p) - w_m w_p (1-w_k)(1-w_l)]
std::vector<double> collision_rhs(const CollisionTable& table, std::span<const double> w);
void collision_rhs(const CollisionTable& table, std::span<const double> w, std::span<double> out);

// Table-free triple loop with no pruning.
std::vector<double> collision_rhs_direct(const Dispersion& band, const PairPotential& v,
                                         const ScalingParameters& params, ShellMode mode,
                                         std::span<const double> w);

namespace kernels {
// Reference: one pass over the classes in table order into a single accumulator.
void rhs_serial(const CollisionTable& table, const double* w, double* out);
// Classes are cut into fixed-size blocks independent of the thread count; each block
// scatters into its own buffer and buffers are summed in block order, so the result
// is bit-identical for any number of threads (and equals rhs_serial up to rounding).
void rhs_parallel(const CollisionTable& table, const double* w, double* out);
inline constexpr std::size_t kClassBlock = 1 << 15;
}  // namespace kernels

}  // namespace fk

#pragma once

#include <memory>

#include "fermikinetics/lattice.hpp"

namespace fk {

// Lattice Fourier transforms in the grid's momentum convention, backed by FFTW.
// Unnormalized in both directions:
//   to_sites:   out(x) = sum_j in(j) e^{+i p_j . x}
//   to_momenta: out(j) = sum_x in(x) e^{-i p_j . x}
// Execution is thread-safe; construction serializes on FFTW's planner.
class LatticeDft {
public:
    explicit LatticeDft(const MomentumGrid& grid);
    ~LatticeDft();
    LatticeDft(const LatticeDft&) = delete;
    LatticeDft& operator=(const LatticeDft&) = delete;

    const MomentumGrid& grid() const { return grid_; }
    void to_sites(const cplx* in, cplx* out) const;
    void to_momenta(const cplx* in, cplx* out) const;

private:
    struct Plans;
    MomentumGrid grid_;
    std::unique_ptr<Plans> plans_;
};

}  // namespace fk

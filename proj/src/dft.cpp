#include "fermikinetics/dft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace fk {

namespace {
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// (-1)^{x_0 + x_1}: the e^{-i pi x} offset of p_j = -pi + 2 pi j / n.
bool odd_site(const MomentumGrid& g, Index x)
{
    Coords c = g.coords(x);
    return ((c[0] + c[1]) & 1) != 0;
}
}  // namespace

struct LatticeDft::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

LatticeDft::LatticeDft(const MomentumGrid& grid) : grid_(grid), plans_(std::make_unique<Plans>())
{
    std::vector<cplx> a(grid.size()), b(grid.size());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (grid.dim() == 1) {
        plans_->forward = fftw_plan_dft_1d(grid.n(), pa, pb, FFTW_FORWARD, flags);
        plans_->backward = fftw_plan_dft_1d(grid.n(), pa, pb, FFTW_BACKWARD, flags);
    } else {
        plans_->forward = fftw_plan_dft_2d(grid.n(), grid.n(), pa, pb, FFTW_FORWARD, flags);
        plans_->backward = fftw_plan_dft_2d(grid.n(), grid.n(), pa, pb, FFTW_BACKWARD, flags);
    }
}

LatticeDft::~LatticeDft()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plans_->forward) fftw_destroy_plan(plans_->forward);
    if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

void LatticeDft::to_sites(const cplx* in, cplx* out) const
{
    // FFTW's plan arrays must not alias the const input.
    std::vector<cplx> buf(in, in + grid_.size());
    fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(out));
    for (Index x = 0; x < grid_.size(); ++x)
        if (odd_site(grid_, x)) out[x] = -out[x];
}

void LatticeDft::to_momenta(const cplx* in, cplx* out) const
{
    std::vector<cplx> buf(in, in + grid_.size());
    for (Index x = 0; x < grid_.size(); ++x)
        if (odd_site(grid_, x)) buf[x] = -buf[x];
    fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace fk

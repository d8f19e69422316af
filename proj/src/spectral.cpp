#include "spectral.hpp"

#include <algorithm>
#include <memory>

#include <fftw3.h>

// FFTW planning is not thread-safe; plans are created per call from the
// calling thread only.

namespace tnn::detail {
namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

Spectrum rfft_tubes(const Tensor3& a)
{
    Spectrum s;
    s.dims = a.dims();
    s.bins = spectrum_bins(a.n());
    const int n = static_cast<int>(a.n());
    const int howmany = static_cast<int>(a.ell() * a.m());
    s.coeffs.assign(static_cast<std::size_t>(howmany * s.bins), Complex{});

    std::vector<double> in(a.values().begin(), a.values().end());
    Plan plan(fftw_plan_many_dft_r2c(1, &n, howmany, in.data(), nullptr, 1, n,
                                     reinterpret_cast<fftw_complex*>(s.coeffs.data()), nullptr, 1,
                                     static_cast<int>(s.bins), FFTW_ESTIMATE));
    fftw_execute(plan.get());
    return s;
}

Tensor3 irfft_tubes(const Spectrum& s)
{
    Tensor3 out(s.dims);
    const int n = static_cast<int>(s.dims.n);
    const int howmany = static_cast<int>(s.dims.ell * s.dims.m);
    // c2r overwrites its input.
    std::vector<Complex> work(s.coeffs);
    Plan plan(fftw_plan_many_dft_c2r(1, &n, howmany, reinterpret_cast<fftw_complex*>(work.data()), nullptr, 1,
                                     static_cast<int>(s.bins), out.data(), nullptr, 1, n, FFTW_ESTIMATE));
    fftw_execute(plan.get());
    out *= 1.0 / static_cast<double>(n);
    return out;
}

}  // namespace tnn::detail

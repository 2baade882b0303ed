#pragma once

// Batched angular DFTs over the rings of a polar grid, backed by FFTW.
//
// Plans are created with FFTW_ESTIMATE so that results are reproducible run to run. Plan
// creation is serialised; execution through the new-array interface is reentrant.

#include <harmap/core.hpp>

#include <fftw3.h>

#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace harmap::fourier {

enum class Direction { forward, backward };

namespace detail {

enum class PlanKind { c2c_forward, c2c_backward, r2c };

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<PlanKind, int, int>, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& [key, plan] : plans)
            fftw_destroy_plan(plan);
    }
};

inline PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

inline fftw_plan plan_for(PlanKind kind, int n, int howmany)
{
    auto& cache = plan_cache();
    std::lock_guard lock(cache.mutex);
    const auto key = std::make_tuple(kind, n, howmany);
    if (auto it = cache.plans.find(key); it != cache.plans.end())
        return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (kind == PlanKind::r2c) {
        const std::size_t out_len = static_cast<std::size_t>(n / 2 + 1) * howmany;
        double* in = fftw_alloc_real(static_cast<std::size_t>(n) * howmany);
        fftw_complex* out = fftw_alloc_complex(out_len);
        plan = fftw_plan_many_dft_r2c(1, &n, howmany, in, nullptr, 1, n, out, nullptr, 1, n / 2 + 1,
                                      flags);
        fftw_free(in);
        fftw_free(out);
    } else {
        fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * howmany);
        const int sign = kind == PlanKind::c2c_forward ? FFTW_FORWARD : FFTW_BACKWARD;
        plan = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, 1, n, buf, nullptr, 1, n, sign, flags);
        fftw_free(buf);
    }
    if (plan == nullptr)
        throw Error(ErrorKind::usage, "fftw planning failed");
    cache.plans.emplace(key, plan);
    return plan;
}

} // namespace detail

/// In-place unnormalised DFT of `howmany` contiguous rings of length n.
/// forward: X_k = sum_a x_a e^{-2 pi i k a / n}; backward uses e^{+...}.
inline void transform_rings(std::span<cplx> data, int n, Direction dir)
{
    if (n <= 0 || data.size() % static_cast<std::size_t>(n) != 0)
        throw Error(ErrorKind::usage, "transform_rings: data length is not a multiple of n");
    const int howmany = static_cast<int>(data.size() / n);
    if (howmany == 0)
        return;
    const auto kind = dir == Direction::forward ? detail::PlanKind::c2c_forward
                                                : detail::PlanKind::c2c_backward;
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(detail::plan_for(kind, n, howmany), p, p);
}

/// Real-to-complex forward DFT of `howmany` contiguous real rows of length n;
/// returns (n/2 + 1) coefficients per row.
inline std::vector<cplx> real_spectrum(std::span<const double> rows, int n)
{
    const int howmany = static_cast<int>(rows.size() / n);
    std::vector<double> in(rows.begin(), rows.end());
    std::vector<cplx> out(static_cast<std::size_t>(n / 2 + 1) * howmany);
    if (howmany == 0)
        return out;
    fftw_execute_dft_r2c(detail::plan_for(detail::PlanKind::r2c, n, howmany), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

/// Signed wavenumber of DFT bin k for length n (Nyquist reported as +n/2).
inline int wavenumber(int k, int n) noexcept { return k <= n / 2 ? k : k - n; }

} // namespace harmap::fourier

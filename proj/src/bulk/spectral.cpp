#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "lightcone/bulk.hpp"
#include "lightcone/errors.hpp"

namespace lightcone::bulk {

namespace {
std::mutex plan_mutex;
}

// Periodic box of N = nx - 1 nodes per axis; the last grid node is the periodic
// image of the first. Data are expected to vanish near the box faces.
CauchyData spectral_evolve(const BulkGrid& g, const CauchyData& data, double t, double mass2) {
    const int d = g.d();
    const int N = g.nx() - 1;
    const std::size_t total = d == 3 ? static_cast<std::size_t>(N) * N * N : static_cast<std::size_t>(N) * N;
    const std::size_t half = static_cast<std::size_t>(N / 2 + 1);
    const std::size_t ctotal = total / N * half;

    double* in = fftw_alloc_real(total);
    fftw_complex* c0 = fftw_alloc_complex(ctotal);
    fftw_complex* c1 = fftw_alloc_complex(ctotal);
    int dims[3] = {N, N, N};
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fwd = fftw_plan_dft_r2c(d, dims, in, c0, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r(d, dims, c0, in, FFTW_ESTIMATE);
    }
    // FFTW uses row-major order with the last index fastest; our x index is fastest.
    auto gather = [&](const Field& f) {
        for (std::size_t m = 0; m < total; ++m) {
            const int i = static_cast<int>(m % N);
            const std::size_t r = m / N;
            const int j = static_cast<int>(r % N);
            const int k = static_cast<int>(r / N);
            in[m] = f[g.index(i, j, d == 3 ? k : 0)];
        }
    };
    gather(data.phi0);
    fftw_execute_dft_r2c(fwd, in, c0);
    gather(data.phi1);
    fftw_execute_dft_r2c(fwd, in, c1);

    const double tau = t - data.t;
    const double L = N * g.dx();
    auto wave = [&](int m) { return 2.0 * std::numbers::pi * (m <= N / 2 ? m : m - N) / L; };
    std::vector<std::complex<double>> v(ctotal), dv(ctotal);
    for (std::size_t m = 0; m < ctotal; ++m) {
        // Complex layout: fastest index is the halved axis (our x).
        const int ix = static_cast<int>(m % half);
        const std::size_t r = m / half;
        const int iy = static_cast<int>(r % N);
        const int iz = static_cast<int>(r / N);
        double k2 = std::pow(2.0 * std::numbers::pi * ix / L, 2) + std::pow(wave(iy), 2);
        if (d == 3) k2 += std::pow(wave(iz), 2);
        const double w = std::sqrt(k2 + mass2);
        const std::complex<double> a(c0[m][0], c0[m][1]), b(c1[m][0], c1[m][1]);
        const double cs = std::cos(w * tau);
        const double sn_w = w > 0.0 ? std::sin(w * tau) / w : tau;
        v[m] = cs * a + sn_w * b;
        dv[m] = -w * w * sn_w * a + cs * b;
    }
    CauchyData out;
    out.t = t;
    out.phi0.assign(g.size(), 0.0);
    out.phi1.assign(g.size(), 0.0);
    auto scatter = [&](Field& f) {
        const double norm = 1.0 / static_cast<double>(total);
        for (int k = 0; k < g.nz(); ++k)
            for (int j = 0; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i) {
                    const std::size_t m = static_cast<std::size_t>(i % N) +
                                          static_cast<std::size_t>(N) * ((j % N) + static_cast<std::size_t>(N) * (d == 3 ? k % N : 0));
                    f[g.index(i, j, k)] = in[m] * norm;
                }
    };
    for (std::size_t m = 0; m < ctotal; ++m) {
        c0[m][0] = v[m].real();
        c0[m][1] = v[m].imag();
    }
    fftw_execute_dft_c2r(bwd, c0, in);
    scatter(out.phi0);
    for (std::size_t m = 0; m < ctotal; ++m) {
        c0[m][0] = dv[m].real();
        c0[m][1] = dv[m].imag();
    }
    fftw_execute_dft_c2r(bwd, c0, in);
    scatter(out.phi1);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    fftw_free(in);
    fftw_free(c0);
    fftw_free(c1);
    return out;
}

}  // namespace lightcone::bulk

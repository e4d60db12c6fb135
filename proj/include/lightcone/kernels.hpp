#pragma once

// Inner loops with a scalar reference and an AVX2 variant. The variant is
// picked once at runtime from CPU features; LIGHTCONE_ISA=scalar forces the
// reference path.

#include <cstddef>

#include "lightcone/types.hpp"

namespace lightcone::kernels {

enum class Isa { scalar, avx2 };

Isa detected_isa();
Isa active_isa();
void force_isa(Isa isa);  // clamps to what the CPU supports
const char* isa_name(Isa isa);

// One x-row of the flat leapfrog update on interior points 1..n-2:
//   next = 2 cur - prev + lam2 * (sum of 2d neighbours - 2d cur) - pot * cur
// zm/zp are null for two space dimensions, pot may be null.
struct StencilRow {
    const double* cur = nullptr;
    const double* prev = nullptr;
    double* next = nullptr;
    const double* ym = nullptr;
    const double* yp = nullptr;
    const double* zm = nullptr;
    const double* zp = nullptr;
    const double* pot = nullptr;
    std::size_t n = 0;
    double lam2 = 0.0;
};

// Conservative variable-coefficient update for d_t(A d_t u) = div(A grad u) - q u:
//   next = cur + (atm (cur - prev) + lam2 * flux - pot * cur) / atp
// with face coefficients taken as arithmetic means of the nodal A.
struct WeightedRow {
    const double* cur = nullptr;
    const double* prev = nullptr;
    double* next = nullptr;
    const double* ym = nullptr;
    const double* yp = nullptr;
    const double* zm = nullptr;
    const double* zp = nullptr;
    const double* a = nullptr;
    const double* aym = nullptr;
    const double* ayp = nullptr;
    const double* azm = nullptr;
    const double* azp = nullptr;
    const double* atm = nullptr;
    const double* atp = nullptr;
    const double* pot = nullptr;
    std::size_t n = 0;
    double lam2 = 0.0;
};

void leapfrog_row(const StencilRow& row);
void weighted_row(const WeightedRow& row);
void scale_complex(cplx* x, const double* mult, std::size_t n);
void mul_complex(cplx* x, const cplx* y, std::size_t n);
cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n);

namespace scalar {
void leapfrog_row(const StencilRow& row);
void weighted_row(const WeightedRow& row);
void scale_complex(cplx* x, const double* mult, std::size_t n);
void mul_complex(cplx* x, const cplx* y, std::size_t n);
cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();
void leapfrog_row(const StencilRow& row);
void weighted_row(const WeightedRow& row);
void scale_complex(cplx* x, const double* mult, std::size_t n);
void mul_complex(cplx* x, const cplx* y, std::size_t n);
cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n);
}  // namespace avx2

}  // namespace lightcone::kernels

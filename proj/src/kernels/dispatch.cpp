#include <atomic>
#include <cstdlib>
#include <cstring>

#include "lightcone/kernels.hpp"

namespace lightcone::kernels {

namespace {

Isa probe() {
#if defined(__x86_64__) || defined(__i386__)
    if (avx2::compiled() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
    return Isa::scalar;
}

Isa initial() {
    Isa isa = probe();
    if (const char* env = std::getenv("LIGHTCONE_ISA"); env && std::strcmp(env, "scalar") == 0) isa = Isa::scalar;
    return isa;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial()};
    return isa;
}

}  // namespace

Isa detected_isa() {
    static const Isa isa = probe();
    return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
    current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void leapfrog_row(const StencilRow& row) {
    if (active_isa() == Isa::avx2) avx2::leapfrog_row(row);
    else scalar::leapfrog_row(row);
}

void weighted_row(const WeightedRow& row) {
    if (active_isa() == Isa::avx2) avx2::weighted_row(row);
    else scalar::weighted_row(row);
}

void scale_complex(cplx* x, const double* mult, std::size_t n) {
    if (active_isa() == Isa::avx2) avx2::scale_complex(x, mult, n);
    else scalar::scale_complex(x, mult, n);
}

void mul_complex(cplx* x, const cplx* y, std::size_t n) {
    if (active_isa() == Isa::avx2) avx2::mul_complex(x, y, n);
    else scalar::mul_complex(x, y, n);
}

cplx weighted_dot(const cplx* a, const cplx* b, const double* w, std::size_t n) {
    if (active_isa() == Isa::avx2) return avx2::weighted_dot(a, b, w, n);
    return scalar::weighted_dot(a, b, w, n);
}

}  // namespace lightcone::kernels

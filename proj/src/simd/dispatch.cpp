#include <atomic>
#include <cstdlib>
#include <string>
#include <string_view>

#include "flowgate/core/errors.hpp"
#include "flowgate/simd/kernels.hpp"

namespace flowgate::simd {

namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* initial_table()
{
    if (const char* env = std::getenv("FLOWGATE_ISA")) {
        const std::string_view want(env);
        if (want == "scalar")
            return &scalar::table;
        if (want == "avx2" && supported(Isa::Avx2))
            return table_for(Isa::Avx2);
    }
    return table_for(best_supported());
}

} // namespace

std::string_view to_string(Isa isa) noexcept
{
    switch (isa) {
    case Isa::Scalar:
        return "scalar";
    case Isa::Avx2:
        return "avx2";
    }
    return "unknown";
}

bool supported(Isa isa)
{
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(FLOWGATE_HAVE_AVX2_KERNELS)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

Isa best_supported()
{
    return supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

const KernelTable* table_for(Isa isa)
{
    if (!supported(isa))
        return nullptr;
    switch (isa) {
    case Isa::Scalar:
        return &scalar::table;
    case Isa::Avx2:
#if defined(FLOWGATE_HAVE_AVX2_KERNELS)
        return &avx2::table;
#else
        return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active()
{
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        const KernelTable* init = initial_table();
        g_active.compare_exchange_strong(t, init, std::memory_order_acq_rel);
        t = g_active.load(std::memory_order_acquire);
    }
    return *t;
}

void select(Isa isa)
{
    const KernelTable* t = table_for(isa);
    if (!t)
        throw InvalidArgument("ISA not supported on this machine: " + std::string(to_string(isa)));
    g_active.store(t, std::memory_order_release);
}

ScopedIsa::ScopedIsa(Isa isa) : previous_(active().isa)
{
    select(isa);
}

ScopedIsa::~ScopedIsa()
{
    select(previous_);
}

} // namespace flowgate::simd

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "dqnlab/kernels.hpp"

namespace dqnlab::kernels {

#if defined(DQNLAB_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

const KernelTable* avx2_table() noexcept {
#if defined(DQNLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable* pick() noexcept {
    if (const char* want = std::getenv("DQNLAB_KERNELS"); want && std::string_view(want) == "scalar")
        return &scalar_table();
    if (const KernelTable* v = avx2_table()) return v;
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> current{pick()};
    return current;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void set_active(const KernelTable& table) noexcept { slot().store(&table, std::memory_order_relaxed); }

}  // namespace dqnlab::kernels

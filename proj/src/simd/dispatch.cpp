#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "activelc/simd.hpp"

namespace activelc::simd {

#ifndef ACTIVELC_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(ACTIVELC_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    const char* env = std::getenv("ACTIVELC_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return &scalar_kernels();
    if (cpu_has_avx2() && avx2_kernels() != nullptr) return avx2_kernels();
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_table() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

bool level_supported(Level level) {
    switch (level) {
        case Level::Scalar: return true;
        case Level::Avx2: return cpu_has_avx2() && avx2_kernels() != nullptr;
    }
    return false;
}

const KernelTable& kernels() { return *active_table().load(std::memory_order_relaxed); }

void set_level(Level level) {
    if (!level_supported(level))
        throw std::invalid_argument("SIMD level not supported: " + std::string(level_name(level)));
    active_table().store(level == Level::Avx2 ? avx2_kernels() : &scalar_kernels());
}

Level active_level() { return kernels().level; }

std::string_view level_name(Level level) {
    return level == Level::Avx2 ? "avx2" : "scalar";
}

}  // namespace activelc::simd

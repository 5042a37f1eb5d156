#include <atomic>
#include <cstdlib>
#include <string>

#include "travkit/errors.hpp"
#include "travkit/kernels.hpp"

namespace travkit::kernels {

#ifndef TRAVKIT_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(TRAVKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

namespace {

const KernelTable* table_for(Isa isa) {
  return isa == Isa::kAvx2 ? avx2_table() : &scalar_table();
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("TRAVKIT_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && isa_supported(Isa::kAvx2)) return avx2_table();
  }
  return isa_supported(Isa::kAvx2) ? avx2_table() : &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{initial_table()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Isa isa) {
  if (!isa_supported(isa)) {
    throw InvalidParameter("kernel ISA '" + std::string(isa_name(isa)) + "' unsupported here");
  }
  slot().store(table_for(isa), std::memory_order_release);
}

}  // namespace travkit::kernels

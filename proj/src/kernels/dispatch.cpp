#include <string>

#include "privsub/error.hpp"
#include "privsub/kernels.hpp"

namespace privsub::kernels {

namespace {

constexpr KernelTable kScalarTable{Isa::Scalar, &scalar::kyle_step_post, &scalar::kyle_step_pre,
                                   &scalar::lvr_step};
#if defined(PRIVSUB_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::Avx2, &avx2::kyle_step_post, &avx2::kyle_step_pre, &avx2::lvr_step};
#endif

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(PRIVSUB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() { return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw ValidationError("kernel", std::string(isa_name(isa)) + " kernels are not available on this machine");
  }
#if defined(PRIVSUB_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa parse_isa(std::string_view name) {
  if (name == "auto") return best_isa();
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  throw ValidationError("kernel", "expected auto|scalar|avx2, got '" + std::string(name) + "'");
}

}  // namespace privsub::kernels

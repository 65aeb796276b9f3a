// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "spinrect/kernels.hpp"

namespace spinrect::kernels {
namespace {

constexpr KernelTable kScalar{Isa::scalar, detail::dot_scalar, detail::axpy_scalar,
                              detail::add_inplace_scalar, detail::gemm_scalar};
constexpr KernelTable kAvx2{Isa::avx2, detail::dot_avx2, detail::axpy_avx2,
                            detail::add_inplace_avx2, detail::gemm_avx2};
constexpr KernelTable kNeon{Isa::neon, detail::dot_neon, detail::axpy_neon,
                            detail::add_inplace_neon, detail::gemm_neon};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("SPINRECT_ISA")) {
    const std::string name(forced);
    if (name == "scalar") return table(Isa::scalar);
    if (name == "avx2") return table(Isa::avx2);
    if (name == "neon") return table(Isa::neon);
    throw std::runtime_error("SPINRECT_ISA: unknown kernel set '" + name + "'");
  }
  if (available(Isa::avx2)) return kAvx2;
  if (available(Isa::neon)) return kNeon;
  return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return detail::avx2_compiled() && cpu_has_avx2();
    case Isa::neon: return detail::neon_compiled();
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) {
    throw std::runtime_error("kernel set '" + std::string(isa_name(isa)) +
                             "' is not available on this machine");
  }
  switch (isa) {
    case Isa::avx2: return kAvx2;
    case Isa::neon: return kNeon;
    case Isa::scalar: break;
  }
  return kScalar;
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace spinrect::kernels

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace dcpl::detail {

struct SobolPolynomial {
  unsigned degree;
  std::uint32_t coefficients;  // interior coefficients a, Joe-Kuo encoding
  std::array<std::uint32_t, 8> initial;  // m_1..m_degree
};

inline constexpr std::size_t kSobolTableRows = 20;
extern const std::array<SobolPolynomial, kSobolTableRows> kSobolTable;

}  // namespace dcpl::detail

#include "mtsplan/plan.hpp"

#include "mtsplan/error.hpp"

namespace mtsplan {

std::string to_hex(const PhaseVector& phases) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((phases.size() + 3) / 4);
  for (std::size_t i = 0; i < phases.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      nibble <<= 1;
      if (i + k < phases.size() && phases.bits[i + k]) nibble |= 1u;
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

PhaseVector phases_from_hex(const std::string& hex, std::size_t n_bits) {
  if (hex.size() != (n_bits + 3) / 4)
    throw ParseError("hex bitstring length does not match " + std::to_string(n_bits) + " bits");
  PhaseVector out(n_bits);
  for (std::size_t h = 0; h < hex.size(); ++h) {
    const char ch = hex[h];
    unsigned nibble;
    if (ch >= '0' && ch <= '9') nibble = ch - '0';
    else if (ch >= 'a' && ch <= 'f') nibble = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') nibble = ch - 'A' + 10;
    else throw ParseError(std::string("invalid hex digit '") + ch + "'");
    for (std::size_t k = 0; k < 4; ++k) {
      const bool bit = (nibble >> (3 - k)) & 1u;
      const std::size_t idx = 4 * h + k;
      if (idx < n_bits) out.bits[idx] = bit;
      else if (bit) throw ParseError("hex bitstring has non-zero padding");
    }
  }
  return out;
}

}  // namespace mtsplan

#include "ulba/common.hpp"

namespace ulba {

Rng child_rng(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

std::string_view to_string(Policy policy) {
  return policy == Policy::ulba ? "ulba" : "standard";
}

Policy parse_policy(std::string_view text) {
  if (text == "standard") {
    return Policy::standard;
  }
  if (text == "ulba") {
    return Policy::ulba;
  }
  throw ConfigError("unknown policy '" + std::string(text) + "' (expected standard or ulba)");
}

} // namespace ulba

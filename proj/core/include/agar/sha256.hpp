#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agar {

/* FIPS 180-4 SHA-256, enough for config fingerprints and format
 * version hashes; not a hot path. */
std::string sha256_hex(std::string_view data);

}  // namespace agar

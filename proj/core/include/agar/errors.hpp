#pragma once

#include <stdexcept>
#include <string>

namespace agar {

/* Raised when an enumeration or family sweep would exceed its declared
 * resource budget. Callers must not fall back to silent truncation. */
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace agar

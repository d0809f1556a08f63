#pragma once

#include <functional>
#include <iosfwd>
#include <string>

namespace phasetop {

/// Writes through a temporary sibling file and renames it over `path`.
/// Throws std::runtime_error mentioning the path on I/O failure.
void writeFileAtomically(const std::string& path, const std::function<void(std::ostream&)>& body);
void writeFileAtomically(const std::string& path, const std::string& text);

}  // namespace phasetop

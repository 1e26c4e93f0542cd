#pragma once

#include <functional>
#include <ostream>
#include <string>

namespace fastgcrnn {

/// Writes via a temp file in the same directory, renamed over the target on
/// success. The target is never left half-written.
void atomic_write_file(const std::string& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary = false);

std::string read_file(const std::string& path);

/// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

}  // namespace fastgcrnn

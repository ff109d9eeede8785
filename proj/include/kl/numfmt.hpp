#pragma once

#include <string>

namespace kl {

/// Shortest decimal string that round-trips the double (capped at 17
/// significant digits by construction). Used everywhere a number is
/// persisted, so outputs are reproducible byte for byte.
std::string fmt(double v);

/// Write `content` to `path` atomically (temp file + rename).
void write_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

} // namespace kl

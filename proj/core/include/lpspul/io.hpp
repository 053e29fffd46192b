#pragma once

#include <string>

namespace lpspul {

/// Full-precision, locale-independent double formatting (round-trip safe).
std::string format_double(double v);

/// Writes content to a temporary file in the same directory, then renames
/// it over path, so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace lpspul

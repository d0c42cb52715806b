#pragma once

#include <string>

namespace melod {

/// Shortest-roundtrip decimal form of a double; stable across runs so CSV
/// outputs are byte-reproducible.
std::string csv_num(double v);

/// Write a string to a file, creating parent directories as needed.
void write_file(const std::string& path, const std::string& content);

}  // namespace melod
